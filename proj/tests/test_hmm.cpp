#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hmm_oracles.hpp"
#include "sid/errors.hpp"
#include "sid/hmm.hpp"
#include "sid/rng.hpp"

using namespace sid;
using namespace sid::hmm;

namespace {

bool close_rel(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<Matrix> blob_sequences(Rng& rng, int n, std::size_t T,
                                   std::size_t dim) {
  std::vector<Matrix> out;
  for (int i = 0; i < n; ++i) {
    Rng r = rng.fork(i);
    Matrix X(T, dim);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t d = 0; d < dim; ++d)
        X(t, d) = (t < T / 2 ? -1.5 : 1.5) + 0.5 * r.gauss();
    out.push_back(std::move(X));
  }
  return out;
}

}  // namespace

TEST_CASE("init_model satisfies every structural invariant") {
  Rng rng(3);
  const std::vector<Matrix> seqs = blob_sequences(rng, 8, 40, 5);

  for (CovType t : {CovType::Diagonal, CovType::Full, CovType::Spherical}) {
    const HmmModel m = init_model(4, 3, t, seqs);
    m.validate();
    CHECK(m.n_states == 4);
    CHECK(m.emissions.size() == 4);
    for (int i = 0; i < 3; ++i) {
      CHECK(m.transitions(i, i) == doctest::Approx(0.5));
      CHECK(m.transitions(i, i + 1) == doctest::Approx(0.5));
    }
    CHECK(m.transitions(3, 3) == doctest::Approx(1.0));
  }
}

TEST_CASE("single-state model has the trivial transition matrix") {
  Rng rng(4);
  const std::vector<Matrix> seqs = blob_sequences(rng, 3, 20, 2);
  const HmmModel m = init_model(1, 2, CovType::Diagonal, seqs);
  CHECK(m.transitions.rows() == 1);
  CHECK(m.transitions(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("the published baseline configuration constructs cleanly") {
  Rng rng(5);
  // 4 states x 25 full-covariance mixtures needs >= 100 frames per state
  std::vector<Matrix> seqs;
  for (int i = 0; i < 12; ++i) {
    Rng r = rng.fork(i);
    Matrix X(60, 6);
    for (double& v : X.data()) v = r.gauss();
    seqs.push_back(std::move(X));
  }
  const HmmModel m = init_model(4, 25, CovType::Full, seqs);
  m.validate();
  CHECK(m.emissions[0].size() == 25);
}

TEST_CASE("too few frames for seeding is an init error") {
  Rng rng(6);
  const std::vector<Matrix> seqs = blob_sequences(rng, 1, 10, 2);
  CHECK_THROWS_AS(init_model(4, 5, CovType::Diagonal, seqs), InitError);
}

TEST_CASE("1-state single-gaussian score is the sum of frame densities") {
  Rng rng(7);
  HmmModel m = test::random_model(rng, 1, 1, 3);
  const Matrix X = test::random_sequence(rng, 12, 3);
  std::vector<double> scratch;
  double expect = 0.0;
  for (std::size_t t = 0; t < X.rows(); ++t)
    expect += m.emissions[0].components[0].log_density(X.row(t), scratch);
  CHECK(log_likelihood(m, X) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("forward matches exhaustive path enumeration") {
  Rng rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    Rng r = rng.fork(trial);
    const int S = 1 + static_cast<int>(r.uniform_int(0, 2));
    const int M = 1 + static_cast<int>(r.uniform_int(0, 1));
    const std::size_t T = 1 + static_cast<std::size_t>(r.uniform_int(0, 5));
    const HmmModel m = test::random_model(r, S, M, 2);
    const Matrix X = test::random_sequence(r, T, 2);
    CHECK(close_rel(log_likelihood(m, X), test::brute_force_log_likelihood(m, X)));
  }
}

TEST_CASE("viterbi matches exhaustive best-path search") {
  Rng rng(4321);
  for (int trial = 0; trial < 60; ++trial) {
    Rng r = rng.fork(trial);
    const int S = 1 + static_cast<int>(r.uniform_int(0, 2));
    const std::size_t T = 1 + static_cast<std::size_t>(r.uniform_int(0, 5));
    const HmmModel m = test::random_model(r, S, 2, 2);
    const Matrix X = test::random_sequence(r, T, 2);
    const auto [path, lp] = viterbi(m, X);
    CHECK(close_rel(lp, test::brute_force_best_path(m, X)));

    // left-to-right: non-decreasing, steps of at most one
    for (std::size_t t = 1; t < path.size(); ++t) {
      CHECK(path[t] >= path[t - 1]);
      CHECK(path[t] - path[t - 1] <= 1);
    }
    CHECK(lp <= log_likelihood(m, X) + 1e-12);
  }
}

TEST_CASE("single-state viterbi path is all zeros") {
  Rng rng(9);
  const HmmModel m = test::random_model(rng, 1, 2, 2);
  const Matrix X = test::random_sequence(rng, 8, 2);
  const auto [path, lp] = viterbi(m, X);
  for (int s : path) CHECK(s == 0);
}

TEST_CASE("appended unreachable states leave the score unchanged") {
  Rng rng(10);
  const HmmModel m = test::random_model(rng, 2, 2, 3);
  const Matrix X = test::random_sequence(rng, 10, 3);

  HmmModel dup = m;
  dup.n_states = 4;
  dup.transitions = Matrix(4, 4);
  dup.transitions(0, 0) = m.transitions(0, 0);
  dup.transitions(0, 1) = m.transitions(0, 1);
  dup.transitions(1, 1) = 1.0;  // advance into the duplicates is zero
  dup.transitions(2, 2) = 0.5;
  dup.transitions(2, 3) = 0.5;
  dup.transitions(3, 3) = 1.0;
  dup.initial.assign(4, 0.0);
  dup.initial[0] = 1.0;
  dup.emissions.push_back(m.emissions[0]);
  dup.emissions.push_back(m.emissions[1]);
  dup.prepare();
  dup.validate();

  CHECK(close_rel(log_likelihood(dup, X), log_likelihood(m, X)));
}

TEST_CASE("1-state score is additive under concatenation") {
  Rng rng(11);
  const HmmModel m = test::random_model(rng, 1, 2, 3);
  const Matrix X = test::random_sequence(rng, 6, 3);
  const Matrix Y = test::random_sequence(rng, 9, 3);
  Matrix XY(15, 3);
  for (std::size_t t = 0; t < 6; ++t)
    for (int d = 0; d < 3; ++d) XY(t, d) = X(t, d);
  for (std::size_t t = 0; t < 9; ++t)
    for (int d = 0; d < 3; ++d) XY(6 + t, d) = Y(t, d);
  CHECK(close_rel(log_likelihood(m, XY),
                  log_likelihood(m, X) + log_likelihood(m, Y)));
}

TEST_CASE("baum-welch log-likelihood is monotone and invariants persist") {
  Rng rng(21);
  for (int run = 0; run < 4; ++run) {
    Rng r = rng.fork(run);
    const std::vector<Matrix> seqs = blob_sequences(r, 10, 30, 3);
    const HmmModel init = init_model(2, 2, CovType::Diagonal, seqs);
    TrainConfig cfg;
    cfg.max_iters = 15;
    const auto [trained, lls] = train_baum_welch(init, seqs, cfg);
    trained.validate();
    REQUIRE(lls.size() >= 2);
    for (std::size_t i = 1; i < lls.size(); ++i)
      CHECK(lls[i] >= lls[i - 1] - 1e-6 * std::abs(lls[i - 1]));
  }
}

TEST_CASE("full-covariance training also improves monotonically") {
  Rng rng(22);
  const std::vector<Matrix> seqs = blob_sequences(rng, 8, 24, 3);
  const HmmModel init = init_model(2, 2, CovType::Full, seqs);
  TrainConfig cfg;
  cfg.max_iters = 8;
  const auto [trained, lls] = train_baum_welch(init, seqs, cfg);
  trained.validate();
  for (std::size_t i = 1; i < lls.size(); ++i)
    CHECK(lls[i] >= lls[i - 1] - 1e-6 * std::abs(lls[i - 1]));
}

TEST_CASE("parameters of a known 2-state model are recovered") {
  Rng rng(31);
  HmmModel truth;
  truth.n_states = 2;
  truth.cov_type = CovType::Diagonal;
  truth.transitions = Matrix(2, 2);
  truth.transitions(0, 0) = 0.9;
  truth.transitions(0, 1) = 0.1;
  truth.transitions(1, 1) = 1.0;
  truth.initial = {1.0, 0.0};
  truth.emissions.resize(2);
  for (int j = 0; j < 2; ++j) {
    Gaussian g;
    g.type = CovType::Diagonal;
    g.mean = {j == 0 ? -2.0 : 2.0, j == 0 ? 1.0 : -1.0};
    g.var = {1.0, 1.0};
    truth.emissions[j].weights = {1.0};
    truth.emissions[j].components = {g};
  }
  truth.prepare();

  std::vector<Matrix> seqs;
  for (int i = 0; i < 500; ++i) {
    Rng r = rng.fork(i);
    seqs.push_back(test::sample_sequence(truth, r, 20));
  }

  const HmmModel init = init_model(2, 1, CovType::Diagonal, seqs);
  TrainConfig cfg;
  cfg.max_iters = 30;
  const auto [trained, lls] = train_baum_welch(init, seqs, cfg);

  for (int j = 0; j < 2; ++j) {
    const auto& mean = trained.emissions[j].components[0].mean;
    const auto& expect = truth.emissions[j].components[0].mean;
    for (int d = 0; d < 2; ++d) CHECK(std::abs(mean[d] - expect[d]) < 0.15);
  }
}

TEST_CASE("iteration contract: zero rejected, one does a single update") {
  Rng rng(41);
  const std::vector<Matrix> seqs = blob_sequences(rng, 6, 20, 2);
  const HmmModel init = init_model(2, 1, CovType::Diagonal, seqs);

  TrainConfig bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(train_baum_welch(init, seqs, bad), ConfigError);

  TrainConfig one;
  one.max_iters = 1;
  const auto [trained, lls] = train_baum_welch(init, seqs, one);
  CHECK(lls.size() == 1);
  // the single update must have changed something
  bool changed = false;
  for (int j = 0; j < 2 && !changed; ++j)
    for (int d = 0; d < 2 && !changed; ++d)
      changed = trained.emissions[j].components[0].mean[d] !=
                init.emissions[j].components[0].mean[d];
  CHECK(changed);
}

TEST_CASE("training order does not matter") {
  Rng rng(51);
  std::vector<Matrix> seqs = blob_sequences(rng, 9, 25, 3);
  const HmmModel init = init_model(3, 2, CovType::Diagonal, seqs);
  TrainConfig cfg;
  cfg.max_iters = 6;
  const auto [a, lls_a] = train_baum_welch(init, seqs, cfg);

  std::vector<Matrix> shuffled = seqs;
  std::rotate(shuffled.begin(), shuffled.begin() + 4, shuffled.end());
  std::swap(shuffled[0], shuffled[2]);
  const HmmModel init2 = init_model(3, 2, CovType::Diagonal, shuffled);
  const auto [b, lls_b] = train_baum_welch(init2, shuffled, cfg);

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(a.transitions(i, j) - b.transitions(i, j)) < 1e-9);
  for (int j = 0; j < 3; ++j) {
    for (std::size_t c = 0; c < a.emissions[j].size(); ++c) {
      for (int d = 0; d < 3; ++d) {
        CHECK(std::abs(a.emissions[j].components[c].mean[d] -
                       b.emissions[j].components[c].mean[d]) < 1e-9);
        CHECK(std::abs(a.emissions[j].components[c].var[d] -
                       b.emissions[j].components[c].var[d]) < 1e-9);
      }
      CHECK(std::abs(a.emissions[j].weights[c] - b.emissions[j].weights[c]) < 1e-9);
    }
  }
}

TEST_CASE("sequences shorter than the state count are a training error") {
  Rng rng(61);
  const std::vector<Matrix> good = blob_sequences(rng, 8, 20, 2);
  const HmmModel init = init_model(3, 1, CovType::Diagonal, good);
  const std::vector<Matrix> short_seqs = blob_sequences(rng, 20, 2, 2);
  CHECK_THROWS_AS(train_baum_welch(init, short_seqs, TrainConfig{}), TrainError);
}

TEST_CASE("dimension mismatches are shape errors") {
  Rng rng(71);
  const HmmModel m = test::random_model(rng, 2, 1, 3);
  const Matrix X = test::random_sequence(rng, 5, 4);
  CHECK_THROWS_AS(log_likelihood(m, X), ShapeError);
  CHECK_THROWS_AS(viterbi(m, X), ShapeError);
}
