// Test-only oracles for the HMM suite: brute-force path enumeration and a
// reference sampler. Kept independent of the forward/Viterbi code paths.
#ifndef SID_TESTS_HMM_ORACLES_HPP
#define SID_TESTS_HMM_ORACLES_HPP

#include <cmath>
#include <vector>

#include "sid/hmm.hpp"
#include "sid/matrix.hpp"
#include "sid/rng.hpp"

namespace sid::test {

// log P(X | M) by explicit summation over all S^T state paths.
inline double brute_force_log_likelihood(const hmm::HmmModel& model,
                                         const Matrix& seq) {
  const int S = model.n_states;
  const std::size_t T = seq.rows();
  Matrix lb(T, S);
  std::vector<double> scratch;
  for (std::size_t t = 0; t < T; ++t)
    for (int j = 0; j < S; ++j)
      lb(t, j) = model.emissions[j].log_density(seq.row(t), scratch);

  std::vector<int> path(T, 0);
  std::vector<double> terms;
  while (true) {
    double lp = model.initial[path[0]] > 0.0
                    ? std::log(model.initial[path[0]]) + lb(0, path[0])
                    : kNegInf;
    for (std::size_t t = 1; t < T && lp != kNegInf; ++t) {
      const double a = model.transitions(path[t - 1], path[t]);
      lp = a > 0.0 ? lp + std::log(a) + lb(t, path[t]) : kNegInf;
    }
    if (lp != kNegInf) terms.push_back(lp);

    std::size_t pos = 0;
    while (pos < T && ++path[pos] == S) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == T) break;
  }
  return logsumexp(terms);
}

// max over all paths, same enumeration.
inline double brute_force_best_path(const hmm::HmmModel& model,
                                    const Matrix& seq) {
  const int S = model.n_states;
  const std::size_t T = seq.rows();
  Matrix lb(T, S);
  std::vector<double> scratch;
  for (std::size_t t = 0; t < T; ++t)
    for (int j = 0; j < S; ++j)
      lb(t, j) = model.emissions[j].log_density(seq.row(t), scratch);

  std::vector<int> path(T, 0);
  double best = kNegInf;
  while (true) {
    double lp = model.initial[path[0]] > 0.0
                    ? std::log(model.initial[path[0]]) + lb(0, path[0])
                    : kNegInf;
    for (std::size_t t = 1; t < T && lp != kNegInf; ++t) {
      const double a = model.transitions(path[t - 1], path[t]);
      lp = a > 0.0 ? lp + std::log(a) + lb(t, path[t]) : kNegInf;
    }
    best = std::max(best, lp);

    std::size_t pos = 0;
    while (pos < T && ++path[pos] == S) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == T) break;
  }
  return best;
}

// random left-to-right model with diagonal mixtures
inline hmm::HmmModel random_model(Rng& rng, int n_states, int n_mix,
                                  std::size_t dim) {
  hmm::HmmModel m;
  m.n_states = n_states;
  m.cov_type = CovType::Diagonal;
  m.transitions = Matrix(n_states, n_states);
  for (int i = 0; i < n_states; ++i) {
    if (i + 1 < n_states) {
      const double self = rng.uniform(0.2, 0.8);
      m.transitions(i, i) = self;
      m.transitions(i, i + 1) = 1.0 - self;
    } else {
      m.transitions(i, i) = 1.0;
    }
  }
  m.initial.assign(n_states, 0.0);
  m.initial[0] = 1.0;
  m.emissions.resize(n_states);
  for (int j = 0; j < n_states; ++j) {
    Mixture& mix = m.emissions[j];
    mix.weights.resize(n_mix);
    double wsum = 0.0;
    for (int c = 0; c < n_mix; ++c) {
      mix.weights[c] = rng.uniform(0.2, 1.0);
      wsum += mix.weights[c];
    }
    for (double& w : mix.weights) w /= wsum;
    for (int c = 0; c < n_mix; ++c) {
      Gaussian g;
      g.type = CovType::Diagonal;
      g.mean.resize(dim);
      g.var.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        g.mean[d] = rng.uniform(-3.0, 3.0) + 2.0 * j;
        g.var[d] = rng.uniform(0.3, 2.0);
      }
      mix.components.push_back(g);
    }
  }
  m.prepare();
  return m;
}

inline Matrix random_sequence(Rng& rng, std::size_t T, std::size_t dim) {
  Matrix X(T, dim);
  for (double& v : X.data()) v = rng.uniform(-4.0, 4.0);
  return X;
}

// draws a sequence from the model itself
inline Matrix sample_sequence(const hmm::HmmModel& model, Rng& rng,
                              std::size_t T) {
  const std::size_t dim = model.feature_dim();
  Matrix X(T, dim);
  int state = 0;
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      const double self = model.transitions(state, state);
      if (state + 1 < model.n_states && rng.uniform() >= self) ++state;
    }
    const Mixture& mix = model.emissions[state];
    double r = rng.uniform();
    std::size_t comp = 0;
    for (; comp + 1 < mix.size(); ++comp) {
      if (r < mix.weights[comp]) break;
      r -= mix.weights[comp];
    }
    const Gaussian& g = mix.components[comp];
    for (std::size_t d = 0; d < dim; ++d)
      X(t, d) = g.mean[d] + std::sqrt(g.var[g.var.size() == 1 ? 0 : d]) * rng.gauss();
  }
  return X;
}

}  // namespace sid::test

#endif  // SID_TESTS_HMM_ORACLES_HPP
