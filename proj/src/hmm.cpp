#include "sid/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sid/errors.hpp"
#include "sid/kernels.hpp"
#include "sid/kmeans.hpp"

namespace sid::hmm {

namespace {

// Content-based ordering so accumulation never depends on caller order.
std::vector<std::size_t> canonical_order(const std::vector<Matrix>& seqs) {
  std::vector<std::size_t> idx(seqs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const Matrix& x = seqs[a];
    const Matrix& y = seqs[b];
    if (x.rows() != y.rows()) return x.rows() < y.rows();
    if (x.cols() != y.cols()) return x.cols() < y.cols();
    for (std::size_t i = 0; i < x.data().size(); ++i) {
      if (x.data()[i] != y.data()[i]) return x.data()[i] < y.data()[i];
    }
    return a < b;
  });
  return idx;
}

Matrix log_emissions(const HmmModel& model, const Matrix& seq,
                     std::vector<Matrix>* per_comp_out) {
  const std::size_t T = seq.rows();
  const int S = model.n_states;
  Matrix lb(T, S);
  std::vector<double> per_comp, scratch;
  if (per_comp_out) {
    per_comp_out->assign(S, Matrix(T, model.emissions[0].size()));
    for (int j = 0; j < S; ++j)
      (*per_comp_out)[j] = Matrix(T, model.emissions[j].size());
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (int j = 0; j < S; ++j) {
      lb(t, j) = model.emissions[j].log_density(seq.row(t), per_comp, scratch);
      if (per_comp_out) {
        for (std::size_t m = 0; m < per_comp.size(); ++m)
          (*per_comp_out)[j](t, m) = per_comp[m];
      }
    }
  }
  return lb;
}

Matrix log_alpha(const HmmModel& model, const Matrix& lb) {
  const std::size_t T = lb.rows();
  const int S = model.n_states;
  Matrix la(T, S, kNegInf);
  for (int j = 0; j < S; ++j) {
    if (model.initial[j] > 0.0)
      la(0, j) = std::log(model.initial[j]) + lb(0, j);
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (int j = 0; j < S; ++j) {
      double acc = la(t - 1, j) == kNegInf || model.transitions(j, j) <= 0.0
                       ? kNegInf
                       : la(t - 1, j) + std::log(model.transitions(j, j));
      if (j > 0 && la(t - 1, j - 1) != kNegInf &&
          model.transitions(j - 1, j) > 0.0) {
        acc = logaddexp(acc, la(t - 1, j - 1) +
                                 std::log(model.transitions(j - 1, j)));
      }
      la(t, j) = acc == kNegInf ? kNegInf : acc + lb(t, j);
    }
  }
  return la;
}

// per-dimension lower bound: max(absolute floor, frac * global variance)
std::vector<double> floor_vector(const std::vector<Matrix>& sequences,
                                 std::size_t d, double abs_floor, double frac) {
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  std::size_t total = 0;
  for (const Matrix& s : sequences) total += s.rows();
  for (const Matrix& s : sequences)
    for (std::size_t t = 0; t < s.rows(); ++t)
      kernels::axpy(1.0 / total, s.row(t), mean.data(), d);
  for (const Matrix& s : sequences)
    for (std::size_t t = 0; t < s.rows(); ++t)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = s(t, j) - mean[j];
        var[j] += c * c / total;
      }
  std::vector<double> floor(d);
  for (std::size_t j = 0; j < d; ++j)
    floor[j] = std::max(abs_floor, frac * var[j]);
  return floor;
}

Matrix log_beta(const HmmModel& model, const Matrix& lb) {
  const std::size_t T = lb.rows();
  const int S = model.n_states;
  Matrix be(T, S, 0.0);
  for (std::size_t ti = T - 1; ti-- > 0;) {
    for (int i = 0; i < S; ++i) {
      double acc = kNegInf;
      if (model.transitions(i, i) > 0.0 && be(ti + 1, i) != kNegInf)
        acc = std::log(model.transitions(i, i)) + lb(ti + 1, i) + be(ti + 1, i);
      if (i + 1 < S && model.transitions(i, i + 1) > 0.0 &&
          be(ti + 1, i + 1) != kNegInf)
        acc = logaddexp(acc, std::log(model.transitions(i, i + 1)) +
                                 lb(ti + 1, i + 1) + be(ti + 1, i + 1));
      be(ti, i) = acc;
    }
  }
  return be;
}

}  // namespace

void HmmModel::prepare() {
  for (Mixture& m : emissions) m.prepare();
}

void HmmModel::validate() const {
  const int S = n_states;
  if (S < 1) throw TrainError("model has no states");
  if (static_cast<int>(transitions.rows()) != S ||
      static_cast<int>(transitions.cols()) != S)
    throw ShapeError("transition matrix shape");
  for (int i = 0; i < S; ++i) {
    double row = 0.0;
    for (int j = 0; j < S; ++j) {
      const double a = transitions(i, j);
      if (a < 0.0) throw TrainError("negative transition probability");
      if ((j < i || j > i + 1) && a != 0.0)
        throw TrainError("transition outside the left-to-right mask");
      row += a;
    }
    if (std::abs(row - 1.0) > 1e-9)
      throw TrainError("transition row does not sum to 1");
  }
  if (static_cast<int>(initial.size()) != S || std::abs(initial[0] - 1.0) > 1e-9)
    throw TrainError("initial mass must sit on state 0");
  if (static_cast<int>(emissions.size()) != S)
    throw ShapeError("one emission mixture required per state");
  for (const Mixture& m : emissions) {
    double w = 0.0;
    for (double x : m.weights) {
      if (x < 0.0) throw TrainError("negative mixture weight");
      w += x;
    }
    if (std::abs(w - 1.0) > 1e-9)
      throw TrainError("mixture weights do not sum to 1");
    for (const Gaussian& g : m.components) {
      if (g.type != cov_type) throw TrainError("covariance type mismatch");
      if (g.dim() != feature_dim()) throw ShapeError("component dimension");
    }
  }
}

HmmModel init_model(int n_states, int n_mix, CovType cov_type,
                    const std::vector<Matrix>& sequences,
                    double variance_floor, std::uint64_t seed,
                    double variance_floor_frac) {
  if (n_states < 1 || n_mix < 1) throw InitError("need states >= 1, mixtures >= 1");
  if (sequences.empty()) throw InitError("no training sequences");
  const std::size_t d = sequences[0].cols();
  std::size_t total = 0;
  for (const Matrix& s : sequences) {
    if (s.cols() != d) throw ShapeError("sequence dimension mismatch");
    total += s.rows();
  }
  if (total < static_cast<std::size_t>(n_states) * n_mix)
    throw InitError("too few frames for k-means seeding");
  const std::vector<double> floor =
      floor_vector(sequences, d, variance_floor, variance_floor_frac);
  double floor_mean = 0.0;
  for (double f : floor) floor_mean += f / d;

  const std::vector<std::size_t> order = canonical_order(sequences);

  // uniform-in-time partition of every sequence across the states
  std::vector<std::vector<const double*>> pools(n_states);
  for (std::size_t si : order) {
    const Matrix& seq = sequences[si];
    const std::size_t T = seq.rows();
    for (std::size_t t = 0; t < T; ++t) {
      int j = static_cast<int>(t * n_states / T);
      j = std::min(j, n_states - 1);
      pools[j].push_back(seq.row(t));
    }
  }

  HmmModel model;
  model.n_states = n_states;
  model.cov_type = cov_type;
  model.transitions = Matrix(n_states, n_states);
  for (int i = 0; i < n_states; ++i) {
    if (i + 1 < n_states) {
      model.transitions(i, i) = 0.5;
      model.transitions(i, i + 1) = 0.5;
    } else {
      model.transitions(i, i) = 1.0;
    }
  }
  model.initial.assign(n_states, 0.0);
  model.initial[0] = 1.0;

  model.emissions.resize(n_states);
  Rng rng(seed);
  for (int j = 0; j < n_states; ++j) {
    const auto& pool = pools[j];
    if (pool.size() < static_cast<std::size_t>(n_mix))
      throw InitError("state " + std::to_string(j) + " pool smaller than n_mix");
    const KmeansResult km = kmeans(pool, d, n_mix, rng.fork(j), 15);

    Mixture& mix = model.emissions[j];
    mix.weights.resize(n_mix);
    mix.components.resize(n_mix);
    for (int m = 0; m < n_mix; ++m) {
      Gaussian& g = mix.components[m];
      g.type = cov_type;
      g.mean.assign(km.centroids.row(m), km.centroids.row(m) + d);
      mix.weights[m] = static_cast<double>(km.counts[m]) / pool.size();

      // cluster covariance, floored
      std::vector<double> var(d, 0.0);
      Matrix scatter;
      if (cov_type == CovType::Full) scatter = Matrix(d, d);
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (km.assignment[i] != m) continue;
        for (std::size_t a = 0; a < d; ++a) {
          const double c = pool[i][a] - g.mean[a];
          if (cov_type == CovType::Full) {
            for (std::size_t b2 = 0; b2 < d; ++b2)
              scatter(a, b2) += c * (pool[i][b2] - g.mean[b2]);
          } else {
            var[a] += c * c;
          }
        }
      }
      if (cov_type == CovType::Full) {
        g.cov = Matrix(d, d);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b2 = 0; b2 < d; ++b2)
            g.cov(a, b2) = scatter(a, b2) / km.counts[m];
        for (std::size_t a = 0; a < d; ++a) g.cov(a, a) += variance_floor;
        Matrix probe = g.cov;
        double boost = variance_floor;
        while (!cholesky_lower(probe)) {
          boost *= 10.0;
          for (std::size_t a = 0; a < d; ++a) g.cov(a, a) += boost;
          probe = g.cov;
        }
      } else if (cov_type == CovType::Diagonal) {
        g.var.resize(d);
        for (std::size_t a = 0; a < d; ++a)
          g.var[a] = std::max(var[a] / km.counts[m], floor[a]);
      } else {
        double v = 0.0;
        for (std::size_t a = 0; a < d; ++a) v += var[a] / km.counts[m];
        g.var = {std::max(v / d, floor_mean)};
      }
    }
  }
  model.prepare();
  model.validate();
  return model;
}

double log_likelihood(const HmmModel& model, const Matrix& sequence) {
  if (sequence.rows() == 0) throw ShapeError("empty sequence");
  if (sequence.cols() != model.feature_dim())
    throw ShapeError("feature dimension mismatch");
  const Matrix lb = log_emissions(model, sequence, nullptr);
  const Matrix la = log_alpha(model, lb);
  return logsumexp(la.row(la.rows() - 1), model.n_states);
}

std::pair<std::vector<int>, double> viterbi(const HmmModel& model,
                                            const Matrix& sequence) {
  if (sequence.rows() == 0) throw ShapeError("empty sequence");
  if (sequence.cols() != model.feature_dim())
    throw ShapeError("feature dimension mismatch");
  const std::size_t T = sequence.rows();
  const int S = model.n_states;
  const Matrix lb = log_emissions(model, sequence, nullptr);

  Matrix delta(T, S, kNegInf);
  Matrix psi(T, S, 0.0);
  for (int j = 0; j < S; ++j)
    if (model.initial[j] > 0.0)
      delta(0, j) = std::log(model.initial[j]) + lb(0, j);
  for (std::size_t t = 1; t < T; ++t) {
    for (int j = 0; j < S; ++j) {
      double best = kNegInf;
      int arg = j;
      if (delta(t - 1, j) != kNegInf && model.transitions(j, j) > 0.0) {
        best = delta(t - 1, j) + std::log(model.transitions(j, j));
      }
      if (j > 0 && delta(t - 1, j - 1) != kNegInf &&
          model.transitions(j - 1, j) > 0.0) {
        const double v =
            delta(t - 1, j - 1) + std::log(model.transitions(j - 1, j));
        if (v > best) {
          best = v;
          arg = j - 1;
        }
      }
      delta(t, j) = best == kNegInf ? kNegInf : best + lb(t, j);
      psi(t, j) = arg;
    }
  }

  int last = 0;
  double best = delta(T - 1, 0);
  for (int j = 1; j < S; ++j) {
    if (delta(T - 1, j) > best) {
      best = delta(T - 1, j);
      last = j;
    }
  }
  std::vector<int> path(T);
  path[T - 1] = last;
  for (std::size_t t = T - 1; t-- > 0;)
    path[t] = static_cast<int>(psi(t + 1, path[t + 1]));
  return {std::move(path), best};
}

std::pair<HmmModel, std::vector<double>> train_baum_welch(
    const HmmModel& model_in, const std::vector<Matrix>& sequences,
    const TrainConfig& config) {
  if (config.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (sequences.empty()) throw TrainError("no training sequences");
  HmmModel model = model_in;
  model.validate();
  const int S = model.n_states;
  const std::size_t d = model.feature_dim();
  bool any_long_enough = false;
  for (const Matrix& s : sequences) {
    if (s.cols() != d) throw ShapeError("sequence dimension mismatch");
    if (static_cast<int>(s.rows()) >= S) any_long_enough = true;
  }
  if (!any_long_enough)
    throw TrainError("all sequences shorter than n_states");

  const std::vector<std::size_t> order = canonical_order(sequences);
  const bool full = model.cov_type == CovType::Full;

  // global diagonal variance for dead-component restarts
  std::vector<double> global_mean(d, 0.0), global_var(d, 0.0);
  std::size_t total_frames = 0;
  for (const Matrix& s : sequences) total_frames += s.rows();
  for (const Matrix& s : sequences)
    for (std::size_t t = 0; t < s.rows(); ++t)
      kernels::axpy(1.0 / total_frames, s.row(t), global_mean.data(), d);
  for (const Matrix& s : sequences)
    for (std::size_t t = 0; t < s.rows(); ++t)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = s(t, j) - global_mean[j];
        global_var[j] += c * c / total_frames;
      }
  std::vector<double> floor(d);
  double floor_mean = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    floor[j] = std::max(config.variance_floor,
                        config.variance_floor_frac * global_var[j]);
    global_var[j] = std::max(global_var[j], floor[j]);
    floor_mean += floor[j] / d;
  }

  std::vector<double> lls;

  struct StateStats {
    std::vector<double> occ;       // per component
    Matrix mean_acc;               // component x dim
    Matrix sq_acc;                 // component x dim (diag/spherical)
    std::vector<Matrix> scatter;   // per component (full)
  };

  for (int iter = 0; iter < config.max_iters; ++iter) {
    Matrix trans_acc(S, S);
    std::vector<StateStats> stats(S);
    for (int j = 0; j < S; ++j) {
      const std::size_t M = model.emissions[j].size();
      stats[j].occ.assign(M, 0.0);
      stats[j].mean_acc = Matrix(M, d);
      if (full)
        stats[j].scatter.assign(M, Matrix(d, d));
      else
        stats[j].sq_acc = Matrix(M, d);
    }

    double total_ll = 0.0;
    // worst-explained frame, kept for dead-component restarts
    double worst_score = std::numeric_limits<double>::max();
    std::vector<double> worst_frame;

    std::vector<Matrix> per_comp;
    for (std::size_t si : order) {
      const Matrix& seq = sequences[si];
      const std::size_t T = seq.rows();
      const Matrix lb = log_emissions(model, seq, &per_comp);
      const Matrix la = log_alpha(model, lb);
      const Matrix be = log_beta(model, lb);
      const double seq_ll = logsumexp(la.row(T - 1), S);
      if (seq_ll == kNegInf) throw TrainError("sequence has zero likelihood");
      total_ll += seq_ll;

      for (std::size_t t = 0; t < T; ++t) {
        double frame_best = kNegInf;
        for (int j = 0; j < S; ++j) frame_best = std::max(frame_best, lb(t, j));
        if (frame_best < worst_score) {
          worst_score = frame_best;
          worst_frame.assign(seq.row(t), seq.row(t) + d);
        }

        for (int j = 0; j < S; ++j) {
          const double lg = la(t, j) + be(t, j) - seq_ll;
          if (lg == kNegInf) continue;
          const double gamma = std::exp(lg);
          if (gamma <= 0.0) continue;
          const std::size_t M = model.emissions[j].size();
          for (std::size_t m = 0; m < M; ++m) {
            const double lr = per_comp[j](t, m) - lb(t, j);
            if (lr == kNegInf) continue;
            const double r = gamma * std::exp(lr);
            if (r <= 0.0) continue;
            stats[j].occ[m] += r;
            kernels::axpy(r, seq.row(t), stats[j].mean_acc.row(m), d);
            if (full) {
              Matrix& sc = stats[j].scatter[m];
              for (std::size_t a = 0; a < d; ++a)
                kernels::axpy(r * seq(t, a), seq.row(t), sc.row(a), d);
            } else {
              kernels::axpy_sq(r, seq.row(t), stats[j].sq_acc.row(m), d);
            }
          }
        }

        if (t + 1 < T) {
          for (int i = 0; i < S; ++i) {
            if (la(t, i) == kNegInf) continue;
            for (int j = i; j <= std::min(i + 1, S - 1); ++j) {
              const double a = model.transitions(i, j);
              if (a <= 0.0) continue;
              const double lx = la(t, i) + std::log(a) + lb(t + 1, j) +
                                be(t + 1, j) - seq_ll;
              if (lx != kNegInf) trans_acc(i, j) += std::exp(lx);
            }
          }
        }
      }
    }

    lls.push_back(total_ll);
    if (lls.size() >= 2) {
      const double prev = lls[lls.size() - 2];
      if (std::abs(total_ll - prev) <= config.ll_tol * std::abs(prev)) break;
    }

    // M step
    for (int i = 0; i + 1 < S; ++i) {
      const double denom = trans_acc(i, i) + trans_acc(i, i + 1);
      if (denom > 1e-300) {
        model.transitions(i, i) = trans_acc(i, i) / denom;
        model.transitions(i, i + 1) = trans_acc(i, i + 1) / denom;
      }
    }
    if (S >= 1) model.transitions(S - 1, S - 1) = 1.0;

    for (int j = 0; j < S; ++j) {
      Mixture& mix = model.emissions[j];
      const std::size_t M = mix.size();
      double state_occ = 0.0;
      for (std::size_t m = 0; m < M; ++m) state_occ += stats[j].occ[m];
      if (state_occ <= 1e-300) continue;  // state never visited: keep as is

      double wsum = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        Gaussian& g = mix.components[m];
        const double occ = stats[j].occ[m];
        if (occ < 1e-8) {
          g.mean = worst_frame;
          if (full) {
            g.cov = Matrix(d, d);
            for (std::size_t a = 0; a < d; ++a) g.cov(a, a) = global_var[a];
          } else if (model.cov_type == CovType::Diagonal) {
            g.var = global_var;
          } else {
            double v = 0.0;
            for (double x : global_var) v += x;
            g.var = {v / d};
          }
          mix.weights[m] = 1e-3;
        } else {
          for (std::size_t a = 0; a < d; ++a)
            g.mean[a] = stats[j].mean_acc(m, a) / occ;
          if (full) {
            g.cov = Matrix(d, d);
            for (std::size_t a = 0; a < d; ++a)
              for (std::size_t b2 = 0; b2 < d; ++b2)
                g.cov(a, b2) =
                    stats[j].scatter[m](a, b2) / occ - g.mean[a] * g.mean[b2];
            for (std::size_t a = 0; a < d; ++a)
              for (std::size_t b2 = a + 1; b2 < d; ++b2) {
                const double v = 0.5 * (g.cov(a, b2) + g.cov(b2, a));
                g.cov(a, b2) = g.cov(b2, a) = v;
              }
            double boost = config.variance_floor;
            for (std::size_t a = 0; a < d; ++a) g.cov(a, a) += boost;
            Matrix probe = g.cov;
            while (!cholesky_lower(probe)) {
              boost *= 10.0;
              for (std::size_t a = 0; a < d; ++a) g.cov(a, a) += boost;
              probe = g.cov;
            }
          } else if (model.cov_type == CovType::Diagonal) {
            g.var.resize(d);
            for (std::size_t a = 0; a < d; ++a)
              g.var[a] = std::max(
                  stats[j].sq_acc(m, a) / occ - g.mean[a] * g.mean[a],
                  floor[a]);
          } else {
            double v = 0.0;
            for (std::size_t a = 0; a < d; ++a)
              v += std::max(stats[j].sq_acc(m, a) / occ - g.mean[a] * g.mean[a],
                            0.0);
            g.var = {std::max(v / d, floor_mean)};
          }
          mix.weights[m] = occ;
        }
        wsum += mix.weights[m];
      }
      for (double& w : mix.weights) w /= wsum;
    }
    model.prepare();
  }

  model.validate();
  return {std::move(model), std::move(lls)};
}

}  // namespace sid::hmm
