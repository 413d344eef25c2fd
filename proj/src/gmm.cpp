#include "sid/gmm.hpp"

#include <algorithm>
#include <cmath>

#include "sid/errors.hpp"
#include "sid/kernels.hpp"
#include "sid/kmeans.hpp"

namespace sid::gmm {

double GmmModel::score(const double* x) const {
  std::vector<double> scratch;
  return mix.log_density(x, scratch);
}

double GmmModel::score(const std::vector<double>& x) const {
  if (x.size() != dim()) throw ShapeError("feature dimension mismatch");
  return score(x.data());
}

double GmmModel::score_sequence(const Matrix& X) const {
  if (X.cols() != dim()) throw ShapeError("feature dimension mismatch");
  std::vector<double> scratch;
  double total = 0.0;
  for (std::size_t t = 0; t < X.rows(); ++t)
    total += mix.log_density(X.row(t), scratch);
  return total;
}

void GmmModel::validate() const {
  double wsum = 0.0;
  for (double w : mix.weights) {
    if (w < 0.0) throw FitError("negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw FitError("weights do not sum to 1");
  for (const Gaussian& g : mix.components) {
    if (g.type != cov_type) throw FitError("component covariance type mismatch");
    if (g.type != CovType::Full) {
      for (double v : g.var)
        if (v <= 0.0) throw FitError("non-positive variance");
    }
  }
}

namespace {

// covariance statistics for one component
struct CompStats {
  double occ = 0.0;
  std::vector<double> sum_x;
  std::vector<double> sum_xx;  // diagonal second moment
  Matrix scatter;              // full second moment

  void reset(std::size_t d, bool full) {
    occ = 0.0;
    sum_x.assign(d, 0.0);
    if (full)
      scatter = Matrix(d, d);
    else
      sum_xx.assign(d, 0.0);
  }
};

void set_covariance_from_stats(Gaussian& g, const CompStats& s, double floor) {
  const std::size_t d = g.mean.size();
  if (g.type == CovType::Full) {
    g.cov = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        g.cov(i, j) = s.scatter(i, j) / s.occ - g.mean[i] * g.mean[j];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        const double v = 0.5 * (g.cov(i, j) + g.cov(j, i));
        g.cov(i, j) = g.cov(j, i) = v;
      }
    double boost = floor;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Matrix probe = g.cov;
      for (std::size_t i = 0; i < d; ++i) probe(i, i) += boost;
      if (cholesky_lower(probe)) {
        for (std::size_t i = 0; i < d; ++i) g.cov(i, i) += boost;
        return;
      }
      boost *= 10.0;
    }
    throw FitError("covariance could not be regularized");
  }
  std::vector<double> var(d);
  for (std::size_t i = 0; i < d; ++i)
    var[i] = std::max(s.sum_xx[i] / s.occ - g.mean[i] * g.mean[i], floor);
  if (g.type == CovType::Diagonal) {
    g.var = var;
  } else {
    double v = 0.0;
    for (double x : var) v += x;
    g.var = {std::max(v / d, floor)};
  }
}

void seed_from_kmeans(GmmModel& model, const Matrix& data, int k,
                      const GmmTrainConfig& config) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::vector<const double*> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = data.row(i);
  const KmeansResult km =
      kmeans(pts, d, k, Rng(config.seed), config.kmeans_iters);

  model.mix.weights.resize(k);
  model.mix.components.resize(k);
  const bool full = model.cov_type == CovType::Full;
  CompStats stats;
  for (int c = 0; c < k; ++c) {
    Gaussian& g = model.mix.components[c];
    g.type = model.cov_type;
    g.mean.assign(km.centroids.row(c), km.centroids.row(c) + d);
    stats.reset(d, full);
    for (std::size_t i = 0; i < n; ++i) {
      if (km.assignment[i] != c) continue;
      stats.occ += 1.0;
      if (full) {
        for (std::size_t a = 0; a < d; ++a)
          kernels::axpy(data(i, a), data.row(i), stats.scatter.row(a), d);
      } else {
        kernels::axpy_sq(1.0, data.row(i), stats.sum_xx.data(), d);
      }
    }
    set_covariance_from_stats(g, stats, config.variance_floor);
    model.mix.weights[c] = static_cast<double>(km.counts[c]) / n;
  }
  model.mix.prepare();
}

}  // namespace

std::pair<GmmModel, std::vector<double>> fit_em(const Matrix& data,
                                                int n_components,
                                                CovType cov_type,
                                                const GmmTrainConfig& config) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n_components < 1) throw FitError("need at least one component");
  if (n < static_cast<std::size_t>(n_components))
    throw FitError("fewer rows than components");
  if (config.max_iters < 1) throw ConfigError("max_iters must be >= 1");

  GmmModel model;
  model.cov_type = cov_type;
  seed_from_kmeans(model, data, n_components, config);

  // global diagonal variance, used when a dead component is reseeded
  std::vector<double> global_mean(d, 0.0), global_var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::axpy(1.0 / n, data.row(i), global_mean.data(), d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double t = data(i, j) - global_mean[j];
      global_var[j] += t * t / n;
    }
  for (double& v : global_var) v = std::max(v, config.variance_floor);

  const int k = n_components;
  const bool full = cov_type == CovType::Full;
  std::vector<double> lls;
  Matrix resp(n, k);
  std::vector<double> per_comp, scratch;
  std::vector<CompStats> stats(k);

  for (int iter = 0; iter < config.max_iters; ++iter) {
    // E step
    double ll = 0.0;
    std::size_t worst_row = 0;
    double worst_score = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < n; ++i) {
      const double s = model.mix.log_density(data.row(i), per_comp, scratch);
      ll += s;
      if (s < worst_score) {
        worst_score = s;
        worst_row = i;
      }
      for (int c = 0; c < k; ++c)
        resp(i, c) = per_comp[c] == kNegInf ? 0.0 : std::exp(per_comp[c] - s);
    }
    lls.push_back(ll);
    if (lls.size() >= 2) {
      const double prev = lls[lls.size() - 2];
      if (std::abs(ll - prev) <= config.rel_tol * std::abs(prev)) break;
    }

    // M step
    for (int c = 0; c < k; ++c) stats[c].reset(d, full);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        const double r = resp(i, c);
        if (r <= 0.0) continue;
        stats[c].occ += r;
        kernels::axpy(r, data.row(i), stats[c].sum_x.data(), d);
        if (full) {
          for (std::size_t a = 0; a < d; ++a)
            kernels::axpy(r * data(i, a), data.row(i), stats[c].scatter.row(a), d);
        } else {
          kernels::axpy_sq(r, data.row(i), stats[c].sum_xx.data(), d);
        }
      }
    }

    double wsum = 0.0;
    for (int c = 0; c < k; ++c) {
      Gaussian& g = model.mix.components[c];
      if (stats[c].occ < 1e-8) {
        // dead component: restart it at the worst explained point
        g.mean.assign(data.row(worst_row), data.row(worst_row) + d);
        if (full) {
          g.cov = Matrix(d, d);
          for (std::size_t a = 0; a < d; ++a) g.cov(a, a) = global_var[a];
        } else if (cov_type == CovType::Diagonal) {
          g.var = global_var;
        } else {
          double v = 0.0;
          for (double x : global_var) v += x;
          g.var = {v / d};
        }
        model.mix.weights[c] = 1e-3;
      } else {
        g.mean.resize(d);
        for (std::size_t j = 0; j < d; ++j)
          g.mean[j] = stats[c].sum_x[j] / stats[c].occ;
        set_covariance_from_stats(g, stats[c], config.variance_floor);
        model.mix.weights[c] = stats[c].occ / n;
      }
      wsum += model.mix.weights[c];
    }
    for (double& w : model.mix.weights) w /= wsum;
    model.mix.prepare();
  }

  model.validate();
  return {std::move(model), std::move(lls)};
}

}  // namespace sid::gmm
