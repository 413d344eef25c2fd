#include "sid/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sid/errors.hpp"
#include "sid/kernels.hpp"

namespace sid::svm {

Standardizer Standardizer::fit(const Matrix& X) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.inv_std.assign(d, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::axpy(1.0 / n, X.row(i), s.mean.data(), d);
  for (std::size_t j = 0; j < d; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = X(i, j) - s.mean[j];
      v += c * c / n;
    }
    s.inv_std[j] = v > 1e-24 ? 1.0 / std::sqrt(v) : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.inv_std.assign(dim, 1.0);
  return s;
}

std::vector<double> Standardizer::apply(const double* x, std::size_t n) const {
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (x[i] - mean[i]) * inv_std[i];
  return z;
}

double SvmModel::decision(const double* x, std::size_t n) const {
  if (n != w.size()) throw ShapeError("feature dimension mismatch");
  const std::vector<double> z = standardizer.apply(x, n);
  return kernels::dot(w.data(), z.data(), n) + b;
}

double SvmModel::decision(const std::vector<double>& x) const {
  return decision(x.data(), x.size());
}

int SvmModel::predict(const std::vector<double>& x) const {
  return decision(x) >= 0.0 ? 1 : -1;
}

double SvmModel::primal_objective(const Matrix& X,
                                  const std::vector<int>& y) const {
  double obj = 0.5 * kernels::sumsq(w.data(), w.size());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double m = 1.0 - y[i] * decision(X.row(i), X.cols());
    obj += C * std::max(0.0, m);
  }
  return obj;
}

// Pairwise dual updates (SMO). Starting from alpha = 0, every update moves
// (alpha_i, alpha_j) along the constraint sum alpha y = 0, so feasibility
// holds at every step; the loop ends when a full sweep finds no KKT
// violation beyond tol.
SvmModel train_binary(const Matrix& X, const std::vector<int>& y, double C,
                      const SvmTrainOptions& options) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (C <= 0.0) throw ConfigError("C must be positive");
  if (n == 0 || y.size() != n) throw TrainError("label/data size mismatch");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1)
      has_pos = true;
    else if (v == -1)
      has_neg = true;
    else
      throw TrainError("labels must be -1 or +1");
  }
  if (!has_pos || !has_neg) throw TrainError("need examples of both classes");

  SvmModel model;
  model.C = C;
  model.standardizer =
      options.standardize ? Standardizer::fit(X) : Standardizer::identity(d);

  Matrix Z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> z = model.standardizer.apply(X.row(i), d);
    std::copy(z.begin(), z.end(), Z.row(i));
  }

  // Gram matrix; training sets here are small.
  Matrix K(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      K(i, j) = K(j, i) = kernels::dot(Z.row(i), Z.row(j), d);

  std::vector<double>& alpha = model.alpha;
  alpha.assign(n, 0.0);
  double b = 0.0;
  std::vector<double> f(n, 0.0);  // sum_k alpha_k y_k K(k, .), without b

  auto error_of = [&](std::size_t i) { return f[i] + b - y[i]; };

  auto attempt = [&](std::size_t i, std::size_t j) -> bool {
    if (i == j) return false;
    const double yi = y[i], yj = y[j];
    const double Ei = error_of(i);
    const double Ej = error_of(j);
    double L, H;
    if (yi != yj) {
      L = std::max(0.0, alpha[j] - alpha[i]);
      H = std::min(C, C + alpha[j] - alpha[i]);
    } else {
      L = std::max(0.0, alpha[i] + alpha[j] - C);
      H = std::min(C, alpha[i] + alpha[j]);
    }
    if (L >= H) return false;
    const double eta = 2.0 * K(i, j) - K(i, i) - K(j, j);
    if (eta >= -1e-12) return false;
    double aj = alpha[j] - yj * (Ei - Ej) / eta;
    aj = std::clamp(aj, L, H);
    if (std::abs(aj - alpha[j]) < 1e-12) return false;
    const double ai = alpha[i] + yi * yj * (alpha[j] - aj);

    const double b1 = b - Ei - yi * (ai - alpha[i]) * K(i, i) -
                      yj * (aj - alpha[j]) * K(i, j);
    const double b2 = b - Ej - yi * (ai - alpha[i]) * K(i, j) -
                      yj * (aj - alpha[j]) * K(j, j);
    for (std::size_t k = 0; k < n; ++k)
      f[k] += yi * (ai - alpha[i]) * K(i, k) + yj * (aj - alpha[j]) * K(j, k);
    if (ai > 0.0 && ai < C)
      b = b1;
    else if (aj > 0.0 && aj < C)
      b = b2;
    else
      b = 0.5 * (b1 + b2);
    alpha[i] = ai;
    alpha[j] = aj;
    return true;
  };

  auto violates = [&](std::size_t i) {
    const double Ei = error_of(i);
    return (y[i] * Ei < -options.tol && alpha[i] < C) ||
           (y[i] * Ei > options.tol && alpha[i] > 0.0);
  };

  int passes = 0;
  bool examine_all = true;
  while (passes < options.max_passes) {
    ++passes;
    int changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= C)) continue;
      if (!violates(i)) continue;

      // second choice: largest |Ei - Ej|, then a plain sweep
      const double Ei = error_of(i);
      std::size_t best_j = i;
      double best_gap = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double gap = std::abs(Ei - error_of(j));
        if (gap > best_gap) {
          best_gap = gap;
          best_j = j;
        }
      }
      bool updated = best_j != i && attempt(i, best_j);
      for (std::size_t j = 0; j < n && !updated; ++j) updated = attempt(i, j);
      if (updated) ++changed;
    }
    if (changed == 0) {
      if (examine_all) break;
      examine_all = true;
    } else {
      examine_all = false;
    }
  }

  model.w.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > 0.0)
      kernels::axpy(alpha[i] * y[i], Z.row(i), model.w.data(), d);
  }

  // Recompute the bias from the converged alphas. Interior support vectors
  // pin it exactly; otherwise it lies in an interval bounded by the points
  // at 0 and C, and the midpoint satisfies every KKT inequality.
  {
    double interior_sum = 0.0;
    std::size_t interior_n = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = kernels::dot(model.w.data(), Z.row(i), d);
      if (alpha[i] > 1e-9 && alpha[i] < C - 1e-9) {
        interior_sum += y[i] - g;
        ++interior_n;
      } else if (alpha[i] <= 1e-9) {
        if (y[i] == 1)
          lo = std::max(lo, 1.0 - g);
        else
          hi = std::min(hi, -1.0 - g);
      } else {  // alpha == C
        if (y[i] == 1)
          hi = std::min(hi, 1.0 - g);
        else
          lo = std::max(lo, -1.0 - g);
      }
    }
    if (interior_n > 0)
      model.b = interior_sum / static_cast<double>(interior_n);
    else if (std::isfinite(lo) && std::isfinite(hi))
      model.b = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
      model.b = lo;
    else if (std::isfinite(hi))
      model.b = hi;
    else
      model.b = b;
  }

  for (std::size_t i = 0; i < n; ++i)
    if (alpha[i] > 1e-9) model.support.push_back(static_cast<int>(i));
  return model;
}

std::vector<double> OvrClassifier::decision_values(
    const std::vector<double>& x) const {
  std::vector<double> out(models.size());
  for (std::size_t c = 0; c < models.size(); ++c)
    out[c] = models[c].decision(x);
  return out;
}

int OvrClassifier::predict(const std::vector<double>& x) const {
  if (models.empty()) throw StateError("classifier not trained");
  const std::vector<double> vals = decision_values(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < vals.size(); ++c)
    if (vals[c] > vals[best]) best = c;
  return labels[best];
}

OvrClassifier train_ovr(const Matrix& X, const std::vector<int>& labels,
                        double C, const SvmTrainOptions& options) {
  if (X.rows() != labels.size()) throw TrainError("label/data size mismatch");
  std::set<int> unique(labels.begin(), labels.end());
  if (unique.size() < 2) throw TrainError("need at least two classes");

  OvrClassifier clf;
  clf.labels.assign(unique.begin(), unique.end());
  for (int cls : clf.labels) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      y[i] = labels[i] == cls ? 1 : -1;
    clf.models.push_back(train_binary(X, y, C, options));
  }
  return clf;
}

}  // namespace sid::svm
