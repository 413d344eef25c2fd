#include "sid/gaussian.hpp"

#include <cmath>
#include <string>

#include "sid/errors.hpp"
#include "sid/kernels.hpp"

namespace sid {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

const char* cov_type_name(CovType t) {
  switch (t) {
    case CovType::Spherical: return "spherical";
    case CovType::Diagonal: return "diagonal";
    case CovType::Full: return "full";
  }
  return "?";
}

CovType cov_type_from_name(const std::string& name) {
  if (name == "spherical") return CovType::Spherical;
  if (name == "diagonal") return CovType::Diagonal;
  if (name == "full") return CovType::Full;
  throw ConfigError("unknown covariance type: " + name);
}

bool cholesky_lower(Matrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) - kernels::dot(a.row(j), a.row(j), j);
    if (d <= 0.0 || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    a(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      a(i, j) = (a(i, j) - kernels::dot(a.row(i), a.row(j), j)) / d;
    }
    for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
  }
  return true;
}

void Gaussian::prepare() {
  const std::size_t d = dim();
  if (d == 0) throw FitError("empty mean");
  switch (type) {
    case CovType::Spherical: {
      if (var.size() != 1 || var[0] <= 0.0) throw FitError("bad spherical variance");
      inv_var.assign(d, 1.0 / var[0]);
      log_norm = -0.5 * d * (kLog2Pi + std::log(var[0]));
      break;
    }
    case CovType::Diagonal: {
      if (var.size() != d) throw FitError("diagonal variance size mismatch");
      inv_var.resize(d);
      double log_det = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        if (var[i] <= 0.0) throw FitError("non-positive variance");
        inv_var[i] = 1.0 / var[i];
        log_det += std::log(var[i]);
      }
      log_norm = -0.5 * (d * kLog2Pi + log_det);
      break;
    }
    case CovType::Full: {
      if (cov.rows() != d || cov.cols() != d) throw FitError("covariance shape");
      chol = cov;
      if (!cholesky_lower(chol)) throw FitError("covariance not positive definite");
      double log_det = 0.0;
      for (std::size_t i = 0; i < d; ++i) log_det += std::log(chol(i, i));
      log_norm = -0.5 * d * kLog2Pi - log_det;
      break;
    }
  }
}

double Gaussian::log_density(const double* x, std::vector<double>& scratch) const {
  const std::size_t d = dim();
  if (type != CovType::Full) {
    return log_norm - 0.5 * kernels::quad_diag(x, mean.data(), inv_var.data(), d);
  }
  // forward substitution: chol * y = (x - mean), quad = |y|^2
  scratch.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double r = (x[i] - mean[i]) - kernels::dot(chol.row(i), scratch.data(), i);
    scratch[i] = r / chol(i, i);
  }
  return log_norm - 0.5 * kernels::sumsq(scratch.data(), d);
}

void Mixture::prepare() {
  if (components.empty() || weights.size() != components.size())
    throw FitError("mixture weight/component mismatch");
  log_weights.resize(weights.size());
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] < 0.0) throw FitError("negative mixture weight");
    log_weights[m] = weights[m] > 0.0 ? std::log(weights[m]) : kNegInf;
    components[m].prepare();
  }
}

double Mixture::log_density(const double* x, std::vector<double>& per_comp,
                            std::vector<double>& scratch) const {
  per_comp.resize(components.size());
  for (std::size_t m = 0; m < components.size(); ++m) {
    per_comp[m] = log_weights[m] == kNegInf
                      ? kNegInf
                      : log_weights[m] + components[m].log_density(x, scratch);
  }
  return logsumexp(per_comp.data(), per_comp.size());
}

double Mixture::log_density(const double* x, std::vector<double>& scratch) const {
  std::vector<double> per_comp;
  return log_density(x, per_comp, scratch);
}

}  // namespace sid
