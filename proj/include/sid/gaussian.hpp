#ifndef SID_GAUSSIAN_HPP
#define SID_GAUSSIAN_HPP

#include <cstddef>
#include <vector>

#include "sid/matrix.hpp"

namespace sid {

enum class CovType { Spherical, Diagonal, Full };

const char* cov_type_name(CovType t);
CovType cov_type_from_name(const std::string& name);

// In-place Cholesky of the lower triangle; false if not positive definite.
bool cholesky_lower(Matrix& a);

// One mixture component. var holds 1 entry (spherical) or D entries
// (diagonal); cov holds the full matrix. prepare() builds the scoring form
// and must be called after any parameter change.
struct Gaussian {
  CovType type = CovType::Diagonal;
  std::vector<double> mean;
  std::vector<double> var;
  Matrix cov;

  // prepared by prepare()
  std::vector<double> inv_var;  // expanded to D for spherical/diagonal
  Matrix chol;                  // lower factor for full
  double log_norm = 0.0;        // -(D/2) ln 2pi - 0.5 ln |cov|

  std::size_t dim() const { return mean.size(); }
  void prepare();  // throws FitError if the covariance is not PD
  double log_density(const double* x, std::vector<double>& scratch) const;
};

struct Mixture {
  std::vector<double> weights;
  std::vector<Gaussian> components;
  std::vector<double> log_weights;  // prepared

  std::size_t size() const { return components.size(); }
  void prepare();
  // Returns log sum_m w_m N_m(x); per_comp receives ln w_m + ln N_m(x).
  double log_density(const double* x, std::vector<double>& per_comp,
                     std::vector<double>& scratch) const;
  double log_density(const double* x, std::vector<double>& scratch) const;
};

}  // namespace sid

#endif  // SID_GAUSSIAN_HPP
