#ifndef SID_GMM_HPP
#define SID_GMM_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sid/gaussian.hpp"
#include "sid/matrix.hpp"

namespace sid::gmm {

struct GmmModel {
  CovType cov_type = CovType::Diagonal;
  Mixture mix;

  std::size_t dim() const {
    return mix.components.empty() ? 0 : mix.components[0].dim();
  }
  std::size_t n_components() const { return mix.size(); }

  // log sum_m P_m b_m(x) via log-sum-exp
  double score(const double* x) const;
  double score(const std::vector<double>& x) const;
  // sum of per-frame scores over the rows of X
  double score_sequence(const Matrix& X) const;

  void validate() const;  // weight sums, positive variances
};

struct GmmTrainConfig {
  int max_iters = 100;
  double rel_tol = 1e-6;        // relative log-likelihood change
  double variance_floor = 1e-6; // applied every M-step
  std::uint64_t seed = 0x676D6DULL;
  int kmeans_iters = 20;
};

// k-means-seeded EM. Returns the model and the per-iteration total
// log-likelihood, each evaluated before that iteration's M-step.
std::pair<GmmModel, std::vector<double>> fit_em(
    const Matrix& data, int n_components, CovType cov_type,
    const GmmTrainConfig& config = {});

}  // namespace sid::gmm

#endif  // SID_GMM_HPP
