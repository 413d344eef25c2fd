#ifndef SID_HMM_HPP
#define SID_HMM_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sid/gaussian.hpp"
#include "sid/matrix.hpp"

namespace sid::hmm {

// Left-to-right continuous-density HMM: self-loop plus advance only, all
// probability mass starting in state 0, Gaussian-mixture emissions.
struct HmmModel {
  int n_states = 0;
  CovType cov_type = CovType::Diagonal;
  Matrix transitions;             // row stochastic, bandwidth-1 mask
  std::vector<double> initial;    // delta at state 0
  std::vector<Mixture> emissions; // one mixture per state

  std::size_t feature_dim() const {
    return emissions.empty() ? 0 : emissions[0].components[0].dim();
  }
  void prepare();        // prepares every emission mixture
  void validate() const; // row sums, mask zeros, weight sums, variances
};

struct TrainConfig {
  int max_iters = 40;
  double ll_tol = 1e-5;          // relative total log-likelihood change
  double variance_floor = 1e-4;  // absolute lower bound
  // Relative bound: each dimension's variance is also floored at this
  // fraction of the global data variance, which keeps wrong-model scores
  // bounded instead of exploding with Mahalanobis distance.
  double variance_floor_frac = 0.05;
  std::uint64_t seed = 0x686D6DULL;  // k-means seeding stream
};

// Frames are split uniformly in time across states and each state's pool is
// clustered into n_mix components. Transitions start at 0.5 self / 0.5
// advance (last state 1.0 self).
HmmModel init_model(int n_states, int n_mix, CovType cov_type,
                    const std::vector<Matrix>& sequences,
                    double variance_floor = 1e-4,
                    std::uint64_t seed = 0x686D6DULL,
                    double variance_floor_frac = 0.05);

// log P(X | M), forward recursion in the log domain, summed over end states.
double log_likelihood(const HmmModel& model, const Matrix& sequence);

// Most likely state path and its log probability.
std::pair<std::vector<int>, double> viterbi(const HmmModel& model,
                                            const Matrix& sequence);

// Baum-Welch re-estimation over a set of sequences. Per-sequence statistics
// are reduced in a canonical order derived from the sequence contents, so
// the result does not depend on the order the sequences are handed in.
// Returns the re-estimated model and the total log-likelihood observed at
// the start of each iteration.
std::pair<HmmModel, std::vector<double>> train_baum_welch(
    const HmmModel& model, const std::vector<Matrix>& sequences,
    const TrainConfig& config = {});

}  // namespace sid::hmm

#endif  // SID_HMM_HPP
