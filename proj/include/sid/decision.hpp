#ifndef SID_DECISION_HPP
#define SID_DECISION_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace sid::decision {

// Normalized log-likelihood ratio: how far the claimed speaker's score
// sits above the average, scaled by the number of enrolled speakers.
struct ConfidenceScore {
  double lr = 0.0;
  int claimed_index = 0;
  double l_claimed = 0.0;
  double l_avg = 0.0;
  int n_speakers = 0;
};

ConfidenceScore likelihood_ratio(const std::vector<double>& per_speaker_scores,
                                 int claimed_index);

// Accept at or above tau, reject strictly below.
bool decide(const ConfidenceScore& confidence, double tau);
bool decide(double lr, double tau);

// 100 * correct / total
double identification_rate(const std::vector<int>& decisions,
                           const std::vector<int>& ground_truth);

// The literal difference of the two percentages.
double reliability(double identification_rate, double true_rejection_rate);

struct FarFrrPoint {
  double tau = 0.0;
  double far = 0.0;  // % impostor lrs >= tau
  double frr = 0.0;  // % genuine lrs < tau
};

// taus must be sorted ascending; FAR is non-increasing and FRR
// non-decreasing along the curve.
std::vector<FarFrrPoint> far_frr_sweep(const std::vector<double>& genuine_lrs,
                                       const std::vector<double>& impostor_lrs,
                                       const std::vector<double>& taus);

struct Histogram {
  std::vector<double> bin_low;
  std::vector<double> bin_high;
  std::vector<double> mass;  // sums to 1
};

struct HistogramPair {
  Histogram genuine;
  Histogram impostor;
};

// Equal-width bins over the pooled range, masses normalized per population.
HistogramPair score_histograms(const std::vector<double>& genuine_lrs,
                               const std::vector<double>& impostor_lrs,
                               int n_bins);

// genuine-acceptance minus impostor-acceptance at tau, in percent. This is
// the separating quantity the threshold search maximizes; at the optimum it
// rewards accepting genuine trials and rejecting impostors equally.
double decision_gap(double tau, const std::vector<double>& genuine_lrs,
                    const std::vector<double>& impostor_lrs);

void write_far_frr_csv(const std::string& path,
                       const std::vector<FarFrrPoint>& curve);
void write_histograms_csv(const std::string& path, const HistogramPair& h);

}  // namespace sid::decision

#endif  // SID_DECISION_HPP
