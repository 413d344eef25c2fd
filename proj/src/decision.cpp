#include "sid/decision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sid/errors.hpp"

namespace sid::decision {

ConfidenceScore likelihood_ratio(const std::vector<double>& scores,
                                 int claimed_index) {
  if (scores.empty()) throw MetricError("no per-speaker scores");
  if (claimed_index < 0 || claimed_index >= static_cast<int>(scores.size()))
    throw IndexError("claimed index out of range");
  for (double s : scores)
    if (!std::isfinite(s)) throw MetricError("non-finite score");

  ConfidenceScore c;
  c.n_speakers = static_cast<int>(scores.size());
  c.claimed_index = claimed_index;
  c.l_claimed = scores[claimed_index];
  double sum = 0.0;
  for (double s : scores) sum += s;
  c.l_avg = sum / c.n_speakers;
  c.lr = (c.l_claimed - c.l_avg) / c.n_speakers;
  return c;
}

bool decide(const ConfidenceScore& confidence, double tau) {
  return decide(confidence.lr, tau);
}

bool decide(double lr, double tau) { return lr >= tau; }

double identification_rate(const std::vector<int>& decisions,
                           const std::vector<int>& ground_truth) {
  if (decisions.empty() || decisions.size() != ground_truth.size())
    throw MetricError("empty or mismatched trial lists");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i)
    if (decisions[i] == ground_truth[i]) ++correct;
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(decisions.size());
}

double reliability(double identification_rate, double true_rejection_rate) {
  return identification_rate - true_rejection_rate;
}

std::vector<FarFrrPoint> far_frr_sweep(const std::vector<double>& genuine_lrs,
                                       const std::vector<double>& impostor_lrs,
                                       const std::vector<double>& taus) {
  if (genuine_lrs.empty() || impostor_lrs.empty())
    throw MetricError("empty score population");
  if (!std::is_sorted(taus.begin(), taus.end()))
    throw MetricError("taus must be sorted ascending");

  std::vector<FarFrrPoint> curve;
  curve.reserve(taus.size());
  for (double tau : taus) {
    FarFrrPoint p;
    p.tau = tau;
    std::size_t fa = 0;
    for (double lr : impostor_lrs)
      if (lr >= tau) ++fa;
    std::size_t fr = 0;
    for (double lr : genuine_lrs)
      if (lr < tau) ++fr;
    p.far = 100.0 * fa / impostor_lrs.size();
    p.frr = 100.0 * fr / genuine_lrs.size();
    curve.push_back(p);
  }
  return curve;
}

HistogramPair score_histograms(const std::vector<double>& genuine_lrs,
                               const std::vector<double>& impostor_lrs,
                               int n_bins) {
  if (genuine_lrs.empty() || impostor_lrs.empty())
    throw MetricError("empty score population");
  if (n_bins < 1) throw MetricError("n_bins must be >= 1");

  double lo = genuine_lrs[0], hi = genuine_lrs[0];
  for (double v : genuine_lrs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : impostor_lrs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double width = hi > lo ? (hi - lo) / n_bins : 1.0;

  auto build = [&](const std::vector<double>& pop) {
    Histogram h;
    h.bin_low.resize(n_bins);
    h.bin_high.resize(n_bins);
    h.mass.assign(n_bins, 0.0);
    for (int b = 0; b < n_bins; ++b) {
      h.bin_low[b] = lo + b * width;
      h.bin_high[b] = lo + (b + 1) * width;
    }
    for (double v : pop) {
      int b = static_cast<int>((v - lo) / width);
      b = std::clamp(b, 0, n_bins - 1);
      h.mass[b] += 1.0 / pop.size();
    }
    return h;
  };

  return {build(genuine_lrs), build(impostor_lrs)};
}

double decision_gap(double tau, const std::vector<double>& genuine_lrs,
                    const std::vector<double>& impostor_lrs) {
  if (genuine_lrs.empty() || impostor_lrs.empty())
    throw MetricError("empty score population");
  std::size_t ga = 0;
  for (double lr : genuine_lrs)
    if (decide(lr, tau)) ++ga;
  std::size_t ia = 0;
  for (double lr : impostor_lrs)
    if (decide(lr, tau)) ++ia;
  const double genuine_acceptance = 100.0 * ga / genuine_lrs.size();
  const double impostor_acceptance = 100.0 * ia / impostor_lrs.size();
  return genuine_acceptance - impostor_acceptance;
}

void write_far_frr_csv(const std::string& path,
                       const std::vector<FarFrrPoint>& curve) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << "tau,far,frr\n";
  f.precision(17);
  for (const FarFrrPoint& p : curve)
    f << p.tau << ',' << p.far << ',' << p.frr << '\n';
}

void write_histograms_csv(const std::string& path, const HistogramPair& h) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << "bin_low,bin_high,genuine_mass,impostor_mass\n";
  f.precision(17);
  for (std::size_t b = 0; b < h.genuine.mass.size(); ++b)
    f << h.genuine.bin_low[b] << ',' << h.genuine.bin_high[b] << ','
      << h.genuine.mass[b] << ',' << h.impostor.mass[b] << '\n';
}

}  // namespace sid::decision
