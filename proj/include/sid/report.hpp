#ifndef SID_REPORT_HPP
#define SID_REPORT_HPP

#include <string>
#include <vector>

#include "sid/recognizer.hpp"

namespace sid::report {

// metrics.csv, far_frr.csv, histograms.csv and (when a tuning trace
// exists) ga_convergence.csv under out_dir.
void write_eval_report(const std::string& out_dir,
                       const recognizer::EvalReport& report,
                       const std::vector<double>& ga_trace);

struct ComparisonRow {
  std::string name;
  double identification_rate = 0.0;
  double true_rejection_rate = 0.0;
  double reliability = 0.0;
  double decision_gap = 0.0;
};

// compare.csv: one row per recognizer/merger head.
void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows);

}  // namespace sid::report

#endif  // SID_REPORT_HPP
