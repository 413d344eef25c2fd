#include "sid/report.hpp"

#include <filesystem>
#include <fstream>

#include "sid/errors.hpp"
#include "sid/ga.hpp"

namespace fs = std::filesystem;

namespace sid::report {

void write_eval_report(const std::string& out_dir,
                       const recognizer::EvalReport& report,
                       const std::vector<double>& ga_trace) {
  fs::create_directories(out_dir);

  std::ofstream m((fs::path(out_dir) / "metrics.csv").string(), std::ios::trunc);
  if (!m) throw IoError("cannot write metrics.csv");
  m.precision(17);
  m << "metric,value\n";
  m << "identification_rate," << report.identification_rate << '\n';
  m << "true_rejection_rate," << report.true_rejection_rate << '\n';
  m << "reliability," << report.reliability << '\n';
  m << "genuine_acceptance," << report.genuine_acceptance << '\n';
  m << "impostor_acceptance," << report.impostor_acceptance << '\n';
  m << "decision_gap," << report.decision_gap << '\n';
  m << "tau," << report.tau << '\n';
  m << "n_test," << report.n_test << '\n';
  m << "n_impostor," << report.n_impostor << '\n';
  m << "n_silence_errors," << report.n_silence_errors << '\n';

  decision::write_far_frr_csv((fs::path(out_dir) / "far_frr.csv").string(),
                              report.far_frr_curve);
  decision::write_histograms_csv(
      (fs::path(out_dir) / "histograms.csv").string(), report.histograms);
  ga::write_convergence_csv(
      (fs::path(out_dir) / "ga_convergence.csv").string(), ga_trace);
}

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.precision(17);
  f << "recognizer,identification_rate,true_rejection_rate,reliability,decision_gap\n";
  for (const ComparisonRow& r : rows)
    f << r.name << ',' << r.identification_rate << ',' << r.true_rejection_rate
      << ',' << r.reliability << ',' << r.decision_gap << '\n';
}

}  // namespace sid::report
