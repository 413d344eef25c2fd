#ifndef SID_CONFIG_HPP
#define SID_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "sid/recognizer.hpp"

namespace sid::config {

// Minimal INI reader: [section] headers, key = value lines, # or ;
// comments. Unknown sections or keys are rejected up front.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  void check_schema(
      const std::map<std::string, std::set<std::string>>& schema) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// One experiment: corpus shape, split protocol, recognizer architecture,
// merger, GA settings, threshold policy and optional noise injection.
struct RunConfig {
  // corpus
  int speakers = 20;
  int utterances = 40;
  double duration_s = 1.0;
  int sample_rate = 16000;
  std::optional<std::uint64_t> corpus_seed;  // mandatory for synthesis

  // split
  int train_per_speaker = 20;
  int enrolled = 10;

  // recognizer architecture
  int band_plan = 1;  // 1 | 2 | 4 | 7
  recognizer::MergerChoice merger = recognizer::MergerChoice::None;
  std::vector<recognizer::BandModelSpec> band_models;  // resolved per band

  // dsp / features
  double pre_emphasis = 0.97;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  int delta_window = 2;
  bool include_log_energy = false;

  // training
  hmm::TrainConfig train;
  double validation_fraction = 0.25;
  int gmm_merger_components = 20;
  double svm_merger_c = 1.0;

  // ga + decision
  ga::GaConfig ga;
  bool tau_from_ga = true;
  double fixed_tau = 0.0;
  int far_frr_points = 200;
  int histogram_bins = 30;

  // optional noise injection for evaluation
  std::optional<recognizer::NoiseSpec> noise;

  static RunConfig load(const std::string& path);
  static RunConfig from_ini(const IniFile& ini);

  recognizer::RecognizerConfig recognizer_config() const;
};

// "LOW-HIGH" in Hz, or "full".
std::pair<double, double> parse_band_range(const std::string& text);

}  // namespace sid::config

#endif  // SID_CONFIG_HPP
