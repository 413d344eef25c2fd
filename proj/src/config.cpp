#include "sid/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sid/errors.hpp"

namespace sid::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int to_int(const std::string& section, const std::string& key,
           const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& section, const std::string& key,
                 const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": expected number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& section, const std::string& key,
                     const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(section + "." + key + ": expected unsigned integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& section, const std::string& key,
             const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(section + "." + key + ": expected boolean, got '" + v + "'");
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      ini.sections_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!ini.sections_[section].emplace(key, value).second)
      throw ConfigError("duplicate key " + section + "." + key);
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw ConfigError("missing " + section + "." + key);
  return sections_.at(section).at(key);
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  return has(section, key) ? sections_.at(section).at(key) : fallback;
}

void IniFile::check_schema(
    const std::map<std::string, std::set<std::string>>& schema) const {
  for (const auto& [section, keys] : sections_) {
    const auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      (void)value;
      // band overrides are matched by prefix
      bool ok = it->second.count(key) > 0;
      if (!ok && section == "model" && key.rfind("band", 0) == 0) {
        const std::size_t dot = key.find('.');
        if (dot != std::string::npos) {
          const std::string field = key.substr(dot + 1);
          ok = field == "states" || field == "mixtures" || field == "cov";
        }
      }
      if (!ok) throw ConfigError("unknown key " + section + "." + key);
    }
  }
}

std::pair<double, double> parse_band_range(const std::string& text) {
  if (text == "full") return {0.0, 0.0};
  const std::size_t dash = text.find('-');
  if (dash == std::string::npos)
    throw ConfigError("band range must be LOW-HIGH or full: " + text);
  try {
    const double lo = std::stod(text.substr(0, dash));
    const double hi = std::stod(text.substr(dash + 1));
    return {lo, hi};
  } catch (const std::exception&) {
    throw ConfigError("bad band range: " + text);
  }
}

RunConfig RunConfig::load(const std::string& path) {
  return from_ini(IniFile::parse_file(path));
}

RunConfig RunConfig::from_ini(const IniFile& ini) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"corpus", {"speakers", "utterances", "duration_s", "sample_rate", "seed"}},
      {"split", {"train_per_speaker", "enrolled"}},
      {"dsp", {"pre_emphasis", "frame_ms", "hop_ms"}},
      {"features", {"fft_size", "delta_window", "include_log_energy"}},
      {"bands", {"plan"}},
      {"model", {"states", "mixtures", "cov"}},
      {"merger", {"kind", "gmm_components", "svm_c"}},
      {"train", {"max_iters", "tol", "variance_floor", "variance_floor_frac", "validation_fraction", "seed"}},
      {"ga", {"population", "generations", "crossover", "mutation", "elitism", "seed"}},
      {"decision", {"tau", "far_frr_points", "histogram_bins"}},
      {"noise", {"band", "snr_db", "seed"}},
  };
  ini.check_schema(schema);

  RunConfig c;
  c.speakers = to_int("corpus", "speakers", ini.get_or("corpus", "speakers", "20"));
  c.utterances = to_int("corpus", "utterances", ini.get_or("corpus", "utterances", "40"));
  c.duration_s = to_double("corpus", "duration_s", ini.get_or("corpus", "duration_s", "1.0"));
  c.sample_rate = to_int("corpus", "sample_rate", ini.get_or("corpus", "sample_rate", "16000"));
  if (ini.has("corpus", "seed"))
    c.corpus_seed = to_u64("corpus", "seed", ini.get("corpus", "seed"));

  c.train_per_speaker =
      to_int("split", "train_per_speaker", ini.get_or("split", "train_per_speaker", "20"));
  c.enrolled = to_int("split", "enrolled", ini.get_or("split", "enrolled", "10"));

  c.pre_emphasis = to_double("dsp", "pre_emphasis", ini.get_or("dsp", "pre_emphasis", "0.97"));
  c.frame_ms = to_double("dsp", "frame_ms", ini.get_or("dsp", "frame_ms", "25"));
  c.hop_ms = to_double("dsp", "hop_ms", ini.get_or("dsp", "hop_ms", "10"));

  c.fft_size = static_cast<std::size_t>(
      to_int("features", "fft_size", ini.get_or("features", "fft_size", "512")));
  c.delta_window =
      to_int("features", "delta_window", ini.get_or("features", "delta_window", "2"));
  c.include_log_energy = to_bool(
      "features", "include_log_energy",
      ini.get_or("features", "include_log_energy", "false"));

  c.band_plan = to_int("bands", "plan", ini.get_or("bands", "plan", "1"));
  if (c.band_plan != 1 && c.band_plan != 2 && c.band_plan != 4 && c.band_plan != 7)
    throw ConfigError("bands.plan must be 1, 2, 4 or 7");

  const std::string merger_name =
      ini.get_or("merger", "kind", c.band_plan == 1 ? "none" : "weighted_lclr");
  c.merger = recognizer::merger_choice_from_name(merger_name);
  c.gmm_merger_components =
      to_int("merger", "gmm_components", ini.get_or("merger", "gmm_components", "20"));
  c.svm_merger_c = to_double("merger", "svm_c", ini.get_or("merger", "svm_c", "1.0"));

  recognizer::BandModelSpec base;
  base.n_states = to_int("model", "states", ini.get_or("model", "states", "4"));
  base.n_mix = to_int("model", "mixtures", ini.get_or("model", "mixtures", "8"));
  base.cov_type = cov_type_from_name(ini.get_or("model", "cov", "diagonal"));
  c.band_models.assign(c.band_plan, base);
  for (int b = 0; b < c.band_plan; ++b) {
    const std::string prefix = "band" + std::to_string(b) + ".";
    if (ini.has("model", prefix + "states"))
      c.band_models[b].n_states =
          to_int("model", prefix + "states", ini.get("model", prefix + "states"));
    if (ini.has("model", prefix + "mixtures"))
      c.band_models[b].n_mix =
          to_int("model", prefix + "mixtures", ini.get("model", prefix + "mixtures"));
    if (ini.has("model", prefix + "cov"))
      c.band_models[b].cov_type =
          cov_type_from_name(ini.get("model", prefix + "cov"));
  }

  c.train.max_iters = to_int("train", "max_iters", ini.get_or("train", "max_iters", "40"));
  c.train.ll_tol = to_double("train", "tol", ini.get_or("train", "tol", "1e-5"));
  c.train.variance_floor =
      to_double("train", "variance_floor", ini.get_or("train", "variance_floor", "1e-4"));
  c.train.variance_floor_frac = to_double(
      "train", "variance_floor_frac", ini.get_or("train", "variance_floor_frac", "0.05"));
  if (ini.has("train", "seed"))
    c.train.seed = to_u64("train", "seed", ini.get("train", "seed"));
  c.validation_fraction = to_double(
      "train", "validation_fraction", ini.get_or("train", "validation_fraction", "0.25"));

  c.ga.population_size = to_int("ga", "population", ini.get_or("ga", "population", "50"));
  c.ga.generations = to_int("ga", "generations", ini.get_or("ga", "generations", "25"));
  c.ga.crossover_rate = to_double("ga", "crossover", ini.get_or("ga", "crossover", "0.8"));
  c.ga.mutation_rate = to_double("ga", "mutation", ini.get_or("ga", "mutation", "0.05"));
  c.ga.elitism_count = to_int("ga", "elitism", ini.get_or("ga", "elitism", "2"));
  c.ga.seed = to_u64("ga", "seed", ini.get_or("ga", "seed", "13"));

  const std::string tau = ini.get_or("decision", "tau", "ga");
  if (tau == "ga") {
    c.tau_from_ga = true;
  } else {
    c.tau_from_ga = false;
    c.fixed_tau = to_double("decision", "tau", tau);
  }
  c.far_frr_points =
      to_int("decision", "far_frr_points", ini.get_or("decision", "far_frr_points", "200"));
  c.histogram_bins =
      to_int("decision", "histogram_bins", ini.get_or("decision", "histogram_bins", "30"));

  if (ini.sections().count("noise")) {
    recognizer::NoiseSpec n;
    const auto [lo, hi] = parse_band_range(ini.get_or("noise", "band", "full"));
    n.low_hz = lo;
    n.high_hz = hi;
    n.snr_db = to_double("noise", "snr_db", ini.get_or("noise", "snr_db", "0"));
    n.seed = to_u64("noise", "seed", ini.get_or("noise", "seed", "5142"));
    c.noise = n;
  }
  return c;
}

recognizer::RecognizerConfig RunConfig::recognizer_config() const {
  recognizer::RecognizerConfig rc;
  rc.sample_rate = sample_rate;
  rc.band_plan = dsp::make_band_plan(band_plan, sample_rate);
  rc.band_models = band_models;
  rc.merger = merger;
  rc.pre_emphasis_alpha = pre_emphasis;
  rc.frame_ms = frame_ms;
  rc.hop_ms = hop_ms;
  rc.fft_size = fft_size;
  rc.delta_window = delta_window;
  rc.include_log_energy = include_log_energy;
  rc.gmm_merger_components = gmm_merger_components;
  rc.svm_merger_c = svm_merger_c;
  rc.validation_fraction = validation_fraction;
  rc.train = train;
  rc.ga = ga;
  rc.tau_from_ga = tau_from_ga;
  rc.fixed_tau = fixed_tau;
  return rc;
}

}  // namespace sid::config
