#include "sid/store.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sid/errors.hpp"

namespace fs = std::filesystem;

namespace sid::store {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("short write to " + path);
}

class Writer {
 public:
  Writer() { ss_.precision(17); }
  template <typename T>
  Writer& field(const std::string& key, const T& v) {
    ss_ << key << ' ' << v << '\n';
    return *this;
  }
  Writer& vec(const std::string& key, const std::vector<double>& v) {
    ss_ << key << ' ' << v.size();
    for (double x : v) ss_ << ' ' << x;
    ss_ << '\n';
    return *this;
  }
  Writer& vec(const std::string& key, const std::vector<int>& v) {
    ss_ << key << ' ' << v.size();
    for (int x : v) ss_ << ' ' << x;
    ss_ << '\n';
    return *this;
  }
  Writer& matrix(const std::string& key, const Matrix& m) {
    ss_ << key << ' ' << m.rows() << ' ' << m.cols();
    for (double x : m.data()) ss_ << ' ' << x;
    ss_ << '\n';
    return *this;
  }
  std::string str() const { return ss_.str(); }

 private:
  std::ostringstream ss_;
};

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string key() {
    std::string k;
    if (!(in_ >> k)) throw IoError("unexpected end of model file");
    return k;
  }
  void expect(const std::string& k) {
    const std::string got = key();
    if (got != k) throw IoError("expected field '" + k + "', got '" + got + "'");
  }
  template <typename T>
  T value() {
    T v;
    if (!(in_ >> v)) throw IoError("bad value in model file");
    return v;
  }
  std::vector<double> vec_d() {
    const std::size_t n = value<std::size_t>();
    std::vector<double> v(n);
    for (double& x : v) x = value<double>();
    return v;
  }
  std::vector<int> vec_i() {
    const std::size_t n = value<std::size_t>();
    std::vector<int> v(n);
    for (int& x : v) x = value<int>();
    return v;
  }
  Matrix matrix() {
    const std::size_t r = value<std::size_t>();
    const std::size_t c = value<std::size_t>();
    Matrix m(r, c);
    for (double& x : m.data()) x = value<double>();
    return m;
  }

 private:
  std::istringstream in_;
};

std::string serialize_gaussian(const Gaussian& g) {
  Writer w;
  w.field("cov_type", cov_type_name(g.type));
  w.vec("mean", g.mean);
  if (g.type == CovType::Full)
    w.matrix("cov", g.cov);
  else
    w.vec("var", g.var);
  return w.str();
}

Gaussian read_gaussian(Reader& r) {
  Gaussian g;
  r.expect("cov_type");
  g.type = cov_type_from_name(r.value<std::string>());
  r.expect("mean");
  g.mean = r.vec_d();
  if (g.type == CovType::Full) {
    r.expect("cov");
    g.cov = r.matrix();
  } else {
    r.expect("var");
    g.var = r.vec_d();
  }
  return g;
}

std::string serialize_mixture(const Mixture& m) {
  Writer w;
  w.vec("weights", m.weights);
  std::string out = w.str();
  for (const Gaussian& g : m.components) out += serialize_gaussian(g);
  return out;
}

Mixture read_mixture(Reader& r) {
  Mixture m;
  r.expect("weights");
  m.weights = r.vec_d();
  m.components.resize(m.weights.size());
  for (Gaussian& g : m.components) g = read_gaussian(r);
  m.prepare();
  return m;
}

std::string serialize_hmm(const hmm::HmmModel& h) {
  Writer w;
  w.field("n_states", h.n_states);
  w.field("cov_type", cov_type_name(h.cov_type));
  w.matrix("transitions", h.transitions);
  w.vec("initial", h.initial);
  std::string out = w.str();
  for (const Mixture& m : h.emissions) out += serialize_mixture(m);
  return out;
}

hmm::HmmModel read_hmm(const std::string& text) {
  Reader r(text);
  hmm::HmmModel h;
  r.expect("n_states");
  h.n_states = r.value<int>();
  r.expect("cov_type");
  h.cov_type = cov_type_from_name(r.value<std::string>());
  r.expect("transitions");
  h.transitions = r.matrix();
  r.expect("initial");
  h.initial = r.vec_d();
  h.emissions.resize(h.n_states);
  for (Mixture& m : h.emissions) m = read_mixture(r);
  h.validate();
  return h;
}

std::string serialize_gmm(const gmm::GmmModel& g) {
  Writer w;
  w.field("cov_type", cov_type_name(g.cov_type));
  return w.str() + serialize_mixture(g.mix);
}

gmm::GmmModel read_gmm(const std::string& text) {
  Reader r(text);
  gmm::GmmModel g;
  r.expect("cov_type");
  g.cov_type = cov_type_from_name(r.value<std::string>());
  g.mix = read_mixture(r);
  g.validate();
  return g;
}

std::string serialize_svm(const svm::SvmModel& m) {
  Writer w;
  w.vec("w", m.w);
  w.field("b", m.b);
  w.field("C", m.C);
  w.vec("alpha", m.alpha);
  w.vec("support", m.support);
  w.vec("std_mean", m.standardizer.mean);
  w.vec("std_inv", m.standardizer.inv_std);
  return w.str();
}

svm::SvmModel read_svm(Reader& r) {
  svm::SvmModel m;
  r.expect("w");
  m.w = r.vec_d();
  r.expect("b");
  m.b = r.value<double>();
  r.expect("C");
  m.C = r.value<double>();
  r.expect("alpha");
  m.alpha = r.vec_d();
  r.expect("support");
  m.support = r.vec_i();
  r.expect("std_mean");
  m.standardizer.mean = r.vec_d();
  r.expect("std_inv");
  m.standardizer.inv_std = r.vec_d();
  return m;
}

std::string merger_filename(const fusion::MergerModel& m) {
  return std::string("merger_") + fusion::merger_kind_name(m.kind) + ".txt";
}

std::string serialize_merger(const fusion::MergerModel& m) {
  Writer w;
  w.field("kind", fusion::merger_kind_name(m.kind));
  w.vec("speaker_ids", m.speaker_ids);
  w.vec("weights", m.weights.w);
  w.vec("band_priority", m.band_priority);
  std::string out = w.str();
  if (m.kind == fusion::MergerKind::Gmm) {
    Writer w2;
    w2.field("n_gmms", m.speaker_gmms.size());
    out += w2.str();
    for (const gmm::GmmModel& g : m.speaker_gmms) out += serialize_gmm(g);
  } else if (m.kind == fusion::MergerKind::Svm) {
    Writer w2;
    w2.vec("svm_labels", m.ovr.labels);
    out += w2.str();
    for (const svm::SvmModel& s : m.ovr.models) out += serialize_svm(s);
  }
  return out;
}

fusion::MergerModel read_merger(const std::string& text) {
  Reader r(text);
  fusion::MergerModel m;
  r.expect("kind");
  m.kind = fusion::merger_kind_from_name(r.value<std::string>());
  r.expect("speaker_ids");
  m.speaker_ids = r.vec_i();
  r.expect("weights");
  m.weights.w = r.vec_d();
  r.expect("band_priority");
  m.band_priority = r.vec_i();
  if (m.kind == fusion::MergerKind::Gmm) {
    r.expect("n_gmms");
    const std::size_t n = r.value<std::size_t>();
    for (std::size_t i = 0; i < n; ++i) {
      gmm::GmmModel g;
      r.expect("cov_type");
      g.cov_type = cov_type_from_name(r.value<std::string>());
      g.mix = read_mixture(r);
      m.speaker_gmms.push_back(std::move(g));
    }
  } else if (m.kind == fusion::MergerKind::Svm) {
    r.expect("svm_labels");
    m.ovr.labels = r.vec_i();
    for (std::size_t i = 0; i < m.ovr.labels.size(); ++i)
      m.ovr.models.push_back(read_svm(r));
  }
  m.trained = true;
  return m;
}

std::string serialize_header(const recognizer::TrainedRecognizer& rec) {
  const recognizer::RecognizerConfig& c = rec.config;
  Writer w;
  w.field("sample_rate", c.sample_rate);
  w.field("n_bands", c.band_plan.size());
  for (const dsp::Band& b : c.band_plan.bands) {
    std::ostringstream line;
    line.precision(17);
    line << b.low_hz << ' ' << b.high_hz;
    w.field("band", line.str());
  }
  for (const recognizer::BandModelSpec& s : c.band_models) {
    std::ostringstream line;
    line << s.n_states << ' ' << s.n_mix << ' ' << cov_type_name(s.cov_type);
    w.field("band_model", line.str());
  }
  w.field("merger", recognizer::merger_choice_name(c.merger));
  w.field("pre_emphasis", c.pre_emphasis_alpha);
  w.field("frame_ms", c.frame_ms);
  w.field("hop_ms", c.hop_ms);
  w.field("fft_size", c.fft_size);
  w.field("delta_window", c.delta_window);
  w.field("include_log_energy", c.include_log_energy ? 1 : 0);
  w.field("gmm_merger_components", c.gmm_merger_components);
  w.field("svm_merger_c", c.svm_merger_c);
  w.field("validation_fraction", c.validation_fraction);
  w.field("train_max_iters", c.train.max_iters);
  w.field("train_ll_tol", c.train.ll_tol);
  w.field("train_variance_floor", c.train.variance_floor);
  w.field("train_seed", c.train.seed);
  w.field("ga_population", c.ga.population_size);
  w.field("ga_generations", c.ga.generations);
  w.field("ga_crossover", c.ga.crossover_rate);
  w.field("ga_mutation", c.ga.mutation_rate);
  w.field("ga_elitism", c.ga.elitism_count);
  w.field("ga_seed", c.ga.seed);
  w.field("tau_from_ga", c.tau_from_ga ? 1 : 0);
  w.field("fixed_tau", c.fixed_tau);
  w.vec("enrolled_speakers", rec.enrolled_speakers);
  w.vec("validation_irs", rec.validation_irs);
  w.vec("weights", rec.weights.w);
  w.vec("band_priority", rec.band_priority);
  w.field("tau", rec.tau);
  w.vec("ga_trace", rec.ga_trace);
  w.field("split_train_per_speaker", rec.split_train_per_speaker);
  w.field("n_extra_mergers", rec.extra_mergers.size());
  return w.str();
}

void read_header(const std::string& text, recognizer::TrainedRecognizer& rec,
                 std::size_t& n_extra) {
  Reader r(text);
  recognizer::RecognizerConfig& c = rec.config;
  r.expect("sample_rate");
  c.sample_rate = r.value<int>();
  r.expect("n_bands");
  const std::size_t nb = r.value<std::size_t>();
  c.band_plan.bands.clear();
  for (std::size_t b = 0; b < nb; ++b) {
    r.expect("band");
    dsp::Band band;
    band.low_hz = r.value<double>();
    band.high_hz = r.value<double>();
    c.band_plan.bands.push_back(band);
  }
  c.band_models.clear();
  for (std::size_t b = 0; b < nb; ++b) {
    r.expect("band_model");
    recognizer::BandModelSpec s;
    s.n_states = r.value<int>();
    s.n_mix = r.value<int>();
    s.cov_type = cov_type_from_name(r.value<std::string>());
    c.band_models.push_back(s);
  }
  r.expect("merger");
  c.merger = recognizer::merger_choice_from_name(r.value<std::string>());
  r.expect("pre_emphasis");
  c.pre_emphasis_alpha = r.value<double>();
  r.expect("frame_ms");
  c.frame_ms = r.value<double>();
  r.expect("hop_ms");
  c.hop_ms = r.value<double>();
  r.expect("fft_size");
  c.fft_size = r.value<std::size_t>();
  r.expect("delta_window");
  c.delta_window = r.value<int>();
  r.expect("include_log_energy");
  c.include_log_energy = r.value<int>() != 0;
  r.expect("gmm_merger_components");
  c.gmm_merger_components = r.value<int>();
  r.expect("svm_merger_c");
  c.svm_merger_c = r.value<double>();
  r.expect("validation_fraction");
  c.validation_fraction = r.value<double>();
  r.expect("train_max_iters");
  c.train.max_iters = r.value<int>();
  r.expect("train_ll_tol");
  c.train.ll_tol = r.value<double>();
  r.expect("train_variance_floor");
  c.train.variance_floor = r.value<double>();
  r.expect("train_seed");
  c.train.seed = r.value<std::uint64_t>();
  r.expect("ga_population");
  c.ga.population_size = r.value<int>();
  r.expect("ga_generations");
  c.ga.generations = r.value<int>();
  r.expect("ga_crossover");
  c.ga.crossover_rate = r.value<double>();
  r.expect("ga_mutation");
  c.ga.mutation_rate = r.value<double>();
  r.expect("ga_elitism");
  c.ga.elitism_count = r.value<int>();
  r.expect("ga_seed");
  c.ga.seed = r.value<std::uint64_t>();
  r.expect("tau_from_ga");
  c.tau_from_ga = r.value<int>() != 0;
  r.expect("fixed_tau");
  c.fixed_tau = r.value<double>();
  r.expect("enrolled_speakers");
  rec.enrolled_speakers = r.vec_i();
  r.expect("validation_irs");
  rec.validation_irs = r.vec_d();
  r.expect("weights");
  rec.weights.w = r.vec_d();
  r.expect("band_priority");
  rec.band_priority = r.vec_i();
  r.expect("tau");
  rec.tau = r.value<double>();
  r.expect("ga_trace");
  rec.ga_trace = r.vec_d();
  r.expect("split_train_per_speaker");
  rec.split_train_per_speaker = r.value<int>();
  r.expect("n_extra_mergers");
  n_extra = r.value<std::size_t>();
}

}  // namespace

void save_recognizer(const std::string& dir,
                     const recognizer::TrainedRecognizer& rec) {
  fs::create_directories(dir);
  std::map<std::string, std::string> files;

  files["recognizer.txt"] = serialize_header(rec);
  for (std::size_t b = 0; b < rec.bank.size(); ++b) {
    for (std::size_t s = 0; s < rec.bank[b].size(); ++s) {
      const std::string name = "hmm_b" + std::to_string(b) + "_s" +
                               std::to_string(rec.enrolled_speakers[s]) + ".txt";
      files[name] = serialize_hmm(rec.bank[b][s]);
    }
  }
  files[merger_filename(rec.merger)] = serialize_merger(rec.merger);
  for (const fusion::MergerModel& m : rec.extra_mergers)
    files[merger_filename(m)] = serialize_merger(m);

  std::ostringstream manifest;
  manifest << "version " << kStoreVersion << '\n';
  for (const auto& [name, content] : files) {
    write_file((fs::path(dir) / name).string(), content);
    manifest << "file " << name << ' ' << std::hex << fnv1a64(content)
             << std::dec << '\n';
  }
  write_file((fs::path(dir) / "manifest.txt").string(), manifest.str());
}

recognizer::TrainedRecognizer load_recognizer(const std::string& dir) {
  const std::string manifest_text =
      read_file((fs::path(dir) / "manifest.txt").string());
  std::istringstream manifest(manifest_text);
  std::string tag;
  int version = 0;
  if (!(manifest >> tag >> version) || tag != "version" || version != kStoreVersion)
    throw IoError("unsupported store version in " + dir);

  std::map<std::string, std::string> files;
  std::string name, hash_hex;
  while (manifest >> tag >> name >> hash_hex) {
    if (tag != "file") throw IoError("bad manifest line in " + dir);
    const std::string content = read_file((fs::path(dir) / name).string());
    const std::uint64_t expect = std::stoull(hash_hex, nullptr, 16);
    if (fnv1a64(content) != expect)
      throw IoError("checksum mismatch for " + name + " in " + dir);
    files[name] = content;
  }
  if (!files.count("recognizer.txt"))
    throw IoError("store has no recognizer.txt");

  recognizer::TrainedRecognizer rec;
  std::size_t n_extra = 0;
  read_header(files["recognizer.txt"], rec, n_extra);

  rec.band_mfcc.clear();
  for (const dsp::Band& b : rec.config.band_plan.bands) {
    features::MfccConfig c = features::band_mfcc_config(
        b.low_hz, b.high_hz, rec.config.sample_rate);
    c.fft_size = rec.config.fft_size;
    c.delta_window = rec.config.delta_window;
    c.include_log_energy = rec.config.include_log_energy;
    rec.band_mfcc.push_back(c);
  }

  const std::size_t B = rec.config.band_plan.size();
  rec.bank.assign(B, {});
  for (std::size_t b = 0; b < B; ++b) {
    for (int spk : rec.enrolled_speakers) {
      const std::string fname =
          "hmm_b" + std::to_string(b) + "_s" + std::to_string(spk) + ".txt";
      if (!files.count(fname)) throw IoError("store missing " + fname);
      rec.bank[b].push_back(read_hmm(files[fname]));
    }
  }

  std::vector<fusion::MergerModel> mergers;
  for (const auto& [fname, content] : files) {
    if (fname.rfind("merger_", 0) == 0) mergers.push_back(read_merger(content));
  }
  if (mergers.empty()) throw IoError("store has no merger file");

  const fusion::MergerKind primary_kind =
      rec.config.merger == recognizer::MergerChoice::All ||
              rec.config.merger == recognizer::MergerChoice::None
          ? (rec.config.merger == recognizer::MergerChoice::All
                 ? fusion::MergerKind::WeightedLclr
                 : fusion::MergerKind::UnweightedLclr)
          : fusion::merger_kind_from_name(
                recognizer::merger_choice_name(rec.config.merger));
  bool found = false;
  for (fusion::MergerModel& m : mergers) {
    if (!found && m.kind == primary_kind) {
      rec.merger = std::move(m);
      found = true;
    } else {
      rec.extra_mergers.push_back(std::move(m));
    }
  }
  if (!found) throw IoError("store missing the primary merger");
  if (rec.extra_mergers.size() != n_extra)
    throw IoError("store merger count mismatch");
  return rec;
}

}  // namespace sid::store
