#include "sid/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "sid/errors.hpp"
#include "sid/rng.hpp"

namespace sid::corpus {

void AudioClip::validate() const {
  if (sample_rate <= 0) throw FormatError("sample_rate must be positive");
  if (samples.empty()) throw FormatError("clip has no samples");
  for (double s : samples) {
    if (!std::isfinite(s) || std::abs(s) > 1.0 + 1e-12)
      throw FormatError("sample out of [-1, 1]");
  }
}

std::vector<int> Manifest::speaker_ids() const {
  std::set<int> ids;
  for (const auto& e : entries) ids.insert(e.speaker_id);
  return {ids.begin(), ids.end()};
}

std::size_t Manifest::utterance_count(int speaker_id) const {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (e.speaker_id == speaker_id) ++n;
  return n;
}

SplitPlan split_manifest(const Manifest& manifest, int train_per_speaker,
                         int enrolled_count) {
  if (train_per_speaker < 1) throw SplitError("train_per_speaker must be >= 1");
  const std::vector<int> speakers = manifest.speaker_ids();
  if (enrolled_count < 1 || enrolled_count > static_cast<int>(speakers.size()))
    throw SplitError("enrolled_count outside [1, n_speakers]");

  SplitPlan plan;
  for (int si = 0; si < static_cast<int>(speakers.size()); ++si) {
    const int spk = speakers[si];
    std::vector<int> utts;
    for (const auto& e : manifest.entries)
      if (e.speaker_id == spk) utts.push_back(e.utterance_id);
    std::sort(utts.begin(), utts.end());

    if (si < enrolled_count) {
      if (static_cast<int>(utts.size()) < train_per_speaker + 1)
        throw SplitError("speaker " + std::to_string(spk) + " has only " +
                         std::to_string(utts.size()) + " utterances, need " +
                         std::to_string(train_per_speaker + 1));
      plan.enrolled_speakers.push_back(spk);
      for (int k = 0; k < static_cast<int>(utts.size()); ++k) {
        if (k < train_per_speaker)
          plan.train.push_back({spk, utts[k]});
        else
          plan.test.push_back({spk, utts[k]});
      }
    } else {
      for (int u : utts) plan.impostor_test.push_back({spk, u});
    }
  }
  return plan;
}

namespace {

constexpr double kF0Low = 90.0;
constexpr double kF0High = 260.0;
// Stratified resonance ranges, one per slot; they cover 300-3500 Hz.
constexpr double kResLow[3] = {300.0, 900.0, 2000.0};
constexpr double kResHigh[3] = {900.0, 2000.0, 3500.0};

// Base per-segment resonance emphasis: the synthetic "word" moves its
// energy across the three resonances, which gives the left-to-right states
// something temporal to model. Each speaker perturbs this pattern.
constexpr double kSegmentGainBase[3][3] = {
    {1.00, 0.40, 0.20},
    {0.30, 1.00, 0.40},
    {0.20, 0.40, 1.00},
};

double lorentz(double f, double center, double bw) {
  const double d = (f - center) / bw;
  return 1.0 / (1.0 + d * d);
}

}  // namespace

std::vector<SpeakerParams> speaker_parameter_table(std::uint64_t seed,
                                                   int n_speakers) {
  Rng table_rng = Rng(seed).fork(0x5350454BULL);  // speaker stream

  // Every voice parameter lives on its own slotted lattice: an independent
  // permutation assigns each speaker one slot per parameter, and the value
  // lands in the middle half of that slot. Slots are wider than the
  // per-utterance jitter, so no two voices can collide in any parameter,
  // and neighbor distances look alike for every voice.
  auto permutation = [&](std::uint64_t stream) {
    Rng rng = table_rng.fork(stream);
    std::vector<int> p(n_speakers);
    std::iota(p.begin(), p.end(), 0);
    for (int i = n_speakers - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_int(0, i));
      std::swap(p[i], p[j]);
    }
    return p;
  };
  auto slotted = [&](Rng& rng, const std::vector<int>& perm, int s, double lo,
                     double hi) {
    const double width = (hi - lo) / n_speakers;
    return lo + (perm[s] + rng.uniform(0.25, 0.75)) * width;
  };

  const std::vector<int> f0_perm = permutation(1);
  const std::vector<int> res_perm[3] = {permutation(2), permutation(3),
                                        permutation(4)};
  const std::vector<int> tilt_perm = permutation(5);

  std::vector<SpeakerParams> out(n_speakers);
  for (int s = 0; s < n_speakers; ++s) {
    Rng rng = table_rng.fork(0x100ULL + static_cast<std::uint64_t>(s));
    SpeakerParams p;
    p.fundamental_hz = slotted(rng, f0_perm, s, kF0Low, kF0High);
    for (int r = 0; r < 3; ++r) {
      p.resonance_hz[r] = slotted(rng, res_perm[r], s, kResLow[r], kResHigh[r]);
      // width scales with center so per-utterance jitter stays inside it
      p.resonance_bw_hz[r] = p.resonance_hz[r] * rng.uniform(0.05, 0.12);
    }
    for (int seg = 0; seg < 3; ++seg)
      for (int r = 0; r < 3; ++r)
        p.segment_gain[seg][r] =
            kSegmentGainBase[seg][r] * std::exp(rng.uniform(-0.5, 0.5));
    p.tilt = slotted(rng, tilt_perm, s, 0.7, 1.4);
    p.pitch_arch = rng.uniform(0.02, 0.10);
    p.pitch_slope = rng.uniform(-0.06, 0.06);
    out[s] = p;
  }
  return out;
}

AudioClip synthesize_utterance(const SpeakerParams& params, std::uint64_t seed,
                               int speaker_id, int utterance_id,
                               const SynthesisSettings& settings) {
  Rng rng = Rng(seed)
                .fork(0x55545400ULL)  // utterance stream
                .fork(static_cast<std::uint64_t>(speaker_id))
                .fork(static_cast<std::uint64_t>(utterance_id));

  auto jitter = [&](double v) {
    return v * (1.0 + settings.jitter_frac * rng.uniform(-1.0, 1.0));
  };

  SpeakerParams p;
  p.fundamental_hz = jitter(params.fundamental_hz);
  for (int r = 0; r < 3; ++r) {
    p.resonance_hz[r] = jitter(params.resonance_hz[r]);
    p.resonance_bw_hz[r] = jitter(params.resonance_bw_hz[r]);
  }
  for (int seg = 0; seg < 3; ++seg)
    for (int r = 0; r < 3; ++r)
      p.segment_gain[seg][r] = jitter(params.segment_gain[seg][r]);
  p.tilt = jitter(params.tilt);
  p.pitch_arch = jitter(params.pitch_arch);
  p.pitch_slope = jitter(params.pitch_slope);

  const int fs = settings.sample_rate;
  const int n_total = static_cast<int>(std::lround(settings.duration_s * fs));
  const int lead = static_cast<int>(std::lround(settings.lead_silence_frac * n_total));
  const int tail = static_cast<int>(std::lround(settings.tail_silence_frac * n_total));
  const int n_word = n_total - lead - tail;
  if (n_word < fs / 100) throw ConfigError("duration too short for a word");

  // Harmonics up to 4.2 kHz; the band plans top out at 4 kHz.
  const double f0_max = p.fundamental_hz * 1.07;
  const int n_harm = std::max(1, static_cast<int>(4200.0 / f0_max));

  std::vector<double> word(n_word, 0.0);
  std::vector<double> phase(n_harm, 0.0);
  for (int k = 0; k < n_harm; ++k) phase[k] = rng.uniform(0.0, 6.283185307179586);

  const int block = 32;  // amplitude/f0 update granularity (2 ms at 16 kHz)
  std::vector<double> amp(n_harm, 0.0);
  const double seg_len = n_word / 3.0;
  const double fade = 0.02 * fs;  // 20 ms segment crossfade

  for (int start = 0; start < n_word; start += block) {
    const int end = std::min(start + block, n_word);
    const double t = (start + 0.5 * (end - start)) / n_word;  // 0..1

    // speaker-specific rise-fall-plus-drift pitch contour
    const double f0 =
        p.fundamental_hz * (1.0 + p.pitch_arch * std::sin(3.141592653589793 * t) +
                            p.pitch_slope * (t - 0.5));

    // segment gains with linear crossfades
    double seg_w[3] = {0.0, 0.0, 0.0};
    const double pos = t * n_word;
    for (int s = 0; s < 3; ++s) {
      const double lo = s * seg_len;
      const double hi = (s + 1) * seg_len;
      double w = 0.0;
      if (pos >= lo && pos < hi) w = 1.0;
      if (pos >= lo - fade && pos < lo) w = (pos - (lo - fade)) / fade;
      if (s < 2 && pos >= hi && pos < hi + fade) w = 1.0 - (pos - hi) / fade;
      seg_w[s] = std::max(seg_w[s], w);
    }
    const double seg_total = seg_w[0] + seg_w[1] + seg_w[2];
    if (seg_total > 0)
      for (double& w : seg_w) w /= seg_total;

    for (int k = 0; k < n_harm; ++k) {
      const double f = (k + 1) * f0;
      // shared broadband base: every voice keeps some energy everywhere,
      // so no model sees another voice as arbitrarily far away
      double env = 0.12;
      for (int s = 0; s < 3; ++s) {
        double g = 0.0;
        for (int r = 0; r < 3; ++r)
          g += p.segment_gain[s][r] *
               lorentz(f, p.resonance_hz[r], p.resonance_bw_hz[r]);
        env += seg_w[s] * g;
      }
      amp[k] = env / std::pow(1.0 + f / 3000.0, p.tilt);
    }

    const double dphi = 6.283185307179586 * f0 / fs;
    for (int i = start; i < end; ++i) {
      double x = 0.0;
      for (int k = 0; k < n_harm; ++k) {
        x += amp[k] * std::sin(phase[k]);
        phase[k] += (k + 1) * dphi;
      }
      word[i] = x;
    }
    for (int k = 0; k < n_harm; ++k)
      phase[k] = std::fmod(phase[k], 6.283185307179586);
  }

  // attack/release envelope, then normalize the word peak
  const int attack = static_cast<int>(0.03 * fs);
  const int release = static_cast<int>(0.04 * fs);
  for (int i = 0; i < n_word; ++i) {
    double e = 1.0;
    if (i < attack) e = static_cast<double>(i) / attack;
    if (n_word - 1 - i < release)
      e = std::min(e, static_cast<double>(n_word - 1 - i) / release);
    word[i] *= e;
  }
  double peak = 1e-12;
  for (double v : word) peak = std::max(peak, std::abs(v));
  const double gain = settings.peak / peak;
  for (double& v : word) v *= gain;

  AudioClip clip;
  clip.sample_rate = fs;
  clip.samples.assign(n_total, 0.0);
  std::copy(word.begin(), word.end(), clip.samples.begin() + lead);

  // white noise over the whole clip at the configured SNR vs word power
  const double p_word =
      std::inner_product(word.begin(), word.end(), word.begin(), 0.0) / n_word;
  const double sigma =
      std::sqrt(p_word * std::pow(10.0, -settings.noise_snr_db / 10.0));
  for (double& s : clip.samples) s += sigma * rng.gauss();
  for (double& s : clip.samples) s = std::clamp(s, -1.0, 1.0);
  return clip;
}

SyntheticCorpus::SyntheticCorpus(int n_speakers, int n_utterances,
                                 double duration_s, std::uint64_t seed,
                                 int enrolled_count)
    : n_speakers_(n_speakers), n_utterances_(n_utterances), seed_(seed) {
  if (n_speakers < 2) throw ConfigError("need at least 2 speakers");
  if (n_utterances < 2) throw ConfigError("need at least 2 utterances per speaker");
  settings_.duration_s = duration_s;
  params_ = speaker_parameter_table(seed, n_speakers);
  if (enrolled_count < 0) enrolled_count = n_speakers / 2;
  for (int s = 0; s < n_speakers; ++s) {
    for (int u = 0; u < n_utterances; ++u) {
      manifest_.entries.push_back(
          {s, u, s < enrolled_count ? Role::Enrolled : Role::Impostor, ""});
    }
  }
}

const AudioClip& SyntheticCorpus::clip(int speaker_id, int utterance_id) const {
  if (speaker_id < 0 || speaker_id >= n_speakers_ || utterance_id < 0 ||
      utterance_id >= n_utterances_)
    throw IndexError("no such clip");
  const auto key = std::make_pair(speaker_id, utterance_id);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_
             .emplace(key, synthesize_utterance(params_[speaker_id], seed_,
                                                speaker_id, utterance_id,
                                                settings_))
             .first;
  }
  return it->second;
}

AudioClip WavCorpus::clip(int speaker_id, int utterance_id) const {
  for (const auto& e : manifest_.entries) {
    if (e.speaker_id == speaker_id && e.utterance_id == utterance_id)
      return load_wav(e.path);
  }
  throw IndexError("manifest has no entry for speaker " +
                   std::to_string(speaker_id) + " utterance " +
                   std::to_string(utterance_id));
}

void write_manifest_csv(const std::string& path, const Manifest& manifest) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << "speaker_id,utterance_id,role,path\n";
  for (const auto& e : manifest.entries) {
    f << e.speaker_id << ',' << e.utterance_id << ','
      << (e.role == Role::Enrolled ? "enrolled" : "impostor") << ',' << e.path
      << '\n';
  }
}

Manifest load_manifest_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw FormatError("empty manifest " + path);
  Manifest m;
  std::set<std::pair<int, int>> seen;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string spk, utt, role, p;
    if (!std::getline(ss, spk, ',') || !std::getline(ss, utt, ',') ||
        !std::getline(ss, role, ','))
      throw FormatError("bad manifest row: " + line);
    std::getline(ss, p);
    ManifestEntry e;
    e.speaker_id = std::stoi(spk);
    e.utterance_id = std::stoi(utt);
    if (role == "enrolled")
      e.role = Role::Enrolled;
    else if (role == "impostor")
      e.role = Role::Impostor;
    else
      throw FormatError("bad role: " + role);
    e.path = p;
    if (!seen.insert({e.speaker_id, e.utterance_id}).second)
      throw FormatError("duplicate (speaker, utterance) in manifest");
    m.entries.push_back(e);
  }
  return m;
}

}  // namespace sid::corpus
