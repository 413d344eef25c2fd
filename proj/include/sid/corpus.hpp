#ifndef SID_CORPUS_HPP
#define SID_CORPUS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sid/wav.hpp"

namespace sid::corpus {

struct AudioClip {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = 0;          // Hz

  void validate() const;  // throws FormatError on invariant violation
};

enum class Role { Enrolled, Impostor };

struct ManifestEntry {
  int speaker_id = 0;
  int utterance_id = 0;
  Role role = Role::Enrolled;
  std::string path;  // empty for in-memory corpora
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<int> speaker_ids() const;  // ascending, unique
  std::size_t utterance_count(int speaker_id) const;
};

struct Utterance {
  int speaker_id = 0;
  int utterance_id = 0;
};

struct SplitPlan {
  std::vector<Utterance> train;
  std::vector<Utterance> test;
  std::vector<Utterance> impostor_test;
  std::vector<int> enrolled_speakers;  // ascending
};

// First `enrolled_count` speakers (ascending id) are enrolled: their first
// `train_per_speaker` utterances (ascending id) train, the rest test.
// Remaining speakers contribute every utterance to impostor_test.
SplitPlan split_manifest(const Manifest& manifest, int train_per_speaker,
                         int enrolled_count);

// Synthetic speaker voice: a harmonic stack at a speaker-specific
// fundamental, shaped by three formant-like resonances, uttered as a
// three-segment "word" with an attack/release envelope, leading and
// trailing silence, and additive white noise. Identity also lives in how
// strongly each resonance is excited per segment, in the spectral tilt,
// and in the pitch contour — the voice-quality traits that keep twenty
// voices mutually distinguishable.
struct SpeakerParams {
  double fundamental_hz = 0.0;
  double resonance_hz[3] = {0, 0, 0};
  double resonance_bw_hz[3] = {0, 0, 0};
  double segment_gain[3][3] = {};  // [segment][resonance] emphasis
  double tilt = 1.0;               // high-frequency rolloff exponent
  double pitch_arch = 0.06;        // rise-fall depth of the contour
  double pitch_slope = 0.0;        // linear drift across the word
};

struct SynthesisSettings {
  int sample_rate = 16000;
  double duration_s = 1.0;
  double lead_silence_frac = 0.10;
  double tail_silence_frac = 0.10;
  double jitter_frac = 0.02;   // per-utterance, per-parameter
  double noise_snr_db = 25.0;  // white noise over the whole clip
  double peak = 0.30;          // word peak amplitude before noise
};

// Deterministic parameter table: same seed, same table, any platform.
std::vector<SpeakerParams> speaker_parameter_table(std::uint64_t seed,
                                                   int n_speakers);

AudioClip synthesize_utterance(const SpeakerParams& params, std::uint64_t seed,
                               int speaker_id, int utterance_id,
                               const SynthesisSettings& settings);

// In-memory synthetic corpus; clips are generated lazily and cached.
class SyntheticCorpus {
 public:
  SyntheticCorpus(int n_speakers, int n_utterances, double duration_s,
                  std::uint64_t seed, int enrolled_count = -1);

  const Manifest& manifest() const { return manifest_; }
  const AudioClip& clip(int speaker_id, int utterance_id) const;
  const std::vector<SpeakerParams>& params() const { return params_; }
  const SynthesisSettings& settings() const { return settings_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int n_speakers_;
  int n_utterances_;
  std::uint64_t seed_;
  SynthesisSettings settings_;
  std::vector<SpeakerParams> params_;
  Manifest manifest_;
  mutable std::map<std::pair<int, int>, AudioClip> cache_;
};

// Manifest rows whose clips live in WAV files.
class WavCorpus {
 public:
  explicit WavCorpus(Manifest manifest) : manifest_(std::move(manifest)) {}
  const Manifest& manifest() const { return manifest_; }
  AudioClip clip(int speaker_id, int utterance_id) const;

 private:
  Manifest manifest_;
};

// Uniform view used by the recognizer: anything that maps (speaker,
// utterance) to audio.
class ClipSource {
 public:
  virtual ~ClipSource() = default;
  virtual AudioClip get(int speaker_id, int utterance_id) const = 0;
};

class SyntheticClipSource : public ClipSource {
 public:
  explicit SyntheticClipSource(const SyntheticCorpus& c) : c_(c) {}
  AudioClip get(int s, int u) const override { return c_.clip(s, u); }

 private:
  const SyntheticCorpus& c_;
};

class WavClipSource : public ClipSource {
 public:
  explicit WavClipSource(const WavCorpus& c) : c_(c) {}
  AudioClip get(int s, int u) const override { return c_.clip(s, u); }

 private:
  const WavCorpus& c_;
};

// CSV persistence: header speaker_id,utterance_id,role,path.
void write_manifest_csv(const std::string& path, const Manifest& manifest);
Manifest load_manifest_csv(const std::string& path);

}  // namespace sid::corpus

#endif  // SID_CORPUS_HPP
