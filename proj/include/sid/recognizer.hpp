#ifndef SID_RECOGNIZER_HPP
#define SID_RECOGNIZER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sid/corpus.hpp"
#include "sid/decision.hpp"
#include "sid/dsp.hpp"
#include "sid/features.hpp"
#include "sid/fusion.hpp"
#include "sid/ga.hpp"
#include "sid/hmm.hpp"
#include "sid/matrix.hpp"

namespace sid::recognizer {

struct BandModelSpec {
  int n_states = 4;
  int n_mix = 8;
  CovType cov_type = CovType::Diagonal;
};

// "none" is only valid (and mandatory) for the single-band recognizer;
// "all" trains every merger head over one model bank.
enum class MergerChoice { None, Vote, WeightedLclr, UnweightedLclr, Gmm, Svm, All };

const char* merger_choice_name(MergerChoice m);
MergerChoice merger_choice_from_name(const std::string& name);

struct NoiseSpec {
  double low_hz = 0.0;   // low == high == 0 means full spectrum
  double high_hz = 0.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0x4E5345ULL;
};

struct RecognizerConfig {
  int sample_rate = 16000;
  dsp::BandPlan band_plan;
  std::vector<BandModelSpec> band_models;  // one per band
  MergerChoice merger = MergerChoice::None;

  double pre_emphasis_alpha = 0.97;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  int delta_window = 2;
  bool include_log_energy = false;
  dsp::EndpointParams endpoint;

  int gmm_merger_components = 20;
  double svm_merger_c = 1.0;

  double validation_fraction = 0.25;  // of the training utterances, per speaker
  hmm::TrainConfig train;
  ga::GaConfig ga;
  bool tau_from_ga = true;
  double fixed_tau = 0.0;

  void validate() const;
};

struct TrainedRecognizer {
  RecognizerConfig config;
  std::vector<features::MfccConfig> band_mfcc;
  std::vector<int> enrolled_speakers;
  std::vector<std::vector<hmm::HmmModel>> bank;  // [band][speaker index]
  std::vector<double> validation_irs;            // per band
  fusion::BandWeights weights;                   // from validation IRs
  std::vector<int> band_priority;                // bands by validation IR desc
  fusion::MergerModel merger;                    // primary head
  std::vector<fusion::MergerModel> extra_mergers;  // merger == All
  double tau = 0.0;
  std::vector<double> ga_trace;  // per-generation best during tuning
  int split_train_per_speaker = 0;  // bookkeeping so tools can rebuild the split

  const fusion::MergerModel* find_merger(fusion::MergerKind kind) const;
};

struct IdResult {
  int speaker_id = 0;
  decision::ConfidenceScore confidence;
  bool accepted = false;
};

// Full pipeline training: per-band feature extraction, per-speaker HMM
// banks, validation IRs for the band weights, the configured merger, and a
// GA-tuned threshold unless the config fixes one.
TrainedRecognizer train(const RecognizerConfig& config,
                        const corpus::SplitPlan& split,
                        const corpus::ClipSource& source);

// Per-band, per-speaker length-normalized log-likelihoods for one clip.
fusion::ScoreMatrix score_matrix(const TrainedRecognizer& rec,
                                 const corpus::AudioClip& clip);

IdResult identify_utterance(const TrainedRecognizer& rec,
                            const corpus::AudioClip& clip);

// Deterministic band-limited noise at the given SNR relative to the clip's
// power; keyed by (seed, speaker, utterance).
corpus::AudioClip apply_noise(const corpus::AudioClip& clip,
                              const NoiseSpec& spec, int speaker_id,
                              int utterance_id);

struct TrialScore {
  corpus::Utterance utterance;
  bool impostor = false;
  fusion::ScoreMatrix matrix;
};

// The audio-heavy half of evaluation: score matrices for a trial list,
// with optional noise injection. Merger heads can then be compared without
// re-processing the audio.
std::vector<TrialScore> score_trials(const TrainedRecognizer& rec,
                                     const std::vector<corpus::Utterance>& utts,
                                     bool impostor,
                                     const corpus::ClipSource& source,
                                     const std::optional<NoiseSpec>& noise);

struct EvalOptions {
  int far_frr_points = 200;
  int histogram_bins = 30;
};

struct EvalReport {
  double identification_rate = 0.0;   // % of test trials correctly identified
  double true_rejection_rate = 0.0;   // % of impostor trials rejected at tau
  double reliability = 0.0;           // identification_rate - true_rejection_rate
  double genuine_acceptance = 0.0;    // % of correct genuine trials accepted
  double impostor_acceptance = 0.0;
  double decision_gap = 0.0;          // genuine_acceptance - impostor_acceptance
  double tau = 0.0;
  std::size_t n_test = 0;
  std::size_t n_impostor = 0;
  std::size_t n_silence_errors = 0;
  std::vector<decision::FarFrrPoint> far_frr_curve;
  decision::HistogramPair histograms;
  std::vector<double> genuine_lrs;   // correctly identified genuine trials
  std::vector<double> impostor_lrs;  // all impostor trials
};

EvalReport evaluate(const TrainedRecognizer& rec, const corpus::SplitPlan& split,
                    const corpus::ClipSource& source,
                    const std::optional<NoiseSpec>& noise = std::nullopt,
                    const EvalOptions& options = {});

// Identification with a specific merger head over precomputed trials.
double head_identification_rate(const fusion::MergerModel& head,
                                const std::vector<TrialScore>& genuine_trials);

}  // namespace sid::recognizer

#endif  // SID_RECOGNIZER_HPP
