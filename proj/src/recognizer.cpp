#include "sid/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sid/errors.hpp"
#include "sid/kernels.hpp"
#include "sid/rng.hpp"

namespace sid::recognizer {

const char* merger_choice_name(MergerChoice m) {
  switch (m) {
    case MergerChoice::None: return "none";
    case MergerChoice::Vote: return "vote";
    case MergerChoice::WeightedLclr: return "weighted_lclr";
    case MergerChoice::UnweightedLclr: return "unweighted_lclr";
    case MergerChoice::Gmm: return "gmm";
    case MergerChoice::Svm: return "svm";
    case MergerChoice::All: return "all";
  }
  return "?";
}

MergerChoice merger_choice_from_name(const std::string& name) {
  if (name == "none") return MergerChoice::None;
  if (name == "vote") return MergerChoice::Vote;
  if (name == "weighted_lclr") return MergerChoice::WeightedLclr;
  if (name == "unweighted_lclr") return MergerChoice::UnweightedLclr;
  if (name == "gmm") return MergerChoice::Gmm;
  if (name == "svm") return MergerChoice::Svm;
  if (name == "all") return MergerChoice::All;
  throw ConfigError("unknown merger: " + name);
}

void RecognizerConfig::validate() const {
  band_plan.validate(sample_rate);
  if (band_models.size() != band_plan.size())
    throw ConfigError("need one model spec per band");
  for (const BandModelSpec& s : band_models)
    if (s.n_states < 1 || s.n_mix < 1)
      throw ConfigError("states and mixtures must be >= 1");
  if (band_plan.size() == 1 && merger != MergerChoice::None)
    throw ConfigError("single-band recognizer takes no merger");
  if (band_plan.size() > 1 && merger == MergerChoice::None)
    throw ConfigError("multi-band recognizer needs a merger");
  if (validation_fraction <= 0.0 || validation_fraction >= 1.0)
    throw ConfigError("validation_fraction must be in (0, 1)");
}

const fusion::MergerModel* TrainedRecognizer::find_merger(
    fusion::MergerKind kind) const {
  if (merger.kind == kind) return &merger;
  for (const fusion::MergerModel& m : extra_mergers)
    if (m.kind == kind) return &m;
  return nullptr;
}

namespace {

using corpus::AudioClip;
using corpus::Utterance;

// pre-emphasis -> endpoints -> band split of the full clip -> trim
std::vector<features::FeatureSequence> clip_band_features(
    const RecognizerConfig& config,
    const std::vector<features::MfccConfig>& band_mfcc, const AudioClip& clip) {
  if (clip.sample_rate != config.sample_rate)
    throw ConfigError("clip sample rate does not match the recognizer");
  const AudioClip emphasized = dsp::pre_emphasize(clip, config.pre_emphasis_alpha);
  const auto [start, end] = dsp::detect_endpoints(emphasized, config.endpoint);
  dsp::SubbandSet bands = dsp::decompose_subbands(emphasized, config.band_plan);
  for (AudioClip& band : bands.band_signals) {
    band.samples = std::vector<double>(band.samples.begin() + start,
                                       band.samples.begin() + end);
  }
  return features::extract_band_features(bands, band_mfcc, config.frame_ms,
                                         config.hop_ms);
}

struct BandFeatureTable {
  // [band][speaker index] -> sequences
  std::vector<std::vector<std::vector<Matrix>>> per_speaker;
};

BandFeatureTable extract_table(const RecognizerConfig& config,
                               const std::vector<features::MfccConfig>& band_mfcc,
                               const std::vector<int>& speakers,
                               const std::vector<Utterance>& utts,
                               const corpus::ClipSource& source) {
  const std::size_t B = config.band_plan.size();
  BandFeatureTable table;
  table.per_speaker.assign(B, std::vector<std::vector<Matrix>>(speakers.size()));
  for (const Utterance& u : utts) {
    const auto it = std::find(speakers.begin(), speakers.end(), u.speaker_id);
    if (it == speakers.end()) continue;
    const std::size_t si = static_cast<std::size_t>(it - speakers.begin());
    const AudioClip clip = source.get(u.speaker_id, u.utterance_id);
    std::vector<features::FeatureSequence> feats =
        clip_band_features(config, band_mfcc, clip);
    for (std::size_t b = 0; b < B; ++b)
      table.per_speaker[b][si].push_back(std::move(feats[b]));
  }
  return table;
}

std::vector<hmm::HmmModel> train_band_models(
    const RecognizerConfig& config, std::size_t band,
    const std::vector<std::vector<Matrix>>& per_speaker_seqs) {
  const BandModelSpec& spec = config.band_models[band];
  std::vector<hmm::HmmModel> models;
  models.reserve(per_speaker_seqs.size());
  for (std::size_t s = 0; s < per_speaker_seqs.size(); ++s) {
    const std::vector<Matrix>& seqs = per_speaker_seqs[s];
    if (seqs.empty()) throw TrainError("speaker has no training utterances");
    hmm::TrainConfig tc = config.train;
    hmm::HmmModel init =
        hmm::init_model(spec.n_states, spec.n_mix, spec.cov_type, seqs,
                        tc.variance_floor, tc.seed + band * 1000 + s,
                        tc.variance_floor_frac);
    models.push_back(hmm::train_baum_welch(init, seqs, tc).first);
  }
  return models;
}

fusion::ScoreMatrix matrix_from_features(
    const std::vector<std::vector<hmm::HmmModel>>& bank,
    const std::vector<int>& speakers,
    const std::vector<features::FeatureSequence>& band_feats) {
  const std::size_t B = bank.size();
  fusion::ScoreMatrix m;
  m.scores = Matrix(B, speakers.size());
  m.speaker_ids = speakers;
  m.band_ids.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    m.band_ids[b] = static_cast<int>(b);
    const double T = static_cast<double>(band_feats[b].rows());
    for (std::size_t s = 0; s < speakers.size(); ++s)
      m.scores(b, s) = hmm::log_likelihood(bank[b][s], band_feats[b]) / T;
  }
  return m;
}

fusion::BandWeights uniform_weights(std::size_t n) {
  fusion::BandWeights w;
  w.w.assign(n, 1.0 / static_cast<double>(n));
  return w;
}

fusion::MergerModel build_merger(const TrainedRecognizer& rec,
                                 MergerChoice choice,
                                 const std::vector<fusion::ScoreMatrix>& train_matrices,
                                 const std::vector<int>& train_labels) {
  switch (choice) {
    case MergerChoice::None:
      return fusion::make_lclr_merger(rec.enrolled_speakers,
                                      uniform_weights(1), false);
    case MergerChoice::Vote:
      return fusion::make_vote_merger(rec.enrolled_speakers, rec.band_priority);
    case MergerChoice::WeightedLclr:
      return fusion::make_lclr_merger(rec.enrolled_speakers, rec.weights, true);
    case MergerChoice::UnweightedLclr:
      return fusion::make_lclr_merger(rec.enrolled_speakers,
                                      uniform_weights(rec.bank.size()), false);
    case MergerChoice::Gmm:
      return fusion::train_gmm_merger(train_matrices, train_labels,
                                      rec.config.gmm_merger_components);
    case MergerChoice::Svm:
      return fusion::train_svm_merger(train_matrices, train_labels,
                                      rec.config.svm_merger_c);
    case MergerChoice::All:
      throw ConfigError("All is expanded by the caller");
  }
  throw ConfigError("bad merger choice");
}

int speaker_index(const std::vector<int>& speakers, int id) {
  const auto it = std::find(speakers.begin(), speakers.end(), id);
  if (it == speakers.end()) throw IndexError("unknown speaker id");
  return static_cast<int>(it - speakers.begin());
}

IdResult identify_matrix(const TrainedRecognizer& rec,
                         const fusion::ScoreMatrix& m) {
  IdResult r;
  r.speaker_id = fusion::identify(rec.merger, m);
  const std::vector<double> fused = fusion::fused_scores(rec.merger, m);
  r.confidence = decision::likelihood_ratio(
      fused, speaker_index(rec.enrolled_speakers, r.speaker_id));
  r.accepted = decision::decide(r.confidence, rec.tau);
  return r;
}

}  // namespace

TrainedRecognizer train(const RecognizerConfig& config,
                        const corpus::SplitPlan& split,
                        const corpus::ClipSource& source) {
  config.validate();
  if (split.enrolled_speakers.size() < 2)
    throw TrainError("need at least two enrolled speakers");

  TrainedRecognizer rec;
  rec.config = config;
  rec.enrolled_speakers = split.enrolled_speakers;
  rec.split_train_per_speaker = static_cast<int>(
      split.train.size() / split.enrolled_speakers.size());

  const std::size_t B = config.band_plan.size();
  rec.band_mfcc.reserve(B);
  for (const dsp::Band& b : config.band_plan.bands) {
    features::MfccConfig c =
        features::band_mfcc_config(b.low_hz, b.high_hz, config.sample_rate);
    c.fft_size = config.fft_size;
    c.delta_window = config.delta_window;
    c.include_log_energy = config.include_log_energy;
    rec.band_mfcc.push_back(c);
  }

  const BandFeatureTable table = extract_table(
      config, rec.band_mfcc, rec.enrolled_speakers, split.train, source);

  // 75/25-style sub-split of the training utterances, per speaker, for the
  // per-band validation IRs that feed the weights and the threshold search
  const std::size_t n_speakers = rec.enrolled_speakers.size();
  std::vector<std::vector<Matrix>> sub_train_of_band, sub_val_of_band;
  std::vector<double> band_irs(B, 0.0);
  std::vector<std::vector<std::vector<Matrix>>> prov_train(B), prov_val(B);
  for (std::size_t b = 0; b < B; ++b) {
    prov_train[b].resize(n_speakers);
    prov_val[b].resize(n_speakers);
    for (std::size_t s = 0; s < n_speakers; ++s) {
      const std::vector<Matrix>& seqs = table.per_speaker[b][s];
      const std::size_t n = seqs.size();
      std::size_t n_val = 0;
      if (n >= 2) {
        n_val = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::lround(config.validation_fraction * n)));
        if (n_val >= n) n_val = n - 1;
      }
      const std::size_t n_tr = n - n_val;
      prov_train[b][s].assign(seqs.begin(), seqs.begin() + n_tr);
      prov_val[b][s].assign(seqs.begin() + n_tr, seqs.end());
    }
  }

  // provisional per-band banks on the sub-train part
  std::vector<std::vector<hmm::HmmModel>> prov_bank(B);
  bool have_validation = false;
  for (std::size_t b = 0; b < B; ++b) {
    prov_bank[b] = train_band_models(config, b, prov_train[b]);
    std::size_t correct = 0, total = 0;
    for (std::size_t s = 0; s < n_speakers; ++s) {
      for (const Matrix& seq : prov_val[b][s]) {
        std::size_t best = 0;
        double best_ll = kNegInf;
        for (std::size_t m = 0; m < n_speakers; ++m) {
          const double ll = hmm::log_likelihood(prov_bank[b][m], seq);
          if (ll > best_ll) {
            best_ll = ll;
            best = m;
          }
        }
        if (best == s) ++correct;
        ++total;
      }
    }
    band_irs[b] = total == 0 ? 100.0 : 100.0 * correct / total;
    if (total > 0) have_validation = true;
  }
  rec.validation_irs = band_irs;

  try {
    rec.weights = fusion::compute_weights(band_irs);
  } catch (const WeightError&) {
    rec.weights = uniform_weights(B);  // every band failed validation
  }

  rec.band_priority.resize(B);
  for (std::size_t b = 0; b < B; ++b) rec.band_priority[b] = static_cast<int>(b);
  std::stable_sort(rec.band_priority.begin(), rec.band_priority.end(),
                   [&](int a, int c) { return band_irs[a] > band_irs[c]; });

  // final bank on the full training set
  rec.bank.resize(B);
  for (std::size_t b = 0; b < B; ++b)
    rec.bank[b] = train_band_models(config, b, table.per_speaker[b]);

  // training score matrices for the trained merger heads
  std::vector<fusion::ScoreMatrix> train_matrices;
  std::vector<int> train_labels;
  const bool need_train_scores =
      config.merger == MergerChoice::Gmm || config.merger == MergerChoice::Svm ||
      config.merger == MergerChoice::All;
  if (need_train_scores) {
    for (std::size_t s = 0; s < n_speakers; ++s) {
      const std::size_t n = table.per_speaker[0][s].size();
      for (std::size_t u = 0; u < n; ++u) {
        std::vector<features::FeatureSequence> feats;
        feats.reserve(B);
        for (std::size_t b = 0; b < B; ++b)
          feats.push_back(table.per_speaker[b][s][u]);
        train_matrices.push_back(
            matrix_from_features(rec.bank, rec.enrolled_speakers, feats));
        train_labels.push_back(rec.enrolled_speakers[s]);
      }
    }
  }

  if (config.merger == MergerChoice::All) {
    rec.merger = build_merger(rec, MergerChoice::WeightedLclr, train_matrices,
                              train_labels);
    for (MergerChoice c : {MergerChoice::Vote, MergerChoice::UnweightedLclr,
                           MergerChoice::Gmm, MergerChoice::Svm})
      rec.extra_mergers.push_back(build_merger(rec, c, train_matrices, train_labels));
  } else {
    rec.merger = build_merger(rec, config.merger, train_matrices, train_labels);
  }

  // threshold: GA over validation genuine LRs vs impostor LRs, scored with
  // the provisional bank so the genuine population is held out
  if (!config.tau_from_ga) {
    rec.tau = config.fixed_tau;
  } else {
    if (split.impostor_test.empty())
      throw ConfigError("threshold search needs impostor utterances; set a fixed tau");
    if (!have_validation)
      throw ConfigError("threshold search needs validation utterances");

    // provisional merger of the same kind; LCLR/vote heads reuse weights
    fusion::MergerModel prov_merger;
    TrainedRecognizer prov = rec;
    prov.bank = prov_bank;
    const MergerChoice head_kind = config.merger == MergerChoice::All
                                       ? MergerChoice::WeightedLclr
                                       : config.merger;
    if (head_kind == MergerChoice::Gmm || head_kind == MergerChoice::Svm) {
      std::vector<fusion::ScoreMatrix> prov_matrices;
      std::vector<int> prov_labels;
      for (std::size_t s = 0; s < n_speakers; ++s) {
        for (std::size_t u = 0; u < prov_train[0][s].size(); ++u) {
          std::vector<features::FeatureSequence> feats;
          for (std::size_t b = 0; b < B; ++b)
            feats.push_back(prov_train[b][s][u]);
          prov_matrices.push_back(
              matrix_from_features(prov_bank, rec.enrolled_speakers, feats));
          prov_labels.push_back(rec.enrolled_speakers[s]);
        }
      }
      prov_merger = build_merger(prov, head_kind, prov_matrices, prov_labels);
    } else {
      prov_merger = build_merger(prov, head_kind, {}, {});
    }

    std::vector<double> genuine_lrs;
    for (std::size_t s = 0; s < n_speakers; ++s) {
      for (std::size_t u = 0; u < prov_val[0][s].size(); ++u) {
        std::vector<features::FeatureSequence> feats;
        for (std::size_t b = 0; b < B; ++b) feats.push_back(prov_val[b][s][u]);
        const fusion::ScoreMatrix m =
            matrix_from_features(prov_bank, rec.enrolled_speakers, feats);
        const int id = fusion::identify(prov_merger, m);
        if (id != rec.enrolled_speakers[s]) continue;
        const std::vector<double> fused = fusion::fused_scores(prov_merger, m);
        genuine_lrs.push_back(
            decision::likelihood_ratio(fused, speaker_index(rec.enrolled_speakers, id)).lr);
      }
    }

    // first half of each impostor speaker's utterances; the rest stays
    // untouched for held-out evaluation
    std::map<int, std::vector<int>> imp_utts;
    for (const Utterance& u : split.impostor_test)
      imp_utts[u.speaker_id].push_back(u.utterance_id);
    std::vector<double> impostor_lrs;
    for (auto& [spk, utts] : imp_utts) {
      std::sort(utts.begin(), utts.end());
      const std::size_t half = (utts.size() + 1) / 2;
      for (std::size_t i = 0; i < half; ++i) {
        const AudioClip clip = source.get(spk, utts[i]);
        const std::vector<features::FeatureSequence> feats =
            clip_band_features(config, rec.band_mfcc, clip);
        const fusion::ScoreMatrix m =
            matrix_from_features(prov_bank, rec.enrolled_speakers, feats);
        const int id = fusion::identify(prov_merger, m);
        const std::vector<double> fused = fusion::fused_scores(prov_merger, m);
        impostor_lrs.push_back(
            decision::likelihood_ratio(fused, speaker_index(rec.enrolled_speakers, id)).lr);
      }
    }

    if (genuine_lrs.empty())
      throw TrainError("no correctly identified validation utterances");
    const ga::ThresholdResult tr =
        ga::tune_threshold(genuine_lrs, impostor_lrs, config.ga);
    rec.tau = tr.tau;
    rec.ga_trace = tr.per_generation_best;
  }
  return rec;
}

fusion::ScoreMatrix score_matrix(const TrainedRecognizer& rec,
                                 const corpus::AudioClip& clip) {
  const std::vector<features::FeatureSequence> feats =
      clip_band_features(rec.config, rec.band_mfcc, clip);
  return matrix_from_features(rec.bank, rec.enrolled_speakers, feats);
}

IdResult identify_utterance(const TrainedRecognizer& rec,
                            const corpus::AudioClip& clip) {
  return identify_matrix(rec, score_matrix(rec, clip));
}

corpus::AudioClip apply_noise(const corpus::AudioClip& clip,
                              const NoiseSpec& spec, int speaker_id,
                              int utterance_id) {
  Rng rng = Rng(spec.seed)
                .fork(static_cast<std::uint64_t>(speaker_id))
                .fork(static_cast<std::uint64_t>(utterance_id));
  std::vector<double> noise(clip.samples.size());
  for (double& v : noise) v = rng.gauss();

  const double nyq = clip.sample_rate / 2.0;
  const bool band_limited = spec.high_hz > 0.0 &&
                            !(spec.low_hz <= 0.0 && spec.high_hz >= nyq);
  // SNR is referenced to the signal content of the corrupted band: the
  // noise sits spec.snr_db below (or above) what the clip itself carries
  // there.
  double p_ref = kernels::sumsq(clip.samples.data(), clip.samples.size()) /
                 static_cast<double>(clip.samples.size());
  if (band_limited) {
    const dsp::FilterCoeffs coeffs =
        dsp::design_bandpass(spec.low_hz, spec.high_hz, clip.sample_rate);
    noise = dsp::filtfilt(coeffs, noise);
    const std::vector<double> in_band = dsp::filtfilt(coeffs, clip.samples);
    p_ref = kernels::sumsq(in_band.data(), in_band.size()) /
            static_cast<double>(in_band.size());
  }

  const double p_noise =
      kernels::sumsq(noise.data(), noise.size()) / static_cast<double>(noise.size());
  const double target = p_ref * std::pow(10.0, -spec.snr_db / 10.0);
  const double gain = p_noise > 0.0 ? std::sqrt(target / p_noise) : 0.0;

  corpus::AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    out.samples[i] = clip.samples[i] + gain * noise[i];
    peak = std::max(peak, std::abs(out.samples[i]));
  }
  if (peak > 1.0)
    for (double& v : out.samples) v /= peak;
  return out;
}

std::vector<TrialScore> score_trials(const TrainedRecognizer& rec,
                                     const std::vector<Utterance>& utts,
                                     bool impostor,
                                     const corpus::ClipSource& source,
                                     const std::optional<NoiseSpec>& noise) {
  std::vector<TrialScore> out;
  out.reserve(utts.size());
  for (const Utterance& u : utts) {
    AudioClip clip = source.get(u.speaker_id, u.utterance_id);
    if (noise) clip = apply_noise(clip, *noise, u.speaker_id, u.utterance_id);
    TrialScore t;
    t.utterance = u;
    t.impostor = impostor;
    t.matrix = score_matrix(rec, clip);
    out.push_back(std::move(t));
  }
  return out;
}

EvalReport evaluate(const TrainedRecognizer& rec, const corpus::SplitPlan& split,
                    const corpus::ClipSource& source,
                    const std::optional<NoiseSpec>& noise,
                    const EvalOptions& options) {
  if (split.test.empty() || split.impostor_test.empty())
    throw MetricError("evaluation needs test and impostor utterances");

  EvalReport report;
  report.tau = rec.tau;

  std::size_t correct = 0;
  std::vector<double> genuine_lrs;
  std::size_t genuine_accepted = 0;
  for (const Utterance& u : split.test) {
    try {
      AudioClip clip = source.get(u.speaker_id, u.utterance_id);
      if (noise) clip = apply_noise(clip, *noise, u.speaker_id, u.utterance_id);
      const IdResult r = identify_matrix(rec, score_matrix(rec, clip));
      if (r.speaker_id == u.speaker_id) {
        ++correct;
        genuine_lrs.push_back(r.confidence.lr);
        if (r.accepted) ++genuine_accepted;
      }
    } catch (const SilenceError&) {
      ++report.n_silence_errors;  // counted as a miss
    }
  }
  report.n_test = split.test.size();
  report.identification_rate = 100.0 * correct / split.test.size();

  std::vector<double> impostor_lrs;
  std::size_t impostor_rejected = 0, impostor_total = 0;
  for (const Utterance& u : split.impostor_test) {
    try {
      AudioClip clip = source.get(u.speaker_id, u.utterance_id);
      if (noise) clip = apply_noise(clip, *noise, u.speaker_id, u.utterance_id);
      const IdResult r = identify_matrix(rec, score_matrix(rec, clip));
      impostor_lrs.push_back(r.confidence.lr);
      ++impostor_total;
      if (!r.accepted) ++impostor_rejected;
    } catch (const SilenceError&) {
      ++report.n_silence_errors;
      ++impostor_total;
      ++impostor_rejected;  // nothing to accept
    }
  }
  report.n_impostor = split.impostor_test.size();
  report.true_rejection_rate =
      impostor_total == 0 ? 0.0 : 100.0 * impostor_rejected / impostor_total;
  report.reliability = decision::reliability(report.identification_rate,
                                             report.true_rejection_rate);

  report.genuine_lrs = genuine_lrs;
  report.impostor_lrs = impostor_lrs;
  if (!genuine_lrs.empty() && !impostor_lrs.empty()) {
    report.genuine_acceptance = 100.0 * genuine_accepted / genuine_lrs.size();
    report.impostor_acceptance =
        100.0 * (impostor_total - impostor_rejected) / impostor_total;
    report.decision_gap =
        report.genuine_acceptance - report.impostor_acceptance;

    double lo = genuine_lrs[0], hi = genuine_lrs[0];
    for (double v : genuine_lrs) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : impostor_lrs) { lo = std::min(lo, v); hi = std::max(hi, v); }
    const double pad = 0.01 * (hi - lo) + 1e-9;
    std::vector<double> taus(options.far_frr_points);
    for (int i = 0; i < options.far_frr_points; ++i)
      taus[i] = (lo - pad) + (hi + pad - (lo - pad)) * i /
                                 (options.far_frr_points - 1);
    report.far_frr_curve = decision::far_frr_sweep(genuine_lrs, impostor_lrs, taus);
    report.histograms =
        decision::score_histograms(genuine_lrs, impostor_lrs, options.histogram_bins);
  }
  return report;
}

double head_identification_rate(const fusion::MergerModel& head,
                                const std::vector<TrialScore>& genuine_trials) {
  if (genuine_trials.empty()) throw MetricError("no trials");
  std::size_t correct = 0;
  for (const TrialScore& t : genuine_trials)
    if (fusion::identify(head, t.matrix) == t.utterance.speaker_id) ++correct;
  return 100.0 * correct / genuine_trials.size();
}

}  // namespace sid::recognizer
