// Command-line front end: synth, train, identify, evaluate, tune.
// Exit codes: 0 success (or accept), 1 reject, 2 error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "sid/config.hpp"
#include "sid/corpus.hpp"
#include "sid/errors.hpp"
#include "sid/report.hpp"
#include "sid/store.hpp"

namespace fs = std::filesystem;
using namespace sid;

namespace {

corpus::Manifest load_manifest_resolved(const std::string& path) {
  corpus::Manifest m = corpus::load_manifest_csv(path);
  const fs::path base = fs::path(path).parent_path();
  for (corpus::ManifestEntry& e : m.entries) {
    if (!e.path.empty() && fs::path(e.path).is_relative())
      e.path = (base / e.path).string();
  }
  return m;
}

struct NoiseFlags {
  std::string band;
  std::optional<double> snr_db;
  std::optional<std::uint64_t> seed;

  std::optional<recognizer::NoiseSpec> resolve(
      const std::optional<recognizer::NoiseSpec>& from_config) const {
    std::optional<recognizer::NoiseSpec> spec = from_config;
    if (snr_db) {
      if (!spec) spec.emplace();
      spec->snr_db = *snr_db;
    }
    if (!band.empty()) {
      if (!spec) spec.emplace();
      const auto [lo, hi] = config::parse_band_range(band);
      spec->low_hz = lo;
      spec->high_hz = hi;
    }
    if (seed && spec) spec->seed = *seed;
    return spec;
  }
};

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
  const config::RunConfig cfg = config::RunConfig::load(config_path);
  if (!cfg.corpus_seed)
    throw ConfigError("corpus.seed is mandatory for synthesis");

  corpus::SyntheticCorpus synth(cfg.speakers, cfg.utterances, cfg.duration_s,
                                *cfg.corpus_seed, cfg.enrolled);
  fs::create_directories(out_dir);

  corpus::Manifest manifest = synth.manifest();
  for (corpus::ManifestEntry& e : manifest.entries) {
    char name[64];
    std::snprintf(name, sizeof(name), "s%02d_u%02d.wav", e.speaker_id,
                  e.utterance_id);
    e.path = name;
    corpus::write_wav((fs::path(out_dir) / name).string(),
                      synth.clip(e.speaker_id, e.utterance_id));
  }
  corpus::write_manifest_csv((fs::path(out_dir) / "manifest.csv").string(),
                             manifest);
  std::cout << "wrote " << manifest.entries.size() << " clips and manifest.csv to "
            << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& manifest_path,
              const std::string& out_dir) {
  const config::RunConfig cfg = config::RunConfig::load(config_path);
  const corpus::Manifest manifest = load_manifest_resolved(manifest_path);
  const corpus::SplitPlan split =
      corpus::split_manifest(manifest, cfg.train_per_speaker, cfg.enrolled);
  const corpus::WavCorpus wavs(manifest);
  const corpus::WavClipSource source(wavs);

  const recognizer::TrainedRecognizer rec =
      recognizer::train(cfg.recognizer_config(), split, source);

  std::cout << "per-band validation identification rates ("
            << rec.validation_irs.size() << " band"
            << (rec.validation_irs.size() == 1 ? "" : "s") << "):\n";
  for (std::size_t b = 0; b < rec.validation_irs.size(); ++b) {
    const dsp::Band& band = rec.config.band_plan.bands[b];
    std::printf("  band %zu  %6.0f-%.0f Hz  IR %.1f%%  weight %.4f\n", b,
                band.low_hz, band.high_hz, rec.validation_irs[b],
                rec.weights.w[b]);
  }
  std::printf("tau = %.6g\n", rec.tau);

  store::save_recognizer(out_dir, rec);
  std::cout << "model store written to " << out_dir << "\n";
  return 0;
}

int cmd_identify(const std::string& store_dir, const std::string& wav_path) {
  const recognizer::TrainedRecognizer rec = store::load_recognizer(store_dir);
  const corpus::AudioClip clip = corpus::load_wav(wav_path);
  const recognizer::IdResult r = recognizer::identify_utterance(rec, clip);
  std::printf("speaker_id=%d lr=%.9g decision=%s\n", r.speaker_id,
              r.confidence.lr, r.accepted ? "accepted" : "rejected");
  return r.accepted ? 0 : 1;
}

int cmd_evaluate(const std::vector<std::string>& store_dirs,
                 const std::string& manifest_path, const std::string& out_dir,
                 const NoiseFlags& noise_flags,
                 const std::string& config_path) {
  std::optional<recognizer::NoiseSpec> cfg_noise;
  int far_frr_points = 200, histogram_bins = 30;
  if (!config_path.empty()) {
    const config::RunConfig cfg = config::RunConfig::load(config_path);
    cfg_noise = cfg.noise;
    far_frr_points = cfg.far_frr_points;
    histogram_bins = cfg.histogram_bins;
  }
  const std::optional<recognizer::NoiseSpec> noise =
      noise_flags.resolve(cfg_noise);

  const corpus::Manifest manifest = load_manifest_resolved(manifest_path);
  const corpus::WavCorpus wavs(manifest);
  const corpus::WavClipSource source(wavs);

  recognizer::EvalOptions opts;
  opts.far_frr_points = far_frr_points;
  opts.histogram_bins = histogram_bins;

  std::vector<report::ComparisonRow> rows;
  // trial decisions per store and head, for the combined vote
  struct HeadDecisions {
    std::string name;
    fusion::MergerKind kind;
    bool single_band;
    std::vector<int> genuine;   // decisions on test trials
    std::vector<int> impostor;
  };
  std::vector<HeadDecisions> all_heads;
  std::vector<int> genuine_truth;

  for (const std::string& dir : store_dirs) {
    const recognizer::TrainedRecognizer rec = store::load_recognizer(dir);
    const corpus::SplitPlan split = corpus::split_manifest(
        manifest, rec.split_train_per_speaker,
        static_cast<int>(rec.enrolled_speakers.size()));

    const recognizer::EvalReport report =
        recognizer::evaluate(rec, split, source, noise, opts);
    const std::string base = fs::path(dir).filename().string();
    report::write_eval_report(
        store_dirs.size() == 1 ? out_dir
                               : (fs::path(out_dir) / base).string(),
        report, rec.ga_trace);

    std::printf("%s: IR %.1f%%  TRR %.1f%%  reliability %.1f  gap %.1f\n",
                base.c_str(), report.identification_rate,
                report.true_rejection_rate, report.reliability,
                report.decision_gap);

    // per-head identification rates over shared trials
    std::vector<recognizer::TrialScore> genuine_trials =
        recognizer::score_trials(rec, split.test, false, source, noise);
    std::vector<recognizer::TrialScore> impostor_trials =
        recognizer::score_trials(rec, split.impostor_test, true, source, noise);
    if (genuine_truth.empty())
      for (const auto& t : genuine_trials)
        genuine_truth.push_back(t.utterance.speaker_id);

    std::vector<const fusion::MergerModel*> heads = {&rec.merger};
    for (const fusion::MergerModel& m : rec.extra_mergers) heads.push_back(&m);
    for (const fusion::MergerModel* head : heads) {
      HeadDecisions hd;
      hd.kind = head->kind;
      hd.single_band = rec.config.band_plan.size() == 1;
      hd.name = base + (rec.config.band_plan.size() == 1
                            ? ""
                            : std::string("/") + fusion::merger_kind_name(head->kind));
      report::ComparisonRow row;
      row.name = hd.name;
      std::size_t correct = 0;
      for (const auto& t : genuine_trials) {
        const int id = fusion::identify(*head, t.matrix);
        hd.genuine.push_back(id);
        if (id == t.utterance.speaker_id) ++correct;
      }
      for (const auto& t : impostor_trials)
        hd.impostor.push_back(fusion::identify(*head, t.matrix));
      row.identification_rate = 100.0 * correct / genuine_trials.size();
      row.true_rejection_rate = report.true_rejection_rate;
      row.reliability = decision::reliability(row.identification_rate,
                                              report.true_rejection_rate);
      row.decision_gap = report.decision_gap;
      rows.push_back(row);
      all_heads.push_back(std::move(hd));
    }
  }

  // classical + sub-band majority vote when both kinds of store are present
  const HeadDecisions* baseline = nullptr;
  std::vector<const HeadDecisions*> linear;
  for (const HeadDecisions& hd : all_heads) {
    if (hd.single_band && !baseline) baseline = &hd;
    if (!hd.single_band && (hd.kind == fusion::MergerKind::WeightedLclr ||
                            hd.kind == fusion::MergerKind::UnweightedLclr ||
                            hd.kind == fusion::MergerKind::Vote))
      linear.push_back(&hd);
  }
  if (baseline && !linear.empty()) {
    // priority: weighted, unweighted, vote, then the baseline
    std::stable_sort(linear.begin(), linear.end(),
                     [](const HeadDecisions* a, const HeadDecisions* b) {
                       auto rank = [](fusion::MergerKind k) {
                         if (k == fusion::MergerKind::WeightedLclr) return 0;
                         if (k == fusion::MergerKind::UnweightedLclr) return 1;
                         return 2;
                       };
                       return rank(a->kind) < rank(b->kind);
                     });
    std::vector<int> ordering;
    for (std::size_t i = 0; i < linear.size(); ++i)
      ordering.push_back(static_cast<int>(i + 1));
    ordering.push_back(0);

    std::size_t correct = 0;
    for (std::size_t t = 0; t < genuine_truth.size(); ++t) {
      std::vector<int> subs;
      for (const HeadDecisions* hd : linear) subs.push_back(hd->genuine[t]);
      if (fusion::combined_vote(baseline->genuine[t], subs, ordering) ==
          genuine_truth[t])
        ++correct;
    }
    report::ComparisonRow row;
    row.name = "combined_vote";
    row.identification_rate =
        genuine_truth.empty() ? 0.0 : 100.0 * correct / genuine_truth.size();
    rows.push_back(row);
    std::printf("combined_vote: IR %.1f%%\n", row.identification_rate);
  }

  fs::create_directories(out_dir);
  report::write_comparison_csv((fs::path(out_dir) / "compare.csv").string(),
                               rows);
  std::cout << "reports written to " << out_dir << "\n";
  return 0;
}

int cmd_tune(const std::string& store_dir, const std::string& manifest_path,
             const std::string& target, const std::string& out_dir) {
  recognizer::TrainedRecognizer rec = store::load_recognizer(store_dir);
  const corpus::Manifest manifest = load_manifest_resolved(manifest_path);
  const corpus::SplitPlan split = corpus::split_manifest(
      manifest, rec.split_train_per_speaker,
      static_cast<int>(rec.enrolled_speakers.size()));
  const corpus::WavCorpus wavs(manifest);
  const corpus::WavClipSource source(wavs);
  const std::string dest = out_dir.empty() ? store_dir : out_dir;

  if (target == "threshold") {
    if (split.impostor_test.empty())
      throw ConfigError("threshold tuning needs impostor utterances");
    std::vector<double> genuine, impostor;
    for (const corpus::Utterance& u : split.test) {
      const recognizer::IdResult r = recognizer::identify_utterance(
          rec, source.get(u.speaker_id, u.utterance_id));
      if (r.speaker_id == u.speaker_id) genuine.push_back(r.confidence.lr);
    }
    for (const corpus::Utterance& u : split.impostor_test) {
      const recognizer::IdResult r = recognizer::identify_utterance(
          rec, source.get(u.speaker_id, u.utterance_id));
      impostor.push_back(r.confidence.lr);
    }
    if (genuine.empty()) throw TrainError("no correctly identified test utterances");
    const ga::ThresholdResult tr =
        ga::tune_threshold(genuine, impostor, rec.config.ga);
    std::printf("tau: %.9g -> %.9g (gap %.2f)\n", rec.tau, tr.tau, tr.fitness);
    rec.tau = tr.tau;
    rec.ga_trace = tr.per_generation_best;
  } else if (target == "architecture") {
    // GA over (states, mixtures) per band on a train/validation sub-split,
    // then retrain the bank with the tuned sizes.
    recognizer::RecognizerConfig cfg = rec.config;
    const std::vector<ga::GeneSpec> genes = {{1, 8, true}, {1, 32, true}};
    for (std::size_t b = 0; b < cfg.band_plan.size(); ++b) {
      const std::size_t n_speakers = rec.enrolled_speakers.size();
      std::vector<std::vector<Matrix>> seqs(n_speakers);
      for (const corpus::Utterance& u : split.train) {
        const auto it = std::find(rec.enrolled_speakers.begin(),
                                  rec.enrolled_speakers.end(), u.speaker_id);
        if (it == rec.enrolled_speakers.end()) continue;
        const std::size_t si = it - rec.enrolled_speakers.begin();
        const corpus::AudioClip clip = source.get(u.speaker_id, u.utterance_id);
        const dsp::AudioClip emphasized =
            dsp::pre_emphasize(clip, cfg.pre_emphasis_alpha);
        const auto [start, end] = dsp::detect_endpoints(emphasized, cfg.endpoint);
        dsp::SubbandSet bands = dsp::decompose_subbands(emphasized, cfg.band_plan);
        corpus::AudioClip& band = bands.band_signals[b];
        band.samples = std::vector<double>(band.samples.begin() + start,
                                           band.samples.begin() + end);
        const dsp::FramedSignal framed =
            dsp::frame_and_window(band, cfg.frame_ms, cfg.hop_ms);
        features::FeatureSequence f =
            features::compute_mfcc(framed, rec.band_mfcc[b]);
        seqs[si].push_back(
            features::append_deltas(f, rec.band_mfcc[b].delta_window));
      }

      // last quarter of each speaker's utterances validates
      ga::BandData data;
      data.train.resize(n_speakers);
      data.validation.resize(n_speakers);
      for (std::size_t s = 0; s < n_speakers; ++s) {
        const std::size_t n = seqs[s].size();
        const std::size_t n_val = n >= 2 ? std::max<std::size_t>(1, n / 4) : 0;
        for (std::size_t u = 0; u < n; ++u) {
          if (u < n - n_val)
            data.train[s].push_back(std::move(seqs[s][u]));
          else
            data.validation[s].push_back(std::move(seqs[s][u]));
        }
      }
      const ga::GaResult r = ga::run_ga(
          [&](const ga::Chromosome& c) {
            return ga::architecture_fitness(static_cast<int>(c[0]),
                                            static_cast<int>(c[1]), data);
          },
          genes, cfg.ga);
      std::printf("band %zu: states %d mixtures %d (validation IR %.1f%%)\n", b,
                  static_cast<int>(r.best[0]), static_cast<int>(r.best[1]),
                  r.best_fitness);
      cfg.band_models[b].n_states = static_cast<int>(r.best[0]);
      cfg.band_models[b].n_mix = static_cast<int>(r.best[1]);
    }
    recognizer::RecognizerConfig retrain_cfg = cfg;
    retrain_cfg.tau_from_ga = false;
    retrain_cfg.fixed_tau = rec.tau;
    recognizer::TrainedRecognizer tuned =
        recognizer::train(retrain_cfg, split, source);
    tuned.ga_trace = rec.ga_trace;
    rec = std::move(tuned);
  } else {
    throw ConfigError("tune target must be threshold or architecture");
  }

  store::save_recognizer(dest, rec);
  std::ofstream note(fs::path(dest) / "provenance.txt", std::ios::app);
  note << "tuned " << target << " from manifest " << manifest_path << "\n";
  std::cout << "updated store written to " << dest << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-band speaker identification toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path, wav_path, target;
  std::vector<std::string> store_dirs;
  NoiseFlags noise;
  double noise_snr = 0.0;
  std::uint64_t noise_seed = 0;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--config", config_path, "experiment config")->required();
  synth->add_option("--out", out_dir, "output directory")->required();

  CLI::App* train = app.add_subcommand("train", "train a recognizer");
  train->add_option("--config", config_path, "experiment config")->required();
  train->add_option("--manifest", manifest_path, "corpus manifest CSV")->required();
  train->add_option("--out", out_dir, "model store directory")->required();

  CLI::App* identify = app.add_subcommand("identify", "identify one utterance");
  identify->add_option("--store", store_dirs, "model store")->required();
  identify->add_option("--wav", wav_path, "input WAV file")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "run the evaluation harness");
  evaluate->add_option("--store", store_dirs, "model store (repeat to compare)")
      ->required();
  evaluate->add_option("--manifest", manifest_path, "corpus manifest CSV")->required();
  evaluate->add_option("--out", out_dir, "report directory")->required();
  evaluate->add_option("--config", config_path, "optional config for noise/report settings");
  evaluate->add_option("--noise-band", noise.band, "noise band LOW-HIGH or full");
  CLI::Option* snr_opt =
      evaluate->add_option("--noise-snr-db", noise_snr, "noise SNR in dB");
  CLI::Option* seed_opt =
      evaluate->add_option("--seed", noise_seed, "noise seed");

  CLI::App* tune = app.add_subcommand("tune", "tune threshold or architecture");
  tune->add_option("--store", store_dirs, "model store")->required();
  tune->add_option("--manifest", manifest_path, "corpus manifest CSV")->required();
  tune->add_option("--target", target, "threshold | architecture")->required();
  tune->add_option("--out", out_dir, "write the updated store here (default: in place)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (snr_opt->count() > 0) noise.snr_db = noise_snr;
    if (seed_opt->count() > 0) noise.seed = noise_seed;
    if (synth->parsed()) return cmd_synth(config_path, out_dir);
    if (train->parsed()) return cmd_train(config_path, manifest_path, out_dir);
    if (identify->parsed()) return cmd_identify(store_dirs.at(0), wav_path);
    if (evaluate->parsed())
      return cmd_evaluate(store_dirs, manifest_path, out_dir, noise, config_path);
    if (tune->parsed())
      return cmd_tune(store_dirs.at(0), manifest_path, target, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
