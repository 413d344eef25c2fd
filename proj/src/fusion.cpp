#include "sid/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "sid/errors.hpp"

namespace sid::fusion {

std::vector<double> ScoreMatrix::flatten() const {
  return scores.data();
}

void ScoreMatrix::validate() const {
  if (n_bands() < 1) throw ShapeError("score matrix needs at least one band");
  if (n_speakers() < 2) throw ShapeError("score matrix needs at least two speakers");
  if (band_ids.size() != n_bands() || speaker_ids.size() != n_speakers())
    throw ShapeError("score matrix id lists do not match its shape");
  if (!scores.all_finite()) throw ShapeError("non-finite score");
}

BandWeights compute_weights(const std::vector<double>& rates) {
  if (rates.empty()) throw WeightError("no identification rates");
  double total = 0.0;
  for (double r : rates) {
    if (r < 0.0) throw WeightError("negative identification rate");
    total += r;
  }
  if (total <= 0.0) throw WeightError("all identification rates are zero");
  BandWeights w;
  w.w.resize(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) w.w[i] = rates[i] / total;
  return w;
}

std::vector<double> lclr_combine(const ScoreMatrix& matrix,
                                 const BandWeights& weights) {
  if (weights.w.size() != matrix.n_bands())
    throw ShapeError("weight count does not match band count");
  std::vector<double> combined(matrix.n_speakers(), 0.0);
  for (std::size_t b = 0; b < matrix.n_bands(); ++b)
    for (std::size_t s = 0; s < matrix.n_speakers(); ++s)
      combined[s] += weights.w[b] * matrix.scores(b, s);
  return combined;
}

int majority_vote(const std::vector<int>& decisions,
                  const std::vector<int>& ordering) {
  if (decisions.empty()) throw VoteError("empty decision pool");
  if (ordering.size() != decisions.size())
    throw VoteError("priority ordering must cover every classifier");
  std::vector<bool> seen(decisions.size(), false);
  for (int c : ordering) {
    if (c < 0 || c >= static_cast<int>(decisions.size()) || seen[c])
      throw VoteError("priority ordering must list each classifier once");
    seen[c] = true;
  }

  std::map<int, int> counts;
  for (int d : decisions) counts[d]++;
  int best_count = 0;
  for (const auto& [spk, cnt] : counts) best_count = std::max(best_count, cnt);

  // single winner: done
  std::vector<int> tied;
  for (const auto& [spk, cnt] : counts)
    if (cnt == best_count) tied.push_back(spk);
  if (tied.size() == 1) return tied[0];

  // tie: the highest-priority classifier voting for a tied speaker decides
  for (int c : ordering) {
    const int d = decisions[c];
    if (std::find(tied.begin(), tied.end(), d) != tied.end()) return d;
  }
  return tied[0];  // unreachable: every tied speaker has a voter
}

const char* merger_kind_name(MergerKind k) {
  switch (k) {
    case MergerKind::Vote: return "vote";
    case MergerKind::WeightedLclr: return "weighted_lclr";
    case MergerKind::UnweightedLclr: return "unweighted_lclr";
    case MergerKind::Gmm: return "gmm";
    case MergerKind::Svm: return "svm";
  }
  return "?";
}

MergerKind merger_kind_from_name(const std::string& name) {
  if (name == "vote") return MergerKind::Vote;
  if (name == "weighted_lclr") return MergerKind::WeightedLclr;
  if (name == "unweighted_lclr") return MergerKind::UnweightedLclr;
  if (name == "gmm") return MergerKind::Gmm;
  if (name == "svm") return MergerKind::Svm;
  throw ConfigError("unknown merger kind: " + name);
}

MergerModel make_vote_merger(const std::vector<int>& speaker_ids,
                             const std::vector<int>& band_priority) {
  MergerModel m;
  m.kind = MergerKind::Vote;
  m.speaker_ids = speaker_ids;
  m.band_priority = band_priority;
  m.trained = true;
  return m;
}

MergerModel make_lclr_merger(const std::vector<int>& speaker_ids,
                             const BandWeights& weights, bool weighted) {
  MergerModel m;
  m.kind = weighted ? MergerKind::WeightedLclr : MergerKind::UnweightedLclr;
  m.speaker_ids = speaker_ids;
  m.weights = weights;
  m.trained = true;
  return m;
}

namespace {

Matrix stack_flattened(const std::vector<ScoreMatrix>& matrices) {
  if (matrices.empty()) throw FitError("no training score matrices");
  const std::size_t dim = matrices[0].scores.data().size();
  Matrix X(matrices.size(), dim);
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    matrices[i].validate();
    const std::vector<double> v = matrices[i].flatten();
    if (v.size() != dim) throw ShapeError("inconsistent score matrix shapes");
    std::copy(v.begin(), v.end(), X.row(i));
  }
  return X;
}

}  // namespace

MergerModel train_gmm_merger(const std::vector<ScoreMatrix>& train_matrices,
                             const std::vector<int>& speaker_labels,
                             int n_components) {
  if (train_matrices.size() != speaker_labels.size())
    throw FitError("label/matrix count mismatch");
  const Matrix X = stack_flattened(train_matrices);

  MergerModel m;
  m.kind = MergerKind::Gmm;
  m.speaker_ids = train_matrices[0].speaker_ids;

  for (int spk : m.speaker_ids) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < speaker_labels.size(); ++i)
      if (speaker_labels[i] == spk) rows.push_back(i);
    if (rows.size() < static_cast<std::size_t>(n_components))
      throw FitError("speaker " + std::to_string(spk) + " has " +
                     std::to_string(rows.size()) + " score vectors, needs " +
                     std::to_string(n_components));
    Matrix sub(rows.size(), X.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
      std::copy(X.row(rows[r]), X.row(rows[r]) + X.cols(), sub.row(r));
    gmm::GmmTrainConfig cfg;
    cfg.seed = 0x4D475221ULL + static_cast<std::uint64_t>(spk);
    m.speaker_gmms.push_back(
        gmm::fit_em(sub, n_components, CovType::Spherical, cfg).first);
  }
  m.trained = true;
  return m;
}

MergerModel train_svm_merger(const std::vector<ScoreMatrix>& train_matrices,
                             const std::vector<int>& speaker_labels,
                             double C) {
  if (train_matrices.size() != speaker_labels.size())
    throw FitError("label/matrix count mismatch");
  const Matrix X = stack_flattened(train_matrices);

  MergerModel m;
  m.kind = MergerKind::Svm;
  m.speaker_ids = train_matrices[0].speaker_ids;
  m.ovr = svm::train_ovr(X, speaker_labels, C);
  m.trained = true;
  return m;
}

namespace {

int argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

BandWeights uniform_weights(std::size_t n) {
  BandWeights w;
  w.w.assign(n, 1.0 / static_cast<double>(n));
  return w;
}

}  // namespace

std::vector<double> fused_scores(const MergerModel& model,
                                 const ScoreMatrix& matrix) {
  if (!model.trained) throw StateError("merger not trained");
  matrix.validate();
  switch (model.kind) {
    case MergerKind::WeightedLclr:
      return lclr_combine(matrix, model.weights);
    case MergerKind::UnweightedLclr:
    case MergerKind::Vote:
      return lclr_combine(matrix, uniform_weights(matrix.n_bands()));
    case MergerKind::Gmm: {
      const std::vector<double> x = matrix.flatten();
      std::vector<double> out(model.speaker_gmms.size());
      for (std::size_t s = 0; s < model.speaker_gmms.size(); ++s)
        out[s] = model.speaker_gmms[s].score(x);
      return out;
    }
    case MergerKind::Svm:
      return model.ovr.decision_values(matrix.flatten());
  }
  throw StateError("unknown merger kind");
}

int identify(const MergerModel& model, const ScoreMatrix& matrix) {
  if (!model.trained) throw StateError("merger not trained");
  matrix.validate();
  switch (model.kind) {
    case MergerKind::Vote: {
      std::vector<int> decisions(matrix.n_bands());
      for (std::size_t b = 0; b < matrix.n_bands(); ++b)
        decisions[b] = argmax_lowest(
            {matrix.scores.row(b), matrix.scores.row(b) + matrix.n_speakers()});
      const int winner = majority_vote(decisions, model.band_priority);
      return matrix.speaker_ids[winner];
    }
    case MergerKind::Svm:
      return model.ovr.predict(matrix.flatten());
    case MergerKind::WeightedLclr:
    case MergerKind::UnweightedLclr:
    case MergerKind::Gmm: {
      const std::vector<double> scores = fused_scores(model, matrix);
      return model.kind == MergerKind::Gmm
                 ? model.speaker_ids[argmax_lowest(scores)]
                 : matrix.speaker_ids[argmax_lowest(scores)];
    }
  }
  throw StateError("unknown merger kind");
}

int combined_vote(int baseline_decision,
                  const std::vector<int>& subband_decisions,
                  const std::vector<int>& priority_ordering) {
  std::vector<int> pool;
  pool.push_back(baseline_decision);
  pool.insert(pool.end(), subband_decisions.begin(), subband_decisions.end());
  if (pool.size() < 2) return baseline_decision;  // degenerate single voter
  return majority_vote(pool, priority_ordering);
}

void write_scores_csv(const std::string& path,
                      const std::vector<ScoreMatrix>& matrices) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << "utterance,band,speaker,score\n";
  f.precision(17);
  for (std::size_t u = 0; u < matrices.size(); ++u) {
    const ScoreMatrix& m = matrices[u];
    for (std::size_t b = 0; b < m.n_bands(); ++b)
      for (std::size_t s = 0; s < m.n_speakers(); ++s)
        f << u << ',' << m.band_ids[b] << ',' << m.speaker_ids[s] << ','
          << m.scores(b, s) << '\n';
  }
}

}  // namespace sid::fusion
