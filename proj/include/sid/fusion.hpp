#ifndef SID_FUSION_HPP
#define SID_FUSION_HPP

#include <string>
#include <vector>

#include "sid/gmm.hpp"
#include "sid/matrix.hpp"
#include "sid/svm.hpp"

namespace sid::fusion {

// Per-band, per-speaker log-likelihoods for one test utterance.
struct ScoreMatrix {
  Matrix scores;  // n_bands x n_speakers
  std::vector<int> band_ids;
  std::vector<int> speaker_ids;

  std::size_t n_bands() const { return scores.rows(); }
  std::size_t n_speakers() const { return scores.cols(); }
  std::vector<double> flatten() const;  // row-major
  void validate() const;
};

struct BandWeights {
  std::vector<double> w;  // non-negative, sums to 1
};

// w_i = IR_i / sum_j IR_j
BandWeights compute_weights(const std::vector<double>& band_identification_rates);

// Per-speaker combined score: sum_i w_i * scores(i, speaker).
std::vector<double> lclr_combine(const ScoreMatrix& matrix,
                                 const BandWeights& weights);

// Majority vote with the published tie rule: among speakers tied on votes,
// the one backed by the highest-priority classifier wins. priority_ordering
// lists classifier indices from highest to lowest priority and must cover
// every classifier.
int majority_vote(const std::vector<int>& per_classifier_decisions,
                  const std::vector<int>& priority_ordering);

enum class MergerKind { Vote, WeightedLclr, UnweightedLclr, Gmm, Svm };

const char* merger_kind_name(MergerKind k);
MergerKind merger_kind_from_name(const std::string& name);

struct MergerModel {
  MergerKind kind = MergerKind::UnweightedLclr;
  std::vector<int> speaker_ids;

  BandWeights weights;                    // weighted LCLR
  std::vector<int> band_priority;        // vote tie ordering, band indices
  std::vector<gmm::GmmModel> speaker_gmms;  // one per speaker
  svm::OvrClassifier ovr;                 // labels are speaker ids

  bool trained = false;
};

MergerModel make_vote_merger(const std::vector<int>& speaker_ids,
                             const std::vector<int>& band_priority);
MergerModel make_lclr_merger(const std::vector<int>& speaker_ids,
                             const BandWeights& weights, bool weighted);

// One spherical GMM per speaker over that speaker's flattened score
// vectors; identification is the arg max of the per-speaker models.
MergerModel train_gmm_merger(const std::vector<ScoreMatrix>& train_matrices,
                             const std::vector<int>& speaker_labels,
                             int n_components = 20);

// One-vs-rest linear SVM over flattened score vectors.
MergerModel train_svm_merger(const std::vector<ScoreMatrix>& train_matrices,
                             const std::vector<int>& speaker_labels,
                             double C = 1.0);

// Final speaker id for one utterance. LCLR arg-max ties go to the lowest
// speaker index.
int identify(const MergerModel& model, const ScoreMatrix& matrix);

// Per-speaker fused scores used for the confidence measure. Vote mergers
// have no scores of their own and fall back to the unweighted combination.
std::vector<double> fused_scores(const MergerModel& model,
                                 const ScoreMatrix& matrix);

// Pools the wide-band decision with the sub-band merger decisions and
// applies the majority vote; ordering indexes the pooled list.
int combined_vote(int baseline_decision,
                  const std::vector<int>& subband_decisions,
                  const std::vector<int>& priority_ordering);

void write_scores_csv(const std::string& path,
                      const std::vector<ScoreMatrix>& matrices);

}  // namespace sid::fusion

#endif  // SID_FUSION_HPP
