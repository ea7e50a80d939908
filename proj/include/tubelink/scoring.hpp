#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "tubelink/types.hpp"

namespace tubelink {

/// Per-frame action scores along a track, aligned one-to-one with the
/// track entries. Class C (last index) is "no action".
struct ActionScoreSeq {
  std::vector<std::vector<double>> scores;  // each of length C+1

  int num_classes_with_none() const {
    return scores.empty() ? 0 : static_cast<int>(scores[0].size());
  }
};

struct ScoringConfig {
  int k = 1;       // top-k size per frame
  int tau_k = 8;   // tube score is 0 unless the class appears in > tau_k frames
  bool fill_gaps = false;       // interpolate boxes across gaps in the time set
  bool drop_below_none = false; // drop frames where "no action" outscores the class
};

/// Classes appearing in any frame's top-k. Ties break toward the lower
/// class index.
std::set<int> topk_class_set(const ActionScoreSeq& seq, int k);

/// Positions (indices into the track/seq) where class c is in the top-k.
std::set<int> class_time_set(const ActionScoreSeq& seq, int c, int k);

double tube_score(const ActionScoreSeq& seq, int c, int k, int tau_k);

/// The track's boxes restricted to the given entry positions.
BoxMap tube_boxes(const TrackList& track, const std::set<int>& positions);

std::vector<Tube> build_tubes(const TrackList& track, const ActionScoreSeq& seq,
                              const ScoringConfig& cfg);

/// Per-frame action labels: the overlapped person's GT action, or
/// no_action_class when the track box matches no GT at that frame.
std::vector<int> assign_action_labels(const TrackList& track,
                                      const std::vector<GroundTruthTube>& gts,
                                      double tau_iou, int no_action_class);

/// Sum over frames of -log p(label); score vectors are renormalized to a
/// distribution and probabilities clamped to >= 1e-12.
double action_ce_loss(const ActionScoreSeq& seq, const std::vector<int>& labels);

/// Stand-in action scorer: a softmax distribution peaked at the GT-derived
/// label with Gaussian logit noise. Deterministic per seed.
ActionScoreSeq oracle_scorer(const TrackList& track,
                             const std::vector<GroundTruthTube>& gts,
                             double tau_iou, int num_actions_with_none,
                             double sigma, uint64_t seed, bool one_hot = false);

}  // namespace tubelink
