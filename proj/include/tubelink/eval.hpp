#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tubelink/linking.hpp"
#include "tubelink/sim.hpp"
#include "tubelink/types.hpp"

namespace tubelink {

struct RecallRow {
  std::string linker;     // e.g. "qmm" or "iou>=0.50"
  double theta = 0;       // 3D-IoU threshold
  int matched = 0, total = 0;
  std::map<std::string, std::pair<int, int>> by_category;  // S/M/L -> (matched, total)

  double recall() const { return total ? static_cast<double>(matched) / total : 0.0; }
  double recall(const std::string& cat) const {
    auto it = by_category.find(cat);
    if (it == by_category.end() || it->second.second == 0) return 0.0;
    return static_cast<double>(it->second.first) / it->second.second;
  }
};

struct RecallReport {
  std::vector<RecallRow> rows;
};

struct APReport {
  std::map<int, double> per_class;  // classes with GT only
  double map = 0;
  double theta = 0;
};

/// Recall of predicted tracks against GT tubes at GT-restricted 3D IoU.
/// Many-to-one: one prediction may match several GT tubes.
RecallRow tube_recall(const std::vector<GroundTruthTube>& gts,
                      const std::vector<TrackList>& tracks, double theta,
                      const MotionThresholds& th = {});

struct ScoredPrediction {
  double score = 0;
  bool is_tp = false;
};

/// All-point interpolated AP over score-sorted predictions.
/// Returns nullopt when there is nothing to evaluate (n_gt == 0, no preds).
std::optional<double> average_precision(std::vector<ScoredPrediction> preds, int n_gt);

/// v-mAP: per class, greedy one-to-one matching of tubes to per-class GT
/// sub-tubes by descending score at union-frame 3D IoU >= theta.
APReport video_map(const std::vector<GroundTruthTube>& gts,
                   const std::vector<Tube>& tubes, double theta, int no_action_class);

/// frame-mAP on the given keyframes at 2D IoU >= theta.
APReport frame_map(const std::vector<GroundTruthTube>& gts,
                   const std::vector<Tube>& tubes, double theta,
                   const std::set<int>& keyframes, int no_action_class);

/// QMM vs IoU-linking recall table on one scenario's stream: one row per
/// IoU link threshold plus one QMM row, all at 3D-IoU threshold theta.
RecallReport compare_linkers(const Scenario& scenario, const EncoderParams& encoder,
                             const LinkConfig& qmm_cfg,
                             const std::vector<double>& iou_thresholds,
                             double theta, const MotionThresholds& th = {});

std::string recall_report_json(const RecallReport& r);
std::string recall_report_text(const RecallReport& r);
std::string ap_report_json(const APReport& r, const std::string& metric);
std::string ap_report_text(const APReport& r, const std::string& metric);

}  // namespace tubelink
