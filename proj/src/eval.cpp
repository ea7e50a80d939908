#include "tubelink/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tubelink/jsonl.hpp"
#include "tubelink/kernels.hpp"

namespace tubelink {

RecallRow tube_recall(const std::vector<GroundTruthTube>& gts,
                      const std::vector<TrackList>& tracks, double theta,
                      const MotionThresholds& th) {
  RecallRow row;
  row.theta = theta;
  std::vector<BoxMap> gt_boxes, track_boxes;
  for (const auto& g : gts) gt_boxes.push_back(g.boxes());
  for (const auto& t : tracks) track_boxes.push_back(t.boxes());
  Mat overlap = track_boxes.empty()
                    ? Mat()
                    : kernels::tube_iou_matrix(gt_boxes, track_boxes, FrameSet::RestrictToFirst);
  for (size_t gi = 0; gi < gts.size(); ++gi) {
    bool matched = false;
    for (size_t ti = 0; ti < track_boxes.size() && !matched; ++ti)
      matched = overlap.at(static_cast<int>(gi), static_cast<int>(ti)) >= theta;
    const std::string cat =
        gts[gi].entries.size() >= 2 ? to_string(motion_category(gts[gi], th)) : "S";
    auto& [m, n] = row.by_category[cat];
    ++n;
    ++row.total;
    if (matched) {
      ++m;
      ++row.matched;
    }
  }
  return row;
}

std::optional<double> average_precision(std::vector<ScoredPrediction> preds, int n_gt) {
  if (n_gt == 0 && preds.empty()) return std::nullopt;
  if (n_gt == 0) return 0.0;
  if (preds.empty()) return 0.0;
  std::stable_sort(preds.begin(), preds.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  std::vector<double> precision(preds.size());
  int tp = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].is_tp) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Interpolate: precision envelope from the right.
  for (size_t i = preds.size() - 1; i > 0; --i)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i].is_tp) ap += precision[i];
  return ap / static_cast<double>(n_gt);
}

namespace {

// GT instance for one class: a person's frames annotated with that class.
struct ClassInstance {
  BoxMap boxes;
};

std::map<int, std::vector<ClassInstance>> gt_by_class(
    const std::vector<GroundTruthTube>& gts, int no_action_class) {
  std::map<int, std::vector<ClassInstance>> out;
  for (const auto& g : gts) {
    std::map<int, BoxMap> per_class;
    for (const auto& [t, e] : g.entries)
      if (e.action != no_action_class) per_class[e.action].emplace(t, e.box);
    for (auto& [c, boxes] : per_class) out[c].push_back({std::move(boxes)});
  }
  return out;
}

double finalize_map(APReport& r) {
  if (r.per_class.empty()) return 0.0;
  double sum = 0;
  for (const auto& [c, ap] : r.per_class) sum += ap;
  return sum / static_cast<double>(r.per_class.size());
}

}  // namespace

APReport video_map(const std::vector<GroundTruthTube>& gts,
                   const std::vector<Tube>& tubes, double theta, int no_action_class) {
  APReport report;
  report.theta = theta;
  auto gt_classes = gt_by_class(gts, no_action_class);
  for (const auto& [c, instances] : gt_classes) {
    std::vector<const Tube*> preds;
    for (const auto& t : tubes)
      if (t.action == c) preds.push_back(&t);
    std::stable_sort(preds.begin(), preds.end(),
                     [](const Tube* a, const Tube* b) { return a->score > b->score; });
    std::vector<char> gt_used(instances.size(), 0);
    std::vector<ScoredPrediction> scored;
    for (const Tube* t : preds) {
      double best = theta;
      int best_gi = -1;
      for (size_t gi = 0; gi < instances.size(); ++gi) {
        if (gt_used[gi]) continue;
        const double v = tube_iou_3d(instances[gi].boxes, t->boxes, FrameSet::Union);
        if (v >= best) {
          best = v;
          best_gi = static_cast<int>(gi);
        }
      }
      if (best_gi >= 0) {
        gt_used[best_gi] = 1;
        scored.push_back({t->score, true});
      } else {
        scored.push_back({t->score, false});
      }
    }
    auto ap = average_precision(scored, static_cast<int>(instances.size()));
    report.per_class[c] = ap.value_or(0.0);
  }
  report.map = finalize_map(report);
  return report;
}

APReport frame_map(const std::vector<GroundTruthTube>& gts,
                   const std::vector<Tube>& tubes, double theta,
                   const std::set<int>& keyframes, int no_action_class) {
  APReport report;
  report.theta = theta;
  std::map<int, int> gt_count;
  // class -> keyframe -> GT boxes
  std::map<int, std::map<int, std::vector<BBox>>> gt_boxes;
  for (const auto& g : gts)
    for (const auto& [t, e] : g.entries) {
      if (e.action == no_action_class || !keyframes.count(t)) continue;
      gt_boxes[e.action][t].push_back(e.box);
      ++gt_count[e.action];
    }
  for (const auto& [c, per_frame_gt] : gt_boxes) {
    struct Det {
      double score;
      int frame;
      BBox box;
    };
    std::vector<Det> dets;
    for (const auto& t : tubes) {
      if (t.action != c) continue;
      for (const auto& [frame, box] : t.boxes)
        if (keyframes.count(frame)) dets.push_back({t.score, frame, box});
    }
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Det& a, const Det& b) { return a.score > b.score; });
    std::map<int, std::vector<char>> used;
    for (const auto& [frame, boxes] : per_frame_gt)
      used[frame].assign(boxes.size(), 0);
    std::vector<ScoredPrediction> scored;
    for (const auto& d : dets) {
      double best = theta;
      int best_gi = -1;
      auto it = per_frame_gt.find(d.frame);
      if (it != per_frame_gt.end()) {
        for (size_t gi = 0; gi < it->second.size(); ++gi) {
          if (used[d.frame][gi]) continue;
          const double v = iou(d.box, it->second[gi]);
          if (v >= best) {
            best = v;
            best_gi = static_cast<int>(gi);
          }
        }
      }
      if (best_gi >= 0) {
        used[d.frame][best_gi] = 1;
        scored.push_back({d.score, true});
      } else {
        scored.push_back({d.score, false});
      }
    }
    auto ap = average_precision(scored, gt_count[c]);
    report.per_class[c] = ap.value_or(0.0);
  }
  report.map = finalize_map(report);
  return report;
}

RecallReport compare_linkers(const Scenario& scenario, const EncoderParams& encoder,
                             const LinkConfig& qmm_cfg,
                             const std::vector<double>& iou_thresholds,
                             double theta, const MotionThresholds& th) {
  RecallReport report;
  auto stream = group_by_frame(scenario.detections);
  for (double lt : iou_thresholds) {
    LinkConfig iou_cfg = qmm_cfg;
    iou_cfg.max_gap = 0;  // IoU baselines terminate on a missed frame
    auto tracks = iou_link(stream, lt, iou_cfg);
    RecallRow row = tube_recall(scenario.gts, tracks, theta, th);
    std::ostringstream name;
    name << "iou>=" << lt;
    row.linker = name.str();
    report.rows.push_back(std::move(row));
  }
  auto tracks = qmm_link(stream, encoder, qmm_cfg);
  RecallRow row = tube_recall(scenario.gts, tracks, theta, th);
  row.linker = "qmm";
  report.rows.push_back(std::move(row));
  return report;
}

std::string recall_report_json(const RecallReport& r) {
  std::string s = "{\"rows\":[";
  for (size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    if (i) s += ',';
    s += "{\"linker\":\"" + row.linker + "\",\"theta\":" + format_double(row.theta) +
         ",\"matched\":" + std::to_string(row.matched) +
         ",\"total\":" + std::to_string(row.total) +
         ",\"recall\":" + format_double(row.recall()) + ",\"by_category\":{";
    bool first = true;
    for (const auto& [cat, mn] : row.by_category) {
      if (!first) s += ',';
      first = false;
      s += "\"" + cat + "\":{\"matched\":" + std::to_string(mn.first) +
           ",\"total\":" + std::to_string(mn.second) +
           ",\"recall\":" + format_double(row.recall(cat)) + "}";
    }
    s += "}}";
  }
  s += "]}";
  return s;
}

std::string recall_report_text(const RecallReport& r) {
  std::ostringstream os;
  os << "linker          theta   All      L        M        S\n";
  for (const auto& row : r.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-15s %-7.2f %-8.4f %-8.4f %-8.4f %-8.4f\n",
                  row.linker.c_str(), row.theta, row.recall(), row.recall("L"),
                  row.recall("M"), row.recall("S"));
    os << buf;
  }
  return os.str();
}

std::string ap_report_json(const APReport& r, const std::string& metric) {
  std::string s = "{\"metric\":\"" + metric + "\",\"theta\":" + format_double(r.theta) +
                  ",\"map\":" + format_double(r.map) + ",\"per_class\":{";
  bool first = true;
  for (const auto& [c, ap] : r.per_class) {
    if (!first) s += ',';
    first = false;
    s += "\"" + std::to_string(c) + "\":" + format_double(ap);
  }
  s += "}}";
  return s;
}

std::string ap_report_text(const APReport& r, const std::string& metric) {
  std::ostringstream os;
  os << metric << " @ " << r.theta << " = " << r.map << "\n";
  for (const auto& [c, ap] : r.per_class) os << "  class " << c << ": " << ap << "\n";
  return os.str();
}

}  // namespace tubelink
