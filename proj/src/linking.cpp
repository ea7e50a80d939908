#include "tubelink/linking.hpp"

#include <algorithm>
#include <tuple>

#include "tubelink/jsonl.hpp"
#include "tubelink/kernels.hpp"

namespace tubelink {

std::vector<DetectionRecord> filter_person_queries(
    const std::vector<DetectionRecord>& frame_detections, const LinkConfig& cfg) {
  std::vector<DetectionRecord> kept;
  for (const auto& r : frame_detections) {
    if (cfg.person_class_index >= static_cast<int>(r.class_scores.size()))
      throw TubelinkError(ErrorCode::ConfigError, "person_class_index out of range");
    if (r.class_scores[cfg.person_class_index] >= cfg.tau_p) kept.push_back(r);
  }
  return kept;
}

namespace {

struct Triplet {
  double sim;
  int det;   // index into kept detections
  int cand;  // index into candidate lists
};

// Greedy frame loop shared by both linkers. `similarities(kept, cands)`
// returns a kept x cands score matrix; `matches(s)` decides whether a
// score is good enough to append.
template <typename SimFn, typename MatchFn>
std::vector<TrackList> link_stream(const DetectionStream& stream, const LinkConfig& cfg,
                                   SimFn&& similarities, MatchFn&& matches) {
  std::vector<TrackList> lists;
  for (size_t fi = 0; fi < stream.frames.size(); ++fi) {
    const int t = stream.frames[fi];
    auto kept = filter_person_queries(stream.per_frame[fi], cfg);
    if (kept.empty()) continue;

    std::vector<int> cands;  // indices of lists still open for matching
    for (size_t li = 0; li < lists.size(); ++li) {
      const int last = lists[li].entries.back().frame;
      if (static_cast<long long>(t) - last - 1 <= static_cast<long long>(cfg.max_gap))
        cands.push_back(static_cast<int>(li));
    }

    auto start_new = [&](const DetectionRecord& r) {
      TrackList l;
      l.id = static_cast<int>(lists.size());
      l.entries.push_back({t, r});
      lists.push_back(std::move(l));
    };

    if (cands.empty()) {
      for (const auto& r : kept) start_new(r);
      continue;
    }

    std::vector<const TrackList*> cand_lists;
    for (int li : cands) cand_lists.push_back(&lists[li]);
    Mat s = similarities(kept, cand_lists);

    std::vector<Triplet> triplets;
    triplets.reserve(kept.size() * cands.size());
    for (int i = 0; i < s.rows; ++i)
      for (int j = 0; j < s.cols; ++j) triplets.push_back({s.at(i, j), i, j});
    std::stable_sort(triplets.begin(), triplets.end(), [&](const Triplet& a, const Triplet& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      if (a.det != b.det) return a.det < b.det;
      return cands[a.cand] < cands[b.cand];
    });

    std::vector<char> det_resolved(kept.size(), 0), list_claimed(cands.size(), 0);
    std::vector<int> new_dets;
    for (const auto& tr : triplets) {
      if (det_resolved[tr.det]) continue;
      if (list_claimed[tr.cand]) {
        det_resolved[tr.det] = 1;
        new_dets.push_back(tr.det);
      } else if (matches(tr.sim)) {
        lists[cands[tr.cand]].entries.push_back({t, kept[tr.det]});
        list_claimed[tr.cand] = 1;
        det_resolved[tr.det] = 1;
      } else {
        det_resolved[tr.det] = 1;
        new_dets.push_back(tr.det);
      }
    }
    std::sort(new_dets.begin(), new_dets.end());
    for (int di : new_dets) start_new(kept[di]);
  }

  std::vector<TrackList> out;
  for (auto& l : lists)
    if (static_cast<int>(l.entries.size()) > cfg.tau_k_prime) out.push_back(std::move(l));
  return out;
}

}  // namespace

std::vector<TrackList> qmm_link(const DetectionStream& stream,
                                const EncoderParams& encoder, const LinkConfig& cfg) {
  encoder.check_shapes();
  for (const auto& frame : stream.per_frame)
    for (const auto& r : frame)
      if (static_cast<int>(r.query.size()) != encoder.d)
        throw TubelinkError(ErrorCode::DimensionMismatch,
                            "qmm_link: query dim " + std::to_string(r.query.size()) +
                                " != encoder input dim " + std::to_string(encoder.d));
  auto sims = [&](const std::vector<DetectionRecord>& kept,
                  const std::vector<const TrackList*>& cand_lists) {
    std::vector<Vec> det_q, list_q;
    for (const auto& r : kept) det_q.push_back(r.query);
    for (const auto* l : cand_lists) list_q.push_back(l->entries.back().detection.query);
    auto det_e = kernels::encode_batch(encoder, det_q);
    auto list_e = kernels::encode_batch(encoder, list_q);
    Mat s(static_cast<int>(det_e.size()), static_cast<int>(list_e.size()));
    for (int i = 0; i < s.rows; ++i)
      for (int j = 0; j < s.cols; ++j) {
        const double ni = norm(det_e[i]), nj = norm(list_e[j]);
        s.at(i, j) = (ni == 0 || nj == 0) ? -1.0 : dot(det_e[i], list_e[j]) / (ni * nj);
      }
    return s;
  };
  return link_stream(stream, cfg, sims, [&](double s) { return s > cfg.tau_s; });
}

std::vector<TrackList> iou_link(const DetectionStream& stream, double link_threshold,
                                const LinkConfig& cfg) {
  auto sims = [&](const std::vector<DetectionRecord>& kept,
                  const std::vector<const TrackList*>& cand_lists) {
    Mat s(static_cast<int>(kept.size()), static_cast<int>(cand_lists.size()));
    for (int i = 0; i < s.rows; ++i)
      for (int j = 0; j < s.cols; ++j)
        s.at(i, j) = iou(kept[i].box, cand_lists[j]->entries.back().detection.box);
    return s;
  };
  return link_stream(stream, cfg, sims, [&](double s) { return s >= link_threshold; });
}

}  // namespace tubelink
