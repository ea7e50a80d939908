#pragma once

#include <map>
#include <vector>

#include "tubelink/bbox.hpp"

namespace tubelink {

inline constexpr int kNoPerson = -1;

/// One detected query at one frame.
struct DetectionRecord {
  int frame = 0;
  BBox box;
  std::vector<double> class_scores;  // object classes, fixed C+1 per stream
  std::vector<double> query;         // fixed dimension d per stream
  int gt_person = kNoPerson;
  int gt_action = -1;  // -1 when unknown
};

/// Per-frame detections, sorted by frame, frames strictly increasing.
struct DetectionStream {
  std::vector<int> frames;
  std::vector<std::vector<DetectionRecord>> per_frame;  // aligned with frames
};

struct GroundTruthEntry {
  BBox box;
  int action = 0;
};

struct GroundTruthTube {
  int person_id = 0;
  std::map<int, GroundTruthEntry> entries;  // frame -> (box, action)

  BoxMap boxes() const {
    BoxMap m;
    for (const auto& [t, e] : entries) m.emplace(t, e.box);
    return m;
  }
};

struct Tube {
  int person_id = 0;
  int action = 0;
  double score = 0;
  BoxMap boxes;
};

struct TrackEntry {
  int frame = 0;
  DetectionRecord detection;
};

struct TrackList {
  int id = 0;
  std::vector<TrackEntry> entries;  // frames strictly increasing

  BoxMap boxes() const {
    BoxMap m;
    for (const auto& e : entries) m.emplace(e.frame, e.detection.box);
    return m;
  }
};

}  // namespace tubelink
