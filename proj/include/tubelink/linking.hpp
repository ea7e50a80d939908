#pragma once

#include <limits>
#include <vector>

#include "tubelink/encoder.hpp"
#include "tubelink/types.hpp"

namespace tubelink {

struct LinkConfig {
  double tau_p = 0.9;        // person-score threshold
  double tau_s = 0.5;        // similarity threshold (match requires sim > tau_s)
  int tau_k_prime = 8;       // output keeps lists with length > tau_k_prime
  int person_class_index = 0;
  // A list stays a match candidate while (frame - last frame - 1) <= max_gap.
  int max_gap = std::numeric_limits<int>::max();
};

/// Person-score filter for one frame, order preserved.
std::vector<DetectionRecord> filter_person_queries(
    const std::vector<DetectionRecord>& frame_detections, const LinkConfig& cfg);

/// Query-matching linker: per frame, greedy one-to-one assignment of kept
/// detections to the encoded last element of each active list, in
/// descending cosine similarity. A detection whose best candidate list is
/// already claimed, or whose similarity is not above tau_s, starts a new
/// list. Ties break on (lower detection index, lower list id).
std::vector<TrackList> qmm_link(const DetectionStream& stream,
                                const EncoderParams& encoder,
                                const LinkConfig& cfg);

/// IoU baseline: same greedy frame loop, similarity replaced by IoU with
/// the list's last box, match requires IoU >= link_threshold.
std::vector<TrackList> iou_link(const DetectionStream& stream,
                                double link_threshold, const LinkConfig& cfg);

}  // namespace tubelink
