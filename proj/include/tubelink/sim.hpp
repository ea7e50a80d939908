#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubelink/types.hpp"

namespace tubelink {

enum class Trajectory { Stationary, Linear, Bounce, Teleport };

struct ActionSpan {
  int start = 0, end = 0;  // emitted frame indices, inclusive
  int action = 0;
};

struct PersonSpec {
  double box_w = 40, box_h = 80;
  Trajectory trajectory = Trajectory::Stationary;
  double vx = 0, vy = 0;      // px per source frame (Linear, Bounce)
  int teleport_period = 4;    // frames between jumps (Teleport)
  std::vector<ActionSpan> actions;  // frames outside any span get "no action"
};

struct ScenarioConfig {
  int frames = 32;          // emitted frame count
  double width = 640, height = 480;
  std::vector<PersonSpec> persons;
  double camera_dx = 0, camera_dy = 0;  // global drift, px per source frame
  int fps_stride = 1;       // source frames advanced per emitted frame
  double distractor_rate = 0;  // expected distractors per frame
  int identity_dim = 12;
  int confounder_dim = 4;
  double confounder_scale = 0.5;
  double noise_sigma = 0;
  double dropout = 0;       // per-person per-frame detection dropout
  int num_actions = 4;      // action classes excluding "no action"
  double true_score_lo = 0.8, true_score_hi = 1.0;
  double distractor_score_lo = 0.2, distractor_score_hi = 0.7;
  uint64_t seed = 0;

  int query_dim() const { return identity_dim + confounder_dim; }
  int no_action_class() const { return num_actions; }
};

struct Scenario {
  ScenarioConfig config;
  std::vector<GroundTruthTube> gts;
  std::vector<DetectionRecord> detections;  // sorted by frame
};

Scenario generate_scenario(const ScenarioConfig& cfg);

enum class MotionCategory { Small, Medium, Large };

struct MotionThresholds {
  double small_below = 0.1;
  double medium_below = 0.25;
};

/// Mean per-step center displacement normalized by sqrt(box area).
/// Throws on single-frame tubes.
MotionCategory motion_category(const GroundTruthTube& gt,
                               const MotionThresholds& th = {});

std::string to_string(MotionCategory c);

}  // namespace tubelink
