#include "tubelink/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tubelink/util.hpp"

namespace tubelink {

namespace {

// Draw a unit vector uniformly on the sphere of the first `dim` components.
Vec unit_identity(Rng& rng, int dim) {
  Vec v(dim);
  double n = 0;
  do {
    for (double& x : v) x = rng.gaussian();
    n = norm(v);
  } while (n < 1e-9);
  for (double& x : v) x /= n;
  return v;
}

// Identities redrawn until pairwise |cos| stays small, so scenarios are
// well-posed for matching.
std::vector<Vec> draw_identities(Rng& rng, int count, int dim, double max_abs_cos) {
  std::vector<Vec> ids;
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      Vec cand = unit_identity(rng, dim);
      bool ok = true;
      for (const auto& prev : ids)
        if (std::abs(dot(cand, prev)) > max_abs_cos) {
          ok = false;
          break;
        }
      if (ok) {
        ids.push_back(std::move(cand));
        break;
      }
    }
    if (static_cast<int>(ids.size()) != i + 1)
      throw std::invalid_argument("generate_scenario: cannot draw near-orthogonal identities; increase identity_dim");
  }
  return ids;
}

// Keep the box inside the image by translation, preserving its size.
BBox clamp_box(BBox b, double w, double h) {
  if (b.x1 < 0) { b.x2 -= b.x1; b.x1 = 0; }
  if (b.y1 < 0) { b.y2 -= b.y1; b.y1 = 0; }
  if (b.x2 > w) { b.x1 -= b.x2 - w; b.x2 = w; }
  if (b.y2 > h) { b.y1 -= b.y2 - h; b.y2 = h; }
  return b;
}

// Reflecting walk in [0, limit].
double bounce_pos(double start, double v, double t, double limit) {
  if (limit <= 0) return 0;
  double x = std::fmod(start + v * t, 2 * limit);
  if (x < 0) x += 2 * limit;
  return x > limit ? 2 * limit - x : x;
}

int action_at(const PersonSpec& p, int frame, int no_action) {
  for (const auto& span : p.actions)
    if (frame >= span.start && frame <= span.end) return span.action;
  return no_action;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg) {
  if (cfg.frames < 1 || cfg.persons.empty() || cfg.identity_dim < 1 ||
      cfg.fps_stride < 1 || cfg.dropout < 0 || cfg.dropout > 1)
    throw std::invalid_argument("generate_scenario: invalid config");
  for (const auto& p : cfg.persons)
    if (p.box_w <= 0 || p.box_h <= 0 || p.box_w > cfg.width || p.box_h > cfg.height)
      throw std::invalid_argument("generate_scenario: person box does not fit the image");

  Scenario sc;
  sc.config = cfg;
  const int n = static_cast<int>(cfg.persons.size());
  const int d = cfg.query_dim();

  Rng rng(substream_seed(cfg.seed, "sim"));
  auto identities = draw_identities(rng, n, cfg.identity_dim, 0.3);

  // Fixed confounder direction per action class (including "no action").
  std::vector<Vec> confounders;
  for (int a = 0; a <= cfg.num_actions; ++a)
    confounders.push_back(cfg.confounder_dim > 0 ? unit_identity(rng, cfg.confounder_dim)
                                                 : Vec{});

  // Start positions and teleport targets.
  std::vector<double> sx(n), sy(n);
  for (int i = 0; i < n; ++i) {
    sx[i] = rng.uniform(0, cfg.width - cfg.persons[i].box_w);
    sy[i] = rng.uniform(0, cfg.height - cfg.persons[i].box_h);
  }

  auto make_query = [&](const Vec& identity, int action) {
    Vec q(d, 0.0);
    for (int c = 0; c < cfg.identity_dim; ++c) q[c] = identity[c];
    if (cfg.confounder_dim > 0) {
      const Vec& conf = confounders[action];
      for (int c = 0; c < cfg.confounder_dim; ++c)
        q[cfg.identity_dim + c] = cfg.confounder_scale * conf[c];
    }
    for (double& x : q) x += cfg.noise_sigma * rng.gaussian();
    return q;
  };

  sc.gts.resize(n);
  std::vector<std::vector<BBox>> person_boxes(n, std::vector<BBox>(cfg.frames));
  for (int i = 0; i < n; ++i) {
    const PersonSpec& p = cfg.persons[i];
    sc.gts[i].person_id = i;
    double tx = sx[i], ty = sy[i];  // teleport state
    for (int t = 0; t < cfg.frames; ++t) {
      const double st = static_cast<double>(t) * cfg.fps_stride;  // source time
      double x = sx[i], y = sy[i];
      switch (p.trajectory) {
        case Trajectory::Stationary:
          break;
        case Trajectory::Linear:
          x += p.vx * st;
          y += p.vy * st;
          break;
        case Trajectory::Bounce:
          x = bounce_pos(sx[i], p.vx, st, cfg.width - p.box_w);
          y = bounce_pos(sy[i], p.vy, st, cfg.height - p.box_h);
          break;
        case Trajectory::Teleport:
          if (t > 0 && t % p.teleport_period == 0) {
            tx = rng.uniform(0, cfg.width - p.box_w);
            ty = rng.uniform(0, cfg.height - p.box_h);
          }
          x = tx;
          y = ty;
          break;
      }
      x += cfg.camera_dx * st;
      y += cfg.camera_dy * st;
      BBox box = clamp_box({x, y, x + p.box_w, y + p.box_h}, cfg.width, cfg.height);
      person_boxes[i][t] = box;
      sc.gts[i].entries[t] = {box, action_at(p, t, cfg.no_action_class())};
    }
  }

  for (int t = 0; t < cfg.frames; ++t) {
    for (int i = 0; i < n; ++i) {
      const bool dropped = rng.uniform() < cfg.dropout;
      // Draw the record's randomness regardless of dropout so dropout only
      // removes records without shifting everyone else's noise.
      DetectionRecord r;
      r.frame = t;
      r.box = person_boxes[i][t];
      const double ps = rng.uniform(cfg.true_score_lo, cfg.true_score_hi);
      r.class_scores = {ps, 1.0 - ps};
      r.gt_person = i;
      r.gt_action = sc.gts[i].entries[t].action;
      r.query = make_query(identities[i], r.gt_action);
      if (!dropped) sc.detections.push_back(std::move(r));
    }
    int n_distract = static_cast<int>(cfg.distractor_rate);
    if (rng.uniform() < cfg.distractor_rate - n_distract) ++n_distract;
    for (int k = 0; k < n_distract; ++k) {
      DetectionRecord r;
      r.frame = t;
      const double w = rng.uniform(10, 0.2 * cfg.width);
      const double h = rng.uniform(10, 0.2 * cfg.height);
      const double x = rng.uniform(0, cfg.width - w);
      const double y = rng.uniform(0, cfg.height - h);
      r.box = {x, y, x + w, y + h};
      const double ps = rng.uniform(cfg.distractor_score_lo, cfg.distractor_score_hi);
      r.class_scores = {ps, 1.0 - ps};
      r.gt_person = kNoPerson;
      r.gt_action = cfg.no_action_class();
      r.query = make_query(unit_identity(rng, cfg.identity_dim), r.gt_action);
      sc.detections.push_back(std::move(r));
    }
  }
  return sc;
}

MotionCategory motion_category(const GroundTruthTube& gt, const MotionThresholds& th) {
  if (gt.entries.size() < 2)
    throw std::invalid_argument("motion_category: single-frame tube");
  double sum = 0;
  int steps = 0;
  auto it = gt.entries.begin();
  for (auto next = std::next(it); next != gt.entries.end(); ++it, ++next) {
    const BBox& a = it->second.box;
    const BBox& b = next->second.box;
    const double dx = b.cx() - a.cx(), dy = b.cy() - a.cy();
    sum += std::sqrt(dx * dx + dy * dy) / std::sqrt(a.area());
    ++steps;
  }
  const double delta = sum / steps;
  if (delta < th.small_below) return MotionCategory::Small;
  if (delta < th.medium_below) return MotionCategory::Medium;
  return MotionCategory::Large;
}

std::string to_string(MotionCategory c) {
  switch (c) {
    case MotionCategory::Small: return "S";
    case MotionCategory::Medium: return "M";
    case MotionCategory::Large: return "L";
  }
  return "?";
}

}  // namespace tubelink
