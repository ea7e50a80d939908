#include "tubelink/bbox.hpp"

#include <algorithm>
#include <set>

namespace tubelink {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

BBox interpolate_box(const BBox& a, const BBox& b, double alpha) {
  const double w = 1.0 - alpha;
  return {w * a.x1 + alpha * b.x1, w * a.y1 + alpha * b.y1,
          w * a.x2 + alpha * b.x2, w * a.y2 + alpha * b.y2};
}

double tube_iou_3d(const BoxMap& a, const BoxMap& b, FrameSet mode) {
  std::set<int> frames;
  for (const auto& [t, _] : a) frames.insert(t);
  if (mode == FrameSet::Union)
    for (const auto& [t, _] : b) frames.insert(t);
  if (frames.empty()) throw std::invalid_argument("tube_iou_3d: no evaluable frames");
  double sum = 0;
  for (int t : frames) {
    auto ia = a.find(t);
    auto ib = b.find(t);
    if (ia != a.end() && ib != b.end()) sum += iou(ia->second, ib->second);
  }
  return sum / static_cast<double>(frames.size());
}

}  // namespace tubelink
