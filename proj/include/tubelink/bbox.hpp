#pragma once

#include <map>
#include <stdexcept>

namespace tubelink {

/// Axis-aligned box in continuous image coordinates, x1<x2 and y1<y2.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
  bool valid() const { return x1 < x2 && y1 < y2; }

  bool operator==(const BBox&) const = default;
};

using BoxMap = std::map<int, BBox>;  // frame -> box, ordered

double iou(const BBox& a, const BBox& b);

BBox interpolate_box(const BBox& a, const BBox& b, double alpha);

enum class FrameSet { Union, RestrictToFirst };

/// Mean per-frame IoU over the chosen frame set; a frame missing from
/// either tube contributes 0. RestrictToFirst averages only over frames
/// of `a`. Throws if the frame set is empty.
double tube_iou_3d(const BoxMap& a, const BoxMap& b, FrameSet mode);

}  // namespace tubelink
