#include <doctest.h>

#include <set>

#include "tubelink/bbox.hpp"
#include "tubelink/util.hpp"

using namespace tubelink;

namespace {

BoxMap random_tube(Rng& rng, int max_frames) {
  BoxMap m;
  const int n = rng.uniform_int(1, max_frames);
  for (int i = 0; i < n; ++i) {
    const int f = rng.uniform_int(0, 2 * max_frames);
    const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
    m[f] = {x, y, x + rng.uniform(1, 50), y + rng.uniform(1, 50)};
  }
  return m;
}

// Independent accumulation over the union of frame indices.
double tube_iou_3d_bruteforce(const BoxMap& a, const BoxMap& b) {
  std::set<int> frames;
  for (const auto& [t, _] : a) frames.insert(t);
  for (const auto& [t, _] : b) frames.insert(t);
  double sum = 0;
  for (int t : frames) {
    if (a.count(t) && b.count(t)) sum += iou(a.at(t), b.at(t));
  }
  return sum / frames.size();
}

}  // namespace

TEST_CASE("iou basic cases") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == doctest::Approx(1.0));
  CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(1.0 / 3));
}

TEST_CASE("iou properties") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
    BBox a{x, y, x + rng.uniform(1, 30), y + rng.uniform(1, 30)};
    x = rng.uniform(0, 50);
    y = rng.uniform(0, 50);
    BBox b{x, y, x + rng.uniform(1, 30), y + rng.uniform(1, 30)};
    const double v = iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(b, a) == v);
    CHECK(iou(a, a) == 1.0);
  }
}

TEST_CASE("interpolate_box endpoints and midpoint") {
  BBox a{0, 0, 10, 10}, b{10, 10, 20, 20};
  CHECK(interpolate_box(a, b, 0) == a);
  CHECK(interpolate_box(a, b, 1) == b);
  CHECK(interpolate_box(a, b, 0.5) == BBox{5, 5, 15, 15});
}

TEST_CASE("interpolate_box preserves validity") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
    BBox a{x, y, x + rng.uniform(1, 30), y + rng.uniform(1, 30)};
    x = rng.uniform(0, 50);
    y = rng.uniform(0, 50);
    BBox b{x, y, x + rng.uniform(1, 30), y + rng.uniform(1, 30)};
    BBox c = interpolate_box(a, b, rng.uniform());
    CHECK(c.valid());
  }
}

TEST_CASE("tube_iou_3d analytic cases") {
  BoxMap a, b;
  for (int t = 0; t < 10; ++t) a[t] = {0, 0, 10, 10};
  CHECK(tube_iou_3d(a, a, FrameSet::Union) == doctest::Approx(1.0));
  CHECK(tube_iou_3d(a, a, FrameSet::RestrictToFirst) == doctest::Approx(1.0));

  for (int t = 5; t < 15; ++t) b[t] = {0, 0, 10, 10};
  CHECK(tube_iou_3d(a, b, FrameSet::Union) == doctest::Approx(1.0 / 3));
  CHECK(tube_iou_3d(a, b, FrameSet::RestrictToFirst) == doctest::Approx(0.5));
}

TEST_CASE("tube_iou_3d union mode matches brute force") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    BoxMap a = random_tube(rng, 20), b = random_tube(rng, 20);
    CHECK(tube_iou_3d(a, b, FrameSet::Union) ==
          doctest::Approx(tube_iou_3d_bruteforce(a, b)).epsilon(1e-12));
    CHECK(tube_iou_3d(a, b, FrameSet::Union) ==
          doctest::Approx(tube_iou_3d(b, a, FrameSet::Union)).epsilon(1e-12));
  }
}

TEST_CASE("tube_iou_3d rejects empty frame set") {
  CHECK_THROWS(tube_iou_3d({}, {}, FrameSet::Union));
}
