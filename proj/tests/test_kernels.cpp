#include <doctest.h>

#include "tubelink/kernels.hpp"

using namespace tubelink;

// The OpenMP kernels must stay bit-identical to the serial reference.

TEST_CASE("parallel kernels match serial reference bitwise") {
  Rng rng(11);
  EncoderParams p = init_encoder(8, 8, 4, 123);
  std::vector<Vec> a, b;
  for (int i = 0; i < 17; ++i) {
    Vec v(8);
    for (double& x : v) x = rng.gaussian();
    a.push_back(v);
  }
  for (int i = 0; i < 9; ++i) {
    Vec v(8);
    for (double& x : v) x = rng.gaussian();
    b.push_back(v);
  }

  auto ea = kernels::encode_batch(p, a);
  auto ra = kernels::reference::encode_batch(p, a);
  REQUIRE(ea.size() == ra.size());
  for (size_t i = 0; i < ea.size(); ++i) CHECK(ea[i] == ra[i]);

  auto eb = kernels::encode_batch(p, b);
  Mat s = kernels::pairwise_cosine(ea, eb);
  Mat sr = kernels::reference::pairwise_cosine(ea, eb);
  CHECK(s.data == sr.data);

  std::vector<BoxMap> ta, tb;
  for (int i = 0; i < 12; ++i) {
    BoxMap m;
    for (int t = 0; t < rng.uniform_int(1, 10); ++t) {
      const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
      m[rng.uniform_int(0, 20)] = {x, y, x + rng.uniform(1, 40), y + rng.uniform(1, 40)};
    }
    (i % 2 ? ta : tb).push_back(m);
  }
  Mat u = kernels::tube_iou_matrix(ta, tb, FrameSet::Union);
  Mat ur = kernels::reference::tube_iou_matrix(ta, tb, FrameSet::Union);
  CHECK(u.data == ur.data);
  Mat g = kernels::tube_iou_matrix(ta, tb, FrameSet::RestrictToFirst);
  Mat gr = kernels::reference::tube_iou_matrix(ta, tb, FrameSet::RestrictToFirst);
  CHECK(g.data == gr.data);
}
