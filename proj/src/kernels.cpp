#include "tubelink/kernels.hpp"

namespace tubelink::kernels {

namespace reference {

std::vector<Vec> encode_batch(const EncoderParams& p, const std::vector<Vec>& queries) {
  std::vector<Vec> out(queries.size());
  for (size_t i = 0; i < queries.size(); ++i) out[i] = encode(p, queries[i]);
  return out;
}

Mat pairwise_cosine(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  Mat s(static_cast<int>(a.size()), static_cast<int>(b.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      s.at(static_cast<int>(i), static_cast<int>(j)) = cosine_sim(a[i], b[j]);
  return s;
}

Mat tube_iou_matrix(const std::vector<BoxMap>& a, const std::vector<BoxMap>& b,
                    FrameSet mode) {
  Mat s(static_cast<int>(a.size()), static_cast<int>(b.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      s.at(static_cast<int>(i), static_cast<int>(j)) = tube_iou_3d(a[i], b[j], mode);
  return s;
}

}  // namespace reference

std::vector<Vec> encode_batch(const EncoderParams& p, const std::vector<Vec>& queries) {
  std::vector<Vec> out(queries.size());
  const int n = static_cast<int>(queries.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) out[i] = encode(p, queries[i]);
  return out;
}

Mat pairwise_cosine(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  Mat s(static_cast<int>(a.size()), static_cast<int>(b.size()));
  const int n = s.rows, m = s.cols;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) s.at(i, j) = cosine_sim(a[i], b[j]);
  return s;
}

Mat tube_iou_matrix(const std::vector<BoxMap>& a, const std::vector<BoxMap>& b,
                    FrameSet mode) {
  Mat s(static_cast<int>(a.size()), static_cast<int>(b.size()));
  const int n = s.rows, m = s.cols;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) s.at(i, j) = tube_iou_3d(a[i], b[j], mode);
  return s;
}

}  // namespace tubelink::kernels
