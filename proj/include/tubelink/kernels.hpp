#pragma once

#include <vector>

#include "tubelink/bbox.hpp"
#include "tubelink/encoder.hpp"
#include "tubelink/util.hpp"

// Data-parallel kernels (OpenMP when available). Every output cell is
// computed independently, so results are identical for any thread count.
// The serial versions in kernels::reference are the testing baseline and
// must stay bit-identical to the parallel ones.

namespace tubelink::kernels {

std::vector<Vec> encode_batch(const EncoderParams& p, const std::vector<Vec>& queries);

/// cos(a[i], b[j]) for all pairs; rows a, cols b.
Mat pairwise_cosine(const std::vector<Vec>& a, const std::vector<Vec>& b);

/// tube_iou_3d(a[i], b[j], mode) for all pairs.
Mat tube_iou_matrix(const std::vector<BoxMap>& a, const std::vector<BoxMap>& b,
                    FrameSet mode);

namespace reference {

std::vector<Vec> encode_batch(const EncoderParams& p, const std::vector<Vec>& queries);
Mat pairwise_cosine(const std::vector<Vec>& a, const std::vector<Vec>& b);
Mat tube_iou_matrix(const std::vector<BoxMap>& a, const std::vector<BoxMap>& b,
                    FrameSet mode);

}  // namespace reference

}  // namespace tubelink::kernels
