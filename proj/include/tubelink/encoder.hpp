#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tubelink/types.hpp"
#include "tubelink/util.hpp"

namespace tubelink {

/// 3-layer MLP d -> h -> h -> m with ReLU between layers, optional
/// L2 normalization of the output.
struct EncoderParams {
  int d = 0, h = 0, m = 0;
  Mat w1, w2, w3;  // h x d, h x h, m x h
  Vec b1, b2, b3;
  bool normalize_output = true;

  void check_shapes() const;
};

struct TrainConfig {
  double tau_iou = 0.2;
  double tau_t = 1.0;
  int epochs = 20;
  int clip_len = 8;  // frames per training clip
  double learning_rate = 1e-3;
  int lr_decay_epoch = 15;  // step decay x0.1 at this epoch (1-based)
  uint64_t seed = 0;
  bool literal_outer_sum = false;  // scale loss by the clip's frame count
};

EncoderParams init_encoder(int d, int h, int m, uint64_t seed,
                           bool normalize_output = true);

Vec encode(const EncoderParams& p, const Vec& q);

/// Throws on a zero vector.
double cosine_sim(const Vec& a, const Vec& b);

/// Per detection, the GT person whose box IoU exceeds tau_iou (highest
/// IoU when several do), else -1. Only GT tubes with an entry at the
/// detection's frame are considered.
std::vector<int> assign_person_ids(const std::vector<DetectionRecord>& dets,
                                   const std::vector<GroundTruthTube>& gts,
                                   double tau_iou);

struct LabeledEmbedding {
  Vec e;
  int label = 0;
  int frame = 0;
};

double npair_loss(const std::vector<LabeledEmbedding>& batch, double tau_t,
                  bool literal_outer_sum = false);

struct LabeledQuery {
  Vec query;
  int label = 0;
  int frame = 0;
};

struct EncoderGrad {
  Mat w1, w2, w3;
  Vec b1, b2, b3;
};

/// Analytic gradient of npair_loss(encode(batch)) w.r.t. every parameter.
EncoderGrad npair_gradient(const EncoderParams& p,
                           const std::vector<LabeledQuery>& batch,
                           const TrainConfig& cfg);

/// Loss of the encoded batch, for gradient checking and epoch reports.
double npair_loss_of_queries(const EncoderParams& p,
                             const std::vector<LabeledQuery>& batch,
                             const TrainConfig& cfg);

struct TrainReport {
  std::vector<double> epoch_loss;
};

/// Mini-batch gradient descent over clips; one clip = one batch. Clips
/// with fewer than two labeled queries or no positive pair are skipped.
EncoderParams train_encoder(const std::vector<std::vector<LabeledQuery>>& clips,
                            const TrainConfig& cfg, const EncoderParams& init,
                            TrainReport* report = nullptr);

/// Build per-clip labeled queries from a detection stream: keep records
/// with person score >= tau_p and gt_person >= 0, chunk into clips of
/// cfg.clip_len consecutive stream frames.
std::vector<std::vector<LabeledQuery>> clips_from_stream(
    const DetectionStream& stream, int person_class_index, double tau_p,
    int clip_len);

std::string encoder_to_json(const EncoderParams& p);
EncoderParams encoder_from_json(const std::string& text);
EncoderParams read_encoder_file(const std::string& path);

}  // namespace tubelink
