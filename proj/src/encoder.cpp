#include "tubelink/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tubelink/jsonl.hpp"

namespace tubelink {

using nlohmann::json;

void EncoderParams::check_shapes() const {
  if (w1.rows != h || w1.cols != d || w2.rows != h || w2.cols != h ||
      w3.rows != m || w3.cols != h || static_cast<int>(b1.size()) != h ||
      static_cast<int>(b2.size()) != h || static_cast<int>(b3.size()) != m)
    throw TubelinkError(ErrorCode::DimensionMismatch, "encoder shapes do not chain d->h->h->m");
}

EncoderParams init_encoder(int d, int h, int m, uint64_t seed, bool normalize_output) {
  EncoderParams p;
  p.d = d;
  p.h = h;
  p.m = m;
  p.normalize_output = normalize_output;
  p.w1 = Mat(h, d);
  p.w2 = Mat(h, h);
  p.w3 = Mat(m, h);
  p.b1.assign(h, 0.0);
  p.b2.assign(h, 0.0);
  p.b3.assign(m, 0.0);
  Rng rng(substream_seed(seed, "init"));
  auto fill = [&](Mat& w) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
  };
  fill(p.w1);
  fill(p.w2);
  fill(p.w3);
  return p;
}

namespace {

Vec affine(const Mat& w, const Vec& b, const Vec& x) {
  Vec y(w.rows);
  for (int r = 0; r < w.rows; ++r) {
    double s = b[r];
    for (int c = 0; c < w.cols; ++c) s += w.at(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

void relu_inplace(Vec& v) {
  for (double& x : v) x = std::max(0.0, x);
}

struct Forward {
  Vec z1, a1, z2, a2, z3, e;
  double r = 0;  // ||z3||, used when normalizing
};

Forward forward(const EncoderParams& p, const Vec& q) {
  Forward f;
  f.z1 = affine(p.w1, p.b1, q);
  f.a1 = f.z1;
  relu_inplace(f.a1);
  f.z2 = affine(p.w2, p.b2, f.a1);
  f.a2 = f.z2;
  relu_inplace(f.a2);
  f.z3 = affine(p.w3, p.b3, f.a2);
  f.e = f.z3;
  if (p.normalize_output) {
    f.r = norm(f.z3);
    if (f.r > 0)
      for (double& v : f.e) v /= f.r;
  }
  return f;
}

}  // namespace

Vec encode(const EncoderParams& p, const Vec& q) {
  if (static_cast<int>(q.size()) != p.d)
    throw TubelinkError(ErrorCode::DimensionMismatch,
                        "encode: query dim " + std::to_string(q.size()) +
                            " != encoder input dim " + std::to_string(p.d));
  p.check_shapes();
  return forward(p, q).e;
}

double cosine_sim(const Vec& a, const Vec& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0 || nb == 0) throw std::domain_error("cosine_sim: zero vector");
  return dot(a, b) / (na * nb);
}

std::vector<int> assign_person_ids(const std::vector<DetectionRecord>& dets,
                                   const std::vector<GroundTruthTube>& gts,
                                   double tau_iou) {
  std::vector<int> labels(dets.size(), kNoPerson);
  for (size_t i = 0; i < dets.size(); ++i) {
    double best = tau_iou;  // strict: IoU must exceed tau_iou
    for (const auto& g : gts) {
      auto it = g.entries.find(dets[i].frame);
      if (it == g.entries.end()) continue;
      const double v = iou(dets[i].box, it->second.box);
      if (v > best) {
        best = v;
        labels[i] = g.person_id;
      }
    }
  }
  return labels;
}

namespace {

// A sample whose hidden units are all inactive encodes to the zero
// vector; its cosine against anything is taken as 0 with zero gradient,
// which matches the (locally constant) loss around such a sample.
double safe_cos(const Vec& a, const Vec& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0 || nb == 0) return 0.0;
  return dot(a, b) / (na * nb);
}

int distinct_frames(const auto& batch) {
  std::set<int> f;
  for (const auto& x : batch) f.insert(x.frame);
  return static_cast<int>(f.size());
}

}  // namespace

double npair_loss(const std::vector<LabeledEmbedding>& batch, double tau_t,
                  bool literal_outer_sum) {
  const int n = static_cast<int>(batch.size());
  if (n < 2) throw std::invalid_argument("npair_loss: degenerate batch (fewer than 2 elements)");
  double total = 0;
  for (int i = 0; i < n; ++i) {
    double num = 0, den = 0;
    bool has_pos = false;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const double ex = std::exp(safe_cos(batch[i].e, batch[k].e) / tau_t);
      den += ex;
      if (batch[k].label == batch[i].label) {
        num += ex;
        has_pos = true;
      }
    }
    if (has_pos) total += std::log(den) - std::log(num);
  }
  total /= static_cast<double>(n);
  if (literal_outer_sum) total *= static_cast<double>(distinct_frames(batch));
  return total;
}

double npair_loss_of_queries(const EncoderParams& p,
                             const std::vector<LabeledQuery>& batch,
                             const TrainConfig& cfg) {
  std::vector<LabeledEmbedding> e(batch.size());
  for (size_t i = 0; i < batch.size(); ++i)
    e[i] = {encode(p, batch[i].query), batch[i].label, batch[i].frame};
  return npair_loss(e, cfg.tau_t, cfg.literal_outer_sum);
}

EncoderGrad npair_gradient(const EncoderParams& p,
                           const std::vector<LabeledQuery>& batch,
                           const TrainConfig& cfg) {
  const int n = static_cast<int>(batch.size());
  if (n < 2) throw std::invalid_argument("npair_gradient: degenerate batch");
  p.check_shapes();

  std::vector<Forward> fwd(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(batch[i].query.size()) != p.d)
      continue;  // checked again below
    fwd[i] = forward(p, batch[i].query);
  }
  for (int i = 0; i < n; ++i)
    if (static_cast<int>(batch[i].query.size()) != p.d)
      throw TubelinkError(ErrorCode::DimensionMismatch, "npair_gradient: query dim mismatch");

  // Pairwise cosine similarities between embeddings.
  Mat s(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (k != i) s.at(i, k) = safe_cos(fwd[i].e, fwd[k].e);

  // d(loss)/d(s_ik) for each ordered pair with anchor i.
  double scale = 1.0 / static_cast<double>(n);
  if (cfg.literal_outer_sum) scale *= static_cast<double>(distinct_frames(batch));
  Mat gs(n, n);
  for (int i = 0; i < n; ++i) {
    double num = 0, den = 0;
    bool has_pos = false;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const double ex = std::exp(s.at(i, k) / cfg.tau_t);
      den += ex;
      if (batch[k].label == batch[i].label) {
        num += ex;
        has_pos = true;
      }
    }
    if (!has_pos) continue;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const double ex = std::exp(s.at(i, k) / cfg.tau_t);
      double g = ex / den;
      if (batch[k].label == batch[i].label) g -= ex / num;
      gs.at(i, k) = scale * g / cfg.tau_t;
    }
  }

  // d(loss)/d(e_i): s_ik depends on both endpoints.
  std::vector<Vec> ge(n, Vec(p.m, 0.0));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double ni = norm(fwd[i].e);
    if (ni == 0) continue;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const double nk = norm(fwd[k].e);
      if (nk == 0) continue;
      // anchor i, other k
      double g = gs.at(i, k);
      if (g != 0) {
        for (int c = 0; c < p.m; ++c)
          ge[i][c] += g * (fwd[k].e[c] / (ni * nk) - s.at(i, k) * fwd[i].e[c] / (ni * ni));
      }
      // anchor k, other i
      g = gs.at(k, i);
      if (g != 0) {
        for (int c = 0; c < p.m; ++c)
          ge[i][c] += g * (fwd[k].e[c] / (ni * nk) - s.at(k, i) * fwd[i].e[c] / (ni * ni));
      }
    }
  }

  // Per-sample backprop through the MLP; contributions reduced in index
  // order so the result does not depend on thread count.
  std::vector<EncoderGrad> partial(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    EncoderGrad g;
    g.w1 = Mat(p.h, p.d);
    g.w2 = Mat(p.h, p.h);
    g.w3 = Mat(p.m, p.h);
    g.b1.assign(p.h, 0.0);
    g.b2.assign(p.h, 0.0);
    g.b3.assign(p.m, 0.0);
    const Forward& f = fwd[i];

    Vec dz3 = ge[i];
    if (p.normalize_output && f.r > 0) {
      const double gdote = dot(ge[i], f.e);
      for (int c = 0; c < p.m; ++c) dz3[c] = (ge[i][c] - gdote * f.e[c]) / f.r;
    }
    for (int r = 0; r < p.m; ++r) {
      g.b3[r] += dz3[r];
      for (int c = 0; c < p.h; ++c) g.w3.at(r, c) += dz3[r] * f.a2[c];
    }
    Vec dz2(p.h, 0.0);
    for (int c = 0; c < p.h; ++c) {
      if (f.z2[c] <= 0) continue;
      double s2 = 0;
      for (int r = 0; r < p.m; ++r) s2 += p.w3.at(r, c) * dz3[r];
      dz2[c] = s2;
    }
    for (int r = 0; r < p.h; ++r) {
      g.b2[r] += dz2[r];
      for (int c = 0; c < p.h; ++c) g.w2.at(r, c) += dz2[r] * f.a1[c];
    }
    Vec dz1(p.h, 0.0);
    for (int c = 0; c < p.h; ++c) {
      if (f.z1[c] <= 0) continue;
      double s1 = 0;
      for (int r = 0; r < p.h; ++r) s1 += p.w2.at(r, c) * dz2[r];
      dz1[c] = s1;
    }
    for (int r = 0; r < p.h; ++r) {
      g.b1[r] += dz1[r];
      for (int c = 0; c < p.d; ++c) g.w1.at(r, c) += dz1[r] * batch[i].query[c];
    }
    partial[i] = std::move(g);
  }

  EncoderGrad total = std::move(partial[0]);
  for (int i = 1; i < n; ++i) {
    const EncoderGrad& g = partial[i];
    for (size_t k = 0; k < total.w1.data.size(); ++k) total.w1.data[k] += g.w1.data[k];
    for (size_t k = 0; k < total.w2.data.size(); ++k) total.w2.data[k] += g.w2.data[k];
    for (size_t k = 0; k < total.w3.data.size(); ++k) total.w3.data[k] += g.w3.data[k];
    for (size_t k = 0; k < total.b1.size(); ++k) total.b1[k] += g.b1[k];
    for (size_t k = 0; k < total.b2.size(); ++k) total.b2[k] += g.b2[k];
    for (size_t k = 0; k < total.b3.size(); ++k) total.b3[k] += g.b3[k];
  }
  return total;
}

namespace {

bool has_positive_pair(const std::vector<LabeledQuery>& clip) {
  for (size_t i = 0; i < clip.size(); ++i)
    for (size_t j = i + 1; j < clip.size(); ++j)
      if (clip[i].label == clip[j].label) return true;
  return false;
}

}  // namespace

EncoderParams train_encoder(const std::vector<std::vector<LabeledQuery>>& clips,
                            const TrainConfig& cfg, const EncoderParams& init,
                            TrainReport* report) {
  std::vector<int> usable;
  for (size_t i = 0; i < clips.size(); ++i)
    if (clips[i].size() >= 2 && has_positive_pair(clips[i]))
      usable.push_back(static_cast<int>(i));
  if (usable.empty())
    throw std::invalid_argument("train_encoder: degenerate dataset, no positive pairs");

  EncoderParams p = init;
  Rng rng(substream_seed(cfg.seed, "train"));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr =
        cfg.learning_rate * (epoch >= cfg.lr_decay_epoch ? 0.1 : 1.0);
    std::vector<int> order = usable;
    rng.shuffle(order);
    double loss_sum = 0;
    for (int ci : order) {
      loss_sum += npair_loss_of_queries(p, clips[ci], cfg);
      EncoderGrad g = npair_gradient(p, clips[ci], cfg);
      for (size_t k = 0; k < p.w1.data.size(); ++k) p.w1.data[k] -= lr * g.w1.data[k];
      for (size_t k = 0; k < p.w2.data.size(); ++k) p.w2.data[k] -= lr * g.w2.data[k];
      for (size_t k = 0; k < p.w3.data.size(); ++k) p.w3.data[k] -= lr * g.w3.data[k];
      for (size_t k = 0; k < p.b1.size(); ++k) p.b1[k] -= lr * g.b1[k];
      for (size_t k = 0; k < p.b2.size(); ++k) p.b2[k] -= lr * g.b2[k];
      for (size_t k = 0; k < p.b3.size(); ++k) p.b3[k] -= lr * g.b3[k];
    }
    if (report) report->epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
  }
  return p;
}

std::vector<std::vector<LabeledQuery>> clips_from_stream(
    const DetectionStream& stream, int person_class_index, double tau_p,
    int clip_len) {
  std::vector<std::vector<LabeledQuery>> clips;
  const size_t n_frames = stream.frames.size();
  for (size_t start = 0; start < n_frames; start += clip_len) {
    std::vector<LabeledQuery> clip;
    const size_t end = std::min(start + static_cast<size_t>(clip_len), n_frames);
    for (size_t fi = start; fi < end; ++fi) {
      for (const auto& r : stream.per_frame[fi]) {
        if (person_class_index >= static_cast<int>(r.class_scores.size())) continue;
        if (r.class_scores[person_class_index] < tau_p) continue;
        if (r.gt_person < 0) continue;
        clip.push_back({r.query, r.gt_person, r.frame});
      }
    }
    if (!clip.empty()) clips.push_back(std::move(clip));
  }
  return clips;
}

std::string encoder_to_json(const EncoderParams& p) {
  auto arr = [](const Vec& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += format_double(v[i]);
    }
    return s + "]";
  };
  std::string s = "{\"d\":" + std::to_string(p.d) + ",\"h\":" + std::to_string(p.h) +
                  ",\"m\":" + std::to_string(p.m) + ",\"normalize_output\":" +
                  (p.normalize_output ? "true" : "false");
  s += ",\"w1\":" + arr(p.w1.data);
  s += ",\"w2\":" + arr(p.w2.data);
  s += ",\"w3\":" + arr(p.w3.data);
  s += ",\"b1\":" + arr(p.b1);
  s += ",\"b2\":" + arr(p.b2);
  s += ",\"b3\":" + arr(p.b3);
  s += "}";
  return s;
}

EncoderParams encoder_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw TubelinkError(ErrorCode::SchemaViolation, "encoder params: malformed JSON");
  EncoderParams p;
  try {
    p.d = j.at("d").get<int>();
    p.h = j.at("h").get<int>();
    p.m = j.at("m").get<int>();
    p.normalize_output = j.at("normalize_output").get<bool>();
    p.w1 = Mat(p.h, p.d);
    p.w1.data = j.at("w1").get<Vec>();
    p.w2 = Mat(p.h, p.h);
    p.w2.data = j.at("w2").get<Vec>();
    p.w3 = Mat(p.m, p.h);
    p.w3.data = j.at("w3").get<Vec>();
    p.b1 = j.at("b1").get<Vec>();
    p.b2 = j.at("b2").get<Vec>();
    p.b3 = j.at("b3").get<Vec>();
  } catch (const json::exception& e) {
    throw TubelinkError(ErrorCode::SchemaViolation,
                        std::string("encoder params: ") + e.what());
  }
  if (p.w1.data.size() != static_cast<size_t>(p.h) * p.d ||
      p.w2.data.size() != static_cast<size_t>(p.h) * p.h ||
      p.w3.data.size() != static_cast<size_t>(p.m) * p.h)
    throw TubelinkError(ErrorCode::SchemaViolation, "encoder params: array sizes do not match shapes");
  p.check_shapes();
  return p;
}

EncoderParams read_encoder_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TubelinkError(ErrorCode::MissingFile, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return encoder_from_json(ss.str());
}

}  // namespace tubelink
