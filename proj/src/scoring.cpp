#include "tubelink/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tubelink/encoder.hpp"
#include "tubelink/util.hpp"

namespace tubelink {

namespace {

// Indices of the k highest scores; on equal scores the lower class wins.
std::vector<int> topk_indices(const std::vector<double>& scores, int k) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  idx.resize(std::min<size_t>(k, idx.size()));
  return idx;
}

}  // namespace

std::set<int> topk_class_set(const ActionScoreSeq& seq, int k) {
  std::set<int> classes;
  for (const auto& frame : seq.scores)
    for (int c : topk_indices(frame, k)) classes.insert(c);
  return classes;
}

std::set<int> class_time_set(const ActionScoreSeq& seq, int c, int k) {
  std::set<int> times;
  for (size_t t = 0; t < seq.scores.size(); ++t) {
    auto top = topk_indices(seq.scores[t], k);
    if (std::find(top.begin(), top.end(), c) != top.end()) times.insert(static_cast<int>(t));
  }
  return times;
}

double tube_score(const ActionScoreSeq& seq, int c, int k, int tau_k) {
  auto times = class_time_set(seq, c, k);
  if (static_cast<int>(times.size()) <= tau_k) return 0.0;
  double sum = 0;
  for (int t : times) sum += seq.scores[t][c];
  return sum / static_cast<double>(times.size());
}

BoxMap tube_boxes(const TrackList& track, const std::set<int>& positions) {
  BoxMap boxes;
  for (int pos : positions) {
    if (pos < 0 || pos >= static_cast<int>(track.entries.size()))
      throw std::out_of_range("tube_boxes: position outside track");
    boxes.emplace(track.entries[pos].frame, track.entries[pos].detection.box);
  }
  return boxes;
}

std::vector<Tube> build_tubes(const TrackList& track, const ActionScoreSeq& seq,
                              const ScoringConfig& cfg) {
  if (seq.scores.size() != track.entries.size())
    throw std::invalid_argument("build_tubes: score sequence not aligned with track");
  const int none_class = seq.num_classes_with_none() - 1;
  std::vector<Tube> tubes;
  for (int c : topk_class_set(seq, cfg.k)) {
    auto times = class_time_set(seq, c, cfg.k);
    if (cfg.drop_below_none && c != none_class) {
      std::set<int> kept;
      for (int t : times)
        if (seq.scores[t][none_class] <= seq.scores[t][c]) kept.insert(t);
      times = kept;
    }
    if (static_cast<int>(times.size()) <= cfg.tau_k) continue;
    double sum = 0;
    for (int t : times) sum += seq.scores[t][c];
    const double score = sum / static_cast<double>(times.size());
    if (score <= 0) continue;
    Tube tube;
    tube.person_id = track.id;
    tube.action = c;
    tube.score = score;
    tube.boxes = tube_boxes(track, times);
    if (cfg.fill_gaps && tube.boxes.size() > 1) {
      BoxMap filled = tube.boxes;
      auto it = tube.boxes.begin();
      for (auto next = std::next(it); next != tube.boxes.end(); ++it, ++next) {
        for (int f = it->first + 1; f < next->first; ++f) {
          const double alpha = static_cast<double>(f - it->first) /
                               static_cast<double>(next->first - it->first);
          filled.emplace(f, interpolate_box(it->second, next->second, alpha));
        }
      }
      tube.boxes = std::move(filled);
    }
    tubes.push_back(std::move(tube));
  }
  return tubes;
}

std::vector<int> assign_action_labels(const TrackList& track,
                                      const std::vector<GroundTruthTube>& gts,
                                      double tau_iou, int no_action_class) {
  std::vector<DetectionRecord> dets;
  for (const auto& e : track.entries) dets.push_back(e.detection);
  for (size_t i = 0; i < dets.size(); ++i) dets[i].frame = track.entries[i].frame;
  auto persons = assign_person_ids(dets, gts, tau_iou);
  std::vector<int> labels(track.entries.size(), no_action_class);
  for (size_t i = 0; i < persons.size(); ++i) {
    if (persons[i] == kNoPerson) continue;
    for (const auto& g : gts) {
      if (g.person_id != persons[i]) continue;
      auto it = g.entries.find(track.entries[i].frame);
      if (it != g.entries.end()) labels[i] = it->second.action;
      break;
    }
  }
  return labels;
}

double action_ce_loss(const ActionScoreSeq& seq, const std::vector<int>& labels) {
  if (seq.scores.size() != labels.size())
    throw std::invalid_argument("action_ce_loss: length mismatch");
  double loss = 0;
  for (size_t t = 0; t < labels.size(); ++t) {
    const auto& s = seq.scores[t];
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    double p = total > 0 ? s[labels[t]] / total : 0.0;
    p = std::max(p, 1e-12);
    loss -= std::log(p);
  }
  return loss;
}

ActionScoreSeq oracle_scorer(const TrackList& track,
                             const std::vector<GroundTruthTube>& gts,
                             double tau_iou, int num_actions_with_none,
                             double sigma, uint64_t seed, bool one_hot) {
  const int none_class = num_actions_with_none - 1;
  auto labels = assign_action_labels(track, gts, tau_iou, none_class);
  ActionScoreSeq seq;
  Rng rng(seed);
  constexpr double kPeak = 4.0;
  for (size_t t = 0; t < labels.size(); ++t) {
    std::vector<double> logits(num_actions_with_none, 0.0);
    logits[labels[t]] = kPeak;
    for (double& l : logits) l += sigma * rng.gaussian();
    if (one_hot) {
      std::vector<double> s(num_actions_with_none, 0.0);
      int best = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
      s[best] = 1.0;
      seq.scores.push_back(std::move(s));
      continue;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (double l : logits) z += std::exp(l - mx);
    std::vector<double> s(num_actions_with_none);
    for (int c = 0; c < num_actions_with_none; ++c) s[c] = std::exp(logits[c] - mx) / z;
    seq.scores.push_back(std::move(s));
  }
  return seq;
}

}  // namespace tubelink
