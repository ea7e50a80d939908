// Acceptance suite: one pass/fail line per criterion.
// Usage: acceptance <path-to-cli> <configs-dir>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tubelink/config.hpp"
#include "tubelink/eval.hpp"
#include "tubelink/jsonl.hpp"
#include "tubelink/scoring.hpp"

namespace fs = std::filesystem;
using namespace tubelink;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n";
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- criterion 1: gradient vs central finite differences ----

void criterion1() {
  const auto t0 = Clock::now();
  double worst = 0;
  bool ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    EncoderParams p = init_encoder(8, 8, 4, 9000 + trial);
    Rng rng(100 + trial);
    auto batch = oracles::random_batch(rng, 12, 8, 3, &p);
    TrainConfig cfg;
    // Slots below ~1e-5 are beneath central-difference resolution
    // (roundoff in the loss is ~1e-11 after division by the step).
    auto res = oracles::gradient_check(p, batch, cfg, 1e-5, 1e-5);
    worst = std::max(worst, res.max_rel_err);
    if (res.checked == 0 || res.max_rel_err >= 1e-5) ok = false;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "max rel err " << worst << ", " << secs << " s";
  report(1, "analytic N-pair gradient matches finite differences", ok && secs < 5.0, d.str());
}

// ---- criterion 2: loss vs term-by-term oracle + closed forms ----

void criterion2() {
  bool ok = true;
  Rng rng(4242);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LabeledEmbedding> batch;
    const int n = rng.uniform_int(2, 12);
    for (int i = 0; i < n; ++i) {
      Vec e(4);
      for (double& x : e) x = rng.gaussian();
      batch.push_back({std::move(e), rng.uniform_int(0, 3), rng.uniform_int(0, 7)});
    }
    const double tau = rng.uniform(0.3, 2.0);
    const double diff =
        std::abs(npair_loss(batch, tau) - oracles::npair_loss_bruteforce(batch, tau));
    worst = std::max(worst, diff);
    if (diff > 1e-12) ok = false;
  }

  // Closed form 0: two same-person embeddings.
  std::vector<LabeledEmbedding> two{{{1, 0}, 0, 0}, {{0.6, 0.8}, 0, 1}};
  if (std::abs(npair_loss(two, 1.0)) > 1e-12) ok = false;

  // Closed form ln 2: three unit vectors at mutual 120 degrees, labels
  // A, A, B. Both A anchors see one positive and one negative at equal
  // similarity (l = ln 2); the B anchor has no positives. Total = 2 ln2 / 3.
  const double s3 = std::sqrt(3.0) / 2;
  std::vector<LabeledEmbedding> tri{
      {{1, 0}, 0, 0}, {{-0.5, s3}, 0, 1}, {{-0.5, -s3}, 1, 2}};
  if (std::abs(npair_loss(tri, 1.0) - 2.0 * std::log(2.0) / 3.0) > 1e-12) ok = false;

  std::ostringstream d;
  d << "max |diff| " << worst;
  report(2, "npair_loss matches Eq-by-term oracle and closed forms", ok, d.str());
}

// ---- criterion 3: union-mode 3D IoU vs brute force ----

void criterion3() {
  Rng rng(77);
  bool ok = true;
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto random_tube = [&] {
      BoxMap m;
      const int n = rng.uniform_int(1, 20);
      for (int i = 0; i < n; ++i) {
        const int f = rng.uniform_int(0, 40);
        const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
        m[f] = {x, y, x + rng.uniform(1, 50), y + rng.uniform(1, 50)};
      }
      return m;
    };
    BoxMap a = random_tube(), b = random_tube();
    std::set<int> frames;
    for (const auto& [t, _] : a) frames.insert(t);
    for (const auto& [t, _] : b) frames.insert(t);
    double sum = 0;
    for (int t : frames)
      if (a.count(t) && b.count(t)) sum += iou(a.at(t), b.at(t));
    const double diff = std::abs(tube_iou_3d(a, b, FrameSet::Union) - sum / frames.size());
    worst = std::max(worst, diff);
    if (diff > 1e-12) ok = false;
  }
  std::ostringstream d;
  d << "max |diff| " << worst;
  report(3, "union-mode 3D IoU equals brute-force accumulation", ok, d.str());
}

// ---- shared: train an encoder on synthetic identities ----

std::vector<std::vector<LabeledQuery>> identity_clips(int n_clips, int per_clip,
                                                      int identities, int identity_dim,
                                                      int confounder_dim, double sigma,
                                                      uint64_t seed) {
  // Queries drawn the same way the scenario generator builds them:
  // near-orthogonal identity vector plus action confounder plus noise.
  ScenarioConfig cfg;
  cfg.frames = n_clips * per_clip;
  cfg.persons.assign(identities, {});
  cfg.identity_dim = identity_dim;
  cfg.confounder_dim = confounder_dim;
  cfg.noise_sigma = sigma;
  cfg.seed = seed;
  for (int i = 0; i < identities; ++i)
    cfg.persons[i].actions = {{0, cfg.frames, i % (cfg.num_actions + 1)}};
  Scenario sc = generate_scenario(cfg);
  auto stream = group_by_frame(sc.detections);
  return clips_from_stream(stream, 0, 0.5, per_clip);
}

EncoderParams train_suite_encoder(int d, uint64_t seed) {
  auto clips = identity_clips(20, 8, 5, d - 4, 4, 0.05, seed);
  TrainConfig cfg;
  cfg.epochs = 10;  // 20 clips x 10 epochs = 200 steps
  cfg.learning_rate = 1e-3;
  cfg.seed = seed;
  return train_encoder(clips, cfg, init_encoder(d, d, d, seed));
}

// ---- criterion 4: large-motion trend ----

void criterion4() {
  const auto t0 = Clock::now();
  const int d = 16;
  EncoderParams enc = train_suite_encoder(d, 1234);

  LinkConfig lc;
  lc.tau_p = 0.75;
  lc.tau_s = 0.25;
  lc.tau_k_prime = 8;

  auto make_scenario = [&](int kind, int idx) {
    ScenarioConfig cfg;
    cfg.frames = 24;
    cfg.identity_dim = d - 4;
    cfg.confounder_dim = 4;
    cfg.noise_sigma = 0.05;
    cfg.seed = 5000 + kind * 100 + idx;
    cfg.persons.assign(3, {});
    for (auto& p : cfg.persons) {
      if (kind == 0) {
        p.trajectory = Trajectory::Stationary;
      } else if (kind == 1) {
        p.trajectory = Trajectory::Linear;  // delta ~ 10/sqrt(3200) = 0.177
        p.vx = 10;
      } else {
        p.trajectory = Trajectory::Teleport;  // disjoint boxes every frame
        p.teleport_period = 1;
      }
    }
    return generate_scenario(cfg);
  };

  // Aggregate matched/total per (linker, category) over the suite.
  struct Agg {
    int matched = 0, total = 0;
    double recall() const { return total ? static_cast<double>(matched) / total : 0; }
  };
  std::map<std::string, std::map<std::string, Agg>> agg;  // linker -> category
  Agg teleport_qmm, teleport_iou50;

  const std::vector<double> iou_thresholds{0.25, 0.5, 0.75};
  for (int kind = 0; kind < 3; ++kind) {
    for (int idx = 0; idx < 10; ++idx) {
      Scenario sc = make_scenario(kind, idx);
      auto rep = compare_linkers(sc, enc, lc, iou_thresholds, 0.5);
      for (const auto& row : rep.rows) {
        for (const auto& [cat, mn] : row.by_category) {
          auto& a = agg[row.linker][cat];
          a.matched += mn.first;
          a.total += mn.second;
        }
        if (kind == 2) {
          for (const auto& [cat, mn] : row.by_category) {
            if (cat != "L") continue;
            if (row.linker == "qmm") {
              teleport_qmm.matched += mn.first;
              teleport_qmm.total += mn.second;
            } else if (row.linker == "iou>=0.5") {
              teleport_iou50.matched += mn.first;
              teleport_iou50.total += mn.second;
            }
          }
        }
      }
    }
  }

  const double l025 = agg["iou>=0.25"]["L"].recall();
  const double l050 = agg["iou>=0.5"]["L"].recall();
  const double l075 = agg["iou>=0.75"]["L"].recall();
  const double qmm_l = agg["qmm"]["L"].recall();
  const bool a = l025 >= l050 && l050 >= l075;
  const bool b = qmm_l >= l050 + 0.3;
  const bool c = teleport_qmm.recall() >= 0.9 && teleport_iou50.total > 0 &&
                 teleport_iou50.matched == 0;
  const double secs = seconds_since(t0);
  std::ostringstream det;
  det << "iou L recall {" << l025 << "," << l050 << "," << l075 << "}, qmm L " << qmm_l
      << ", teleport qmm " << teleport_qmm.recall() << ", teleport iou@0.5 "
      << teleport_iou50.recall() << ", " << secs << " s";
  report(4, "IoU-linking degrades with motion, QMM does not", a && b && c && secs < 60,
         det.str());
}

// ---- criterion 5: encoder separation on held-out frames ----

void criterion5() {
  const int d = 16;
  EncoderParams enc = train_suite_encoder(d, 99);
  auto held_out = identity_clips(4, 8, 5, d - 4, 4, 0.05, 424242);
  std::vector<Vec> embeds;
  std::vector<int> labels;
  for (const auto& clip : held_out)
    for (const auto& q : clip) {
      embeds.push_back(encode(enc, q.query));
      labels.push_back(q.label);
    }
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (size_t i = 0; i < embeds.size(); ++i)
    for (size_t j = i + 1; j < embeds.size(); ++j) {
      const double s = cosine_sim(embeds[i], embeds[j]);
      if (labels[i] == labels[j]) {
        intra += s;
        ++n_intra;
      } else {
        inter += s;
        ++n_inter;
      }
    }
  intra /= n_intra;
  inter /= n_inter;
  std::ostringstream det;
  det << "intra " << intra << ", inter " << inter;
  report(5, "trained encoder separates identities by >= 0.2", intra - inter >= 0.2, det.str());
}

// ---- criterion 6: tube building composition ----

void criterion6() {
  Rng rng(606);
  bool ok = true;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const int frames = rng.uniform_int(2, 12);
    const int C1 = rng.uniform_int(2, 6);
    TrackList track;
    track.id = trial;
    for (int f = 0; f < frames; ++f) {
      DetectionRecord det;
      det.frame = f;
      det.box = {10.0 * f, 0, 10.0 * f + 10, 10};
      det.class_scores = {0.9, 0.1};
      det.query = {1.0};
      track.entries.push_back({f, det});
    }
    ActionScoreSeq seq;
    for (int f = 0; f < frames; ++f) {
      std::vector<double> s(C1);
      for (double& v : s) v = rng.uniform();
      seq.scores.push_back(std::move(s));
    }
    ScoringConfig cfg;
    cfg.k = rng.uniform_int(1, C1);
    cfg.tau_k = rng.uniform_int(0, frames);
    auto got = build_tubes(track, seq, cfg);

    // Brute-force composition of the class/time/score/box definitions.
    std::vector<Tube> want;
    for (int c = 0; c < C1; ++c) {
      std::set<int> times;
      for (int t = 0; t < frames; ++t) {
        int better = 0;
        for (int o = 0; o < C1; ++o) {
          if (o == c) continue;
          if (seq.scores[t][o] > seq.scores[t][c] ||
              (seq.scores[t][o] == seq.scores[t][c] && o < c))
            ++better;
        }
        if (better < cfg.k) times.insert(t);
      }
      if (times.empty() || static_cast<int>(times.size()) <= cfg.tau_k) continue;
      double sum = 0;
      for (int t : times) sum += seq.scores[t][c];
      Tube tube;
      tube.action = c;
      tube.score = sum / times.size();
      for (int t : times) tube.boxes.emplace(t, track.entries[t].detection.box);
      want.push_back(std::move(tube));
    }
    if (got.size() != want.size()) {
      ok = false;
      break;
    }
    for (size_t i = 0; i < got.size(); ++i) {
      if (got[i].action != want[i].action || got[i].boxes != want[i].boxes ||
          std::abs(got[i].score - want[i].score) > 1e-12)
        ok = false;
    }
    // Cutoff exactness: any class in <= tau_k frames scores exactly 0.
    for (int c = 0; c < C1; ++c) {
      auto times = class_time_set(seq, c, cfg.k);
      if (static_cast<int>(times.size()) <= cfg.tau_k &&
          tube_score(seq, c, cfg.k, cfg.tau_k) != 0.0)
        ok = false;
    }
  }
  report(6, "build_tubes equals brute-force composition; cutoff is exact", ok);
}

// ---- criterion 7: metric sanity ----

void criterion7() {
  bool ok = true;
  const int none = 4;
  Rng rng(707);

  std::vector<GroundTruthTube> gts;
  std::vector<TrackList> tracks;
  std::vector<Tube> tubes;
  for (int i = 0; i < 3; ++i) {
    GroundTruthTube g;
    g.person_id = i;
    const double x0 = 150.0 * i;
    for (int f = 0; f < 10; ++f) g.entries[f] = {{x0, 0, x0 + 20, 40}, 1 + i};
    gts.push_back(g);
    TrackList t;
    t.id = i;
    for (const auto& [f, e] : g.entries) {
      DetectionRecord d;
      d.frame = f;
      d.box = e.box;
      d.class_scores = {0.9, 0.1};
      d.query = {1.0};
      t.entries.push_back({f, d});
    }
    tracks.push_back(t);
    Tube tube;
    tube.person_id = i;
    tube.action = 1 + i;
    tube.score = 0.5;
    tube.boxes = g.boxes();
    tubes.push_back(tube);
  }

  for (double theta : {0.1, 0.25, 0.5, 0.75, 1.0})
    if (tube_recall(gts, tracks, theta).recall() != 1.0) ok = false;
  if (video_map(gts, tubes, 0.5, none).map != 1.0) ok = false;
  std::set<int> keyframes{0, 2, 4, 6, 8};
  if (frame_map(gts, tubes, 0.5, keyframes, none).map != 1.0) ok = false;

  if (tube_recall(gts, {}, 0.5).recall() != 0.0) ok = false;
  if (video_map(gts, {}, 0.5, none).map != 0.0) ok = false;
  if (frame_map(gts, {}, 0.5, keyframes, none).map != 0.0) ok = false;

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TrackList> preds;
    const int n = rng.uniform_int(0, 4);
    for (int i = 0; i < n; ++i) {
      TrackList t;
      t.id = i;
      const double x0 = rng.uniform(0, 400);
      for (int f = 0; f < 10; ++f) {
        DetectionRecord d;
        d.frame = f;
        d.box = {x0, 0, x0 + 20, 40};
        d.class_scores = {0.9, 0.1};
        d.query = {1.0};
        t.entries.push_back({f, d});
      }
      preds.push_back(t);
    }
    double prev = 1.1;
    for (double theta : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
      const double r = tube_recall(gts, preds, theta).recall();
      if (r > prev) ok = false;
      prev = r;
    }
  }
  report(7, "metric sanity: perfect=1, empty=0, recall monotone", ok);
}

// ---- criterion 8: CLI determinism across profiles ----

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()) == 0; }

void criterion8(const std::string& cli, const std::string& configs) {
  bool ok = true;
  std::string detail;
  for (const std::string profile : {"jhmdb-like", "ucf-like", "ava-like"}) {
    const std::string cfg = configs + "/" + profile + ".cfg";
    std::vector<std::string> outputs;
    for (int round = 0; round < 2 && ok; ++round) {
      fs::path dir = fs::temp_directory_path() /
                     ("tubelink_accept_" + profile + "_" + std::to_string(round));
      fs::remove_all(dir);
      fs::create_directories(dir);
      const std::string d = dir.string();
      bool all =
          run(cli + " simulate --config " + cfg + " --seed 7 --out-dir " + d) &&
          run(cli + " train --clips " + d + "/detections.jsonl --config " + cfg +
              " --seed 7 --out " + d + "/params.json") &&
          run(cli + " link --detections " + d + "/detections.jsonl --method qmm --params " +
              d + "/params.json --config " + cfg + " --seed 7 --out " + d + "/tracks.jsonl") &&
          run(cli + " link --detections " + d + "/detections.jsonl --method iou --config " +
              cfg + " --seed 7 --out " + d + "/tracks_iou.jsonl") &&
          run(cli + " score --tracks " + d + "/tracks.jsonl --gt " + d + "/gt.jsonl --config " +
              cfg + " --seed 7 --out " + d + "/tubes.jsonl") &&
          run(cli + " eval --metric recall --gt " + d + "/gt.jsonl --tracks " + d +
              "/tracks.jsonl --theta 0.25 --theta 0.5 --theta 0.75 --config " + cfg +
              " --seed 7 --out " + d + "/recall.json") &&
          run(cli + " eval --metric vmap --gt " + d + "/gt.jsonl --tubes " + d +
              "/tubes.jsonl --config " + cfg + " --seed 7 --out " + d + "/vmap.json") &&
          run(cli + " compare --detections " + d + "/detections.jsonl --gt " + d +
              "/gt.jsonl --params " + d + "/params.json --config " + cfg + " --seed 7 --out " +
              d + "/compare.json") &&
          run(cli + " plot-data --recall-report " + d + "/recall.json --train-report " + d +
              "/params.json --out " + d + "/plot.csv");
      if (!all) {
        ok = false;
        detail = profile + ": a pipeline stage failed";
        break;
      }
      std::string blob;
      for (const char* f : {"detections.jsonl", "gt.jsonl", "scenario.json", "params.json",
                            "tracks.jsonl", "tracks_iou.jsonl", "tubes.jsonl", "recall.json",
                            "vmap.json", "compare.json", "plot.csv"})
        blob += slurp(dir / f);
      outputs.push_back(std::move(blob));
    }
    if (ok && outputs[0] != outputs[1]) {
      ok = false;
      detail = profile + ": outputs differ between identical runs";
    }
    if (ok && outputs[0].empty()) {
      ok = false;
      detail = profile + ": produced empty outputs";
    }
  }
  report(8, "full pipeline is byte-identical per profile and seed", ok, detail);
}

// ---- criterion 9: Algorithm-1 golden fixture ----

void criterion9() {
  // Hand-traced before implementation: frame 0 has a filtered low-score
  // query, frame 1 a new person, frame 2 a below-threshold split; the
  // split singleton is dropped by the final length filter.
  EncoderParams p = init_encoder(4, 4, 4, 0, true);
  auto eye = [](Mat& w) {
    w.data.assign(w.data.size(), 0.0);
    for (int i = 0; i < w.rows; ++i) w.at(i, i) = 1.0;
  };
  eye(p.w1);
  eye(p.w2);
  eye(p.w3);

  const Vec A{1, 0, 0, 0}, B{0, 1, 0, 0}, C{0, 0, 1, 0};
  const Vec Y{0, 0.4, 0, std::sqrt(1 - 0.16)};
  auto det = [](int frame, Vec q, double score) {
    DetectionRecord r;
    r.frame = frame;
    r.box = {0, 0, 10, 10};
    r.class_scores = {score, 1 - score};
    r.query = std::move(q);
    return r;
  };
  DetectionStream stream;
  stream.frames = {0, 1, 2, 3};
  stream.per_frame = {
      {det(0, A, 0.9), det(0, B, 0.9), det(0, C, 0.3)},
      {det(1, A, 0.9), det(1, B, 0.9), det(1, C, 0.9)},
      {det(2, A, 0.9), det(2, Y, 0.9), det(2, C, 0.9)},
      {det(3, A, 0.9), det(3, B, 0.9), det(3, C, 0.9)},
  };
  LinkConfig cfg;
  cfg.tau_p = 0.5;
  cfg.tau_s = 0.5;
  cfg.tau_k_prime = 1;
  auto lists = qmm_link(stream, p, cfg);

  bool ok = lists.size() == 3;
  auto expect = [&](int idx, int id, std::vector<int> frames, const Vec& q) {
    if (!ok) return;
    if (lists[idx].id != id || lists[idx].entries.size() != frames.size()) {
      ok = false;
      return;
    }
    for (size_t i = 0; i < frames.size(); ++i)
      if (lists[idx].entries[i].frame != frames[i] ||
          lists[idx].entries[i].detection.query != q)
        ok = false;
  };
  expect(0, 0, {0, 1, 2, 3}, A);
  expect(1, 1, {0, 1, 3}, B);
  expect(2, 2, {1, 2, 3}, C);
  report(9, "qmm_link reproduces the hand-traced golden fixture", ok);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <cli-binary> <configs-dir>\n";
    return 2;
  }
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8(argv[1], argv[2]);
  criterion9();
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
