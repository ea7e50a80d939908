#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tubelink/config.hpp"
#include "tubelink/eval.hpp"
#include "tubelink/jsonl.hpp"
#include "tubelink/kernels.hpp"

namespace fs = std::filesystem;
using namespace tubelink;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string header_line(const std::string& command, const std::string& cfg_hash,
                        uint64_t seed) {
  return "{\"header\":{\"tool\":\"tubelink\",\"version\":\"" + std::string(kVersion) +
         "\",\"command\":\"" + command + "\",\"config_hash\":\"" + cfg_hash +
         "\",\"seed\":" + std::to_string(seed) + "}}\n";
}

std::string header_object(const std::string& command, const std::string& cfg_hash,
                          uint64_t seed) {
  return "{\"tool\":\"tubelink\",\"version\":\"" + std::string(kVersion) +
         "\",\"command\":\"" + command + "\",\"config_hash\":\"" + cfg_hash +
         "\",\"seed\":" + std::to_string(seed) + "}";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TubelinkError(ErrorCode::MissingFile, "cannot write " + path);
  return out;
}

// Re-derive person labels from GT boxes when a gt file is supplied.
void relabel_from_gt(std::vector<DetectionRecord>& recs,
                     const std::vector<GroundTruthTube>& gts, double tau_iou) {
  auto stream = group_by_frame(recs);
  size_t idx = 0;
  for (size_t fi = 0; fi < stream.frames.size(); ++fi) {
    auto labels = assign_person_ids(stream.per_frame[fi], gts, tau_iou);
    for (size_t i = 0; i < labels.size(); ++i) recs[idx++].gt_person = labels[i];
  }
}

int cmd_simulate(const std::string& config_path, uint64_t seed, const std::string& out_dir) {
  FlatConfig cfg = parse_config_file(config_path);
  const std::string hash = config_hash(cfg);
  Scenario sc = generate_scenario(scenario_config(cfg, seed));
  fs::create_directories(out_dir);

  auto det = open_out(out_dir + "/detections.jsonl");
  det << header_line("simulate", hash, seed);
  write_detections(det, sc.detections);

  auto gt = open_out(out_dir + "/gt.jsonl");
  gt << header_line("simulate", hash, seed);
  write_gt(gt, sc.gts);

  auto echo = open_out(out_dir + "/scenario.json");
  echo << "{\"header\":" << header_object("simulate", hash, seed) << ",\"config\":{";
  bool first = true;
  for (const auto& [k, v] : cfg.kv) {
    if (!first) echo << ',';
    first = false;
    echo << "\"" << k << "\":\"" << v << "\"";
  }
  echo << "}}\n";
  return 0;
}

int cmd_train(const std::string& clips_path, const std::string& gt_path,
              const std::string& config_path, uint64_t seed, const std::string& out) {
  FlatConfig cfg = parse_config_file(config_path);
  const std::string hash = config_hash(cfg);
  TrainConfig tc = train_config(cfg, seed);
  LinkConfig lc = link_config(cfg);

  auto recs = read_detections_file(clips_path);
  if (!gt_path.empty()) relabel_from_gt(recs, read_gt_file(gt_path), tc.tau_iou);
  auto stream = group_by_frame(recs);
  auto clips = clips_from_stream(stream, lc.person_class_index, lc.tau_p, tc.clip_len);
  if (clips.empty())
    throw TubelinkError(ErrorCode::ConfigError, "train: no usable clips in input");

  const int d = static_cast<int>(recs.front().query.size());
  const int h = cfg.get_int("train.hidden_dim", d);
  const int m = cfg.get_int("train.embed_dim", d);
  EncoderParams init = init_encoder(d, h, m, seed);
  TrainReport report;
  EncoderParams trained = train_encoder(clips, tc, init, &report);

  auto f = open_out(out);
  std::string params = encoder_to_json(trained);
  params.pop_back();  // strip closing brace, append echo fields
  params += ",\"header\":" + header_object("train", hash, seed);
  params += ",\"train_config\":{\"tau_iou\":" + format_double(tc.tau_iou) +
            ",\"tau_t\":" + format_double(tc.tau_t) +
            ",\"epochs\":" + std::to_string(tc.epochs) +
            ",\"clip_len\":" + std::to_string(tc.clip_len) +
            ",\"learning_rate\":" + format_double(tc.learning_rate) +
            ",\"lr_decay_epoch\":" + std::to_string(tc.lr_decay_epoch) +
            ",\"literal_outer_sum\":" + (tc.literal_outer_sum ? "true" : "false") + "}";
  params += ",\"epoch_loss\":[";
  for (size_t i = 0; i < report.epoch_loss.size(); ++i) {
    if (i) params += ',';
    params += format_double(report.epoch_loss[i]);
  }
  params += "]}\n";
  f << params;
  return 0;
}

int cmd_link(const std::string& det_path, const std::string& method,
             const std::string& params_path, double iou_threshold,
             const std::string& config_path, uint64_t seed, const std::string& out) {
  FlatConfig cfg = parse_config_file(config_path);
  const std::string hash = config_hash(cfg);
  LinkConfig lc = link_config(cfg);
  auto stream = group_by_frame(read_detections_file(det_path));

  std::vector<TrackList> tracks;
  if (method == "qmm") {
    if (params_path.empty())
      throw TubelinkError(ErrorCode::ConfigError, "link --method qmm needs --params");
    tracks = qmm_link(stream, read_encoder_file(params_path), lc);
  } else if (method == "iou") {
    if (!cfg.has("link.max_gap")) lc.max_gap = 0;
    const double lt = iou_threshold >= 0 ? iou_threshold
                                         : cfg.get_double("link.iou_threshold", 0.5);
    tracks = iou_link(stream, lt, lc);
  } else {
    throw TubelinkError(ErrorCode::Usage, "unknown link method: " + method);
  }

  auto f = open_out(out);
  f << header_line("link", hash, seed);
  write_tracks(f, tracks);
  return 0;
}

int cmd_score(const std::string& tracks_path, const std::string& gt_path,
              const std::string& config_path, uint64_t seed, const std::string& out) {
  FlatConfig cfg = parse_config_file(config_path);
  const std::string hash = config_hash(cfg);
  ScoringConfig sc = scoring_config(cfg);
  TrainConfig tc = train_config(cfg, seed);
  const int num_actions = cfg.get_int("num_actions", 4) + 1;
  const double sigma = cfg.get_double("score.sigma", 0);
  const bool one_hot = cfg.get_bool("score.one_hot", false);

  auto tracks = read_tracks_file(tracks_path);
  auto gts = read_gt_file(gt_path);

  std::vector<Tube> tubes;
  for (const auto& t : tracks) {
    auto seq = oracle_scorer(t, gts, tc.tau_iou, num_actions, sigma,
                             substream_seed(seed, "score." + std::to_string(t.id)),
                             one_hot);
    for (auto& tube : build_tubes(t, seq, sc)) tubes.push_back(std::move(tube));
  }

  auto f = open_out(out);
  f << header_line("score", hash, seed);
  write_tubes(f, tubes);
  return 0;
}

int cmd_eval(const std::string& metric, const std::string& gt_path,
             const std::string& tracks_path, const std::string& tubes_path,
             std::vector<double> thetas, int keyframe_stride,
             const std::string& config_path, uint64_t seed, const std::string& out) {
  FlatConfig cfg = parse_config_file(config_path);
  const std::string hash = config_hash(cfg);
  auto gts = read_gt_file(gt_path);
  const int no_action = cfg.get_int("num_actions", 4);
  if (thetas.empty()) thetas = {cfg.get_double("eval.theta", 0.5)};

  std::string json_body, text;
  if (metric == "recall") {
    if (tracks_path.empty())
      throw TubelinkError(ErrorCode::Usage, "eval --metric recall needs --tracks");
    auto tracks = read_tracks_file(tracks_path);
    RecallReport rep;
    for (double theta : thetas) {
      RecallRow row = tube_recall(gts, tracks, theta);
      row.linker = fs::path(tracks_path).stem().string();
      rep.rows.push_back(std::move(row));
    }
    json_body = recall_report_json(rep);
    text = recall_report_text(rep);
  } else if (metric == "vmap" || metric == "fmap") {
    if (tubes_path.empty())
      throw TubelinkError(ErrorCode::Usage, "eval --metric vmap/fmap needs --tubes");
    auto tubes = read_tubes_file(tubes_path);
    APReport rep;
    if (metric == "vmap") {
      rep = video_map(gts, tubes, thetas[0], no_action);
    } else {
      std::set<int> keyframes;
      for (const auto& g : gts)
        for (const auto& [t, e] : g.entries)
          if (t % keyframe_stride == 0) keyframes.insert(t);
      rep = frame_map(gts, tubes, thetas[0], keyframes, no_action);
    }
    json_body = ap_report_json(rep, metric);
    text = ap_report_text(rep, metric);
  } else {
    throw TubelinkError(ErrorCode::Usage, "unknown metric: " + metric);
  }

  auto f = open_out(out);
  f << "{\"header\":" << header_object("eval", hash, seed) << ",\"report\":" << json_body
    << "}\n";
  std::cout << text;
  return 0;
}

int cmd_compare(const std::string& det_path, const std::string& gt_path,
                const std::string& params_path, std::vector<double> iou_thresholds,
                double theta, const std::string& config_path, uint64_t seed,
                const std::string& out) {
  FlatConfig cfg = parse_config_file(config_path);
  const std::string hash = config_hash(cfg);
  if (iou_thresholds.empty()) iou_thresholds = {0.25, 0.5, 0.75};

  Scenario sc;
  sc.detections = read_detections_file(det_path);
  sc.gts = read_gt_file(gt_path);
  auto encoder = read_encoder_file(params_path);
  RecallReport rep =
      compare_linkers(sc, encoder, link_config(cfg), iou_thresholds, theta);

  auto f = open_out(out);
  f << "{\"header\":" << header_object("compare", hash, seed)
    << ",\"report\":" << recall_report_json(rep) << "}\n";
  std::cout << recall_report_text(rep);
  return 0;
}

int cmd_plot_data(const std::vector<std::string>& recall_reports,
                  const std::string& train_report, const std::string& out) {
  auto f = open_out(out);
  f << "series,x,y\n";
  for (const auto& path : recall_reports) {
    std::ifstream in(path);
    if (!in) throw TubelinkError(ErrorCode::MissingFile, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto j = nlohmann::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.contains("report"))
      throw TubelinkError(ErrorCode::SchemaViolation, "not a report file: " + path);
    for (const auto& row : j["report"]["rows"])
      f << row["linker"].get<std::string>() << "," << format_double(row["theta"].get<double>())
        << "," << format_double(row["recall"].get<double>()) << "\n";
  }
  if (!train_report.empty()) {
    std::ifstream in(train_report);
    if (!in) throw TubelinkError(ErrorCode::MissingFile, "cannot open " + train_report);
    std::stringstream ss;
    ss << in.rdbuf();
    auto j = nlohmann::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.contains("epoch_loss"))
      throw TubelinkError(ErrorCode::SchemaViolation, "not a train output: " + train_report);
    int epoch = 1;
    for (const auto& v : j["epoch_loss"])
      f << "loss," << epoch++ << "," << format_double(v.get<double>()) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-tube linking and evaluation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out, out_dir, det_path, gt_path, tracks_path, tubes_path,
      params_path, method = "qmm", metric = "recall", train_report;
  std::vector<std::string> recall_reports;
  std::vector<double> thetas, iou_thresholds;
  double iou_threshold = -1, theta = 0.5;
  int keyframe_stride = 1;
  uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
  sim->add_option("--config", config_path)->required();
  sim->add_option("--seed", seed);
  sim->add_option("--out-dir", out_dir)->required();

  auto* train = app.add_subcommand("train", "Train the person-feature encoder");
  train->add_option("--clips", det_path)->required();
  train->add_option("--gt", gt_path);
  train->add_option("--config", config_path)->required();
  train->add_option("--seed", seed);
  train->add_option("--out", out)->required();

  auto* link = app.add_subcommand("link", "Link detections into track lists");
  link->add_option("--detections", det_path)->required();
  link->add_option("--method", method)->check(CLI::IsMember({"qmm", "iou"}));
  link->add_option("--params", params_path);
  link->add_option("--iou-threshold", iou_threshold);
  link->add_option("--config", config_path)->required();
  link->add_option("--seed", seed);
  link->add_option("--out", out)->required();

  auto* score = app.add_subcommand("score", "Score tracks and build tubes");
  score->add_option("--tracks", tracks_path)->required();
  score->add_option("--gt", gt_path)->required();
  score->add_option("--config", config_path)->required();
  score->add_option("--seed", seed);
  score->add_option("--out", out)->required();

  auto* ev = app.add_subcommand("eval", "Evaluate tracks or tubes against GT");
  ev->add_option("--metric", metric)->check(CLI::IsMember({"recall", "vmap", "fmap"}));
  ev->add_option("--gt", gt_path)->required();
  ev->add_option("--tracks", tracks_path);
  ev->add_option("--tubes", tubes_path);
  ev->add_option("--theta", thetas);
  ev->add_option("--keyframe-stride", keyframe_stride);
  ev->add_option("--config", config_path)->required();
  ev->add_option("--seed", seed);
  ev->add_option("--out", out)->required();

  auto* cmp = app.add_subcommand("compare", "QMM vs IoU-linking recall table");
  cmp->add_option("--detections", det_path)->required();
  cmp->add_option("--gt", gt_path)->required();
  cmp->add_option("--params", params_path)->required();
  cmp->add_option("--iou-thresholds", iou_thresholds);
  cmp->add_option("--theta", theta);
  cmp->add_option("--config", config_path)->required();
  cmp->add_option("--seed", seed);
  cmp->add_option("--out", out)->required();

  auto* plot = app.add_subcommand("plot-data", "Flatten reports into tidy CSV");
  plot->add_option("--recall-report", recall_reports);
  plot->add_option("--train-report", train_report);
  plot->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, seed, out_dir);
    if (train->parsed()) return cmd_train(det_path, gt_path, config_path, seed, out);
    if (link->parsed())
      return cmd_link(det_path, method, params_path, iou_threshold, config_path, seed, out);
    if (score->parsed()) return cmd_score(tracks_path, gt_path, config_path, seed, out);
    if (ev->parsed())
      return cmd_eval(metric, gt_path, tracks_path, tubes_path, thetas, keyframe_stride,
                      config_path, seed, out);
    if (cmp->parsed())
      return cmd_compare(det_path, gt_path, params_path, iou_thresholds, theta,
                         config_path, seed, out);
    if (plot->parsed()) return cmd_plot_data(recall_reports, train_report, out);
  } catch (const TubelinkError& e) {
    std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":" << static_cast<int>(e.code())
              << ",\"line\":" << e.line() << "}\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":1,\"line\":-1}\n";
    return 1;
  }
  return 0;
}
