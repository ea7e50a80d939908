#include "tubelink/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tubelink/jsonl.hpp"

namespace tubelink {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void config_error(const std::string& what) {
  throw TubelinkError(ErrorCode::ConfigError, what);
}

}  // namespace

std::string FlatConfig::get(const std::string& key, const std::string& def) const {
  auto it = kv.find(key);
  return it == kv.end() ? def : it->second;
}

double FlatConfig::get_double(const std::string& key, double def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    config_error("config key '" + key + "': not a number: " + it->second);
  }
}

int FlatConfig::get_int(const std::string& key, int def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    config_error("config key '" + key + "': not an integer: " + it->second);
  }
}

bool FlatConfig::get_bool(const std::string& key, bool def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  config_error("config key '" + key + "': not a boolean: " + it->second);
}

FlatConfig parse_config(std::istream& in) {
  FlatConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      config_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error("config line " + std::to_string(lineno) + ": empty key");
    cfg.kv[key] = value;
  }
  return cfg;
}

FlatConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TubelinkError(ErrorCode::MissingFile, "cannot open " + path);
  return parse_config(in);
}

std::string config_hash(const FlatConfig& cfg) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  };
  for (const auto& [k, v] : cfg.kv) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

Trajectory parse_trajectory(const std::string& s) {
  if (s == "stationary") return Trajectory::Stationary;
  if (s == "linear") return Trajectory::Linear;
  if (s == "bounce") return Trajectory::Bounce;
  if (s == "teleport") return Trajectory::Teleport;
  config_error("unknown trajectory kind: " + s);
}

// "start:end:class,start:end:class"
std::vector<ActionSpan> parse_actions(const std::string& s) {
  std::vector<ActionSpan> spans;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    ActionSpan span;
    if (std::sscanf(item.c_str(), "%d:%d:%d", &span.start, &span.end, &span.action) != 3)
      config_error("bad action span (want start:end:class): " + item);
    spans.push_back(span);
  }
  return spans;
}

}  // namespace

ScenarioConfig scenario_config(const FlatConfig& cfg, uint64_t seed) {
  ScenarioConfig sc;
  sc.frames = cfg.get_int("frames", sc.frames);
  sc.width = cfg.get_double("width", sc.width);
  sc.height = cfg.get_double("height", sc.height);
  sc.camera_dx = cfg.get_double("camera_dx", 0);
  sc.camera_dy = cfg.get_double("camera_dy", 0);
  sc.fps_stride = cfg.get_int("fps_stride", 1);
  sc.distractor_rate = cfg.get_double("distractor_rate", 0);
  sc.identity_dim = cfg.get_int("identity_dim", sc.identity_dim);
  sc.confounder_dim = cfg.get_int("confounder_dim", sc.confounder_dim);
  sc.confounder_scale = cfg.get_double("confounder_scale", sc.confounder_scale);
  sc.noise_sigma = cfg.get_double("noise_sigma", 0);
  sc.dropout = cfg.get_double("dropout", 0);
  sc.num_actions = cfg.get_int("num_actions", sc.num_actions);
  sc.true_score_lo = cfg.get_double("true_score_lo", sc.true_score_lo);
  sc.true_score_hi = cfg.get_double("true_score_hi", sc.true_score_hi);
  sc.distractor_score_lo = cfg.get_double("distractor_score_lo", sc.distractor_score_lo);
  sc.distractor_score_hi = cfg.get_double("distractor_score_hi", sc.distractor_score_hi);
  sc.seed = seed;
  const int n = cfg.get_int("persons", 1);
  for (int i = 0; i < n; ++i) {
    const std::string p = "person." + std::to_string(i) + ".";
    PersonSpec ps;
    ps.box_w = cfg.get_double(p + "box_w", ps.box_w);
    ps.box_h = cfg.get_double(p + "box_h", ps.box_h);
    ps.trajectory = parse_trajectory(cfg.get(p + "trajectory", "stationary"));
    ps.vx = cfg.get_double(p + "vx", 0);
    ps.vy = cfg.get_double(p + "vy", 0);
    ps.teleport_period = cfg.get_int(p + "teleport_period", ps.teleport_period);
    if (cfg.has(p + "actions")) ps.actions = parse_actions(cfg.get(p + "actions", ""));
    sc.persons.push_back(ps);
  }
  return sc;
}

LinkConfig link_config(const FlatConfig& cfg) {
  LinkConfig lc;
  lc.tau_p = cfg.get_double("link.tau_p", lc.tau_p);
  lc.tau_s = cfg.get_double("link.tau_s", lc.tau_s);
  lc.tau_k_prime = cfg.get_int("link.tau_k_prime", lc.tau_k_prime);
  lc.person_class_index = cfg.get_int("link.person_class_index", 0);
  if (cfg.has("link.max_gap") && cfg.get("link.max_gap", "") != "unlimited")
    lc.max_gap = cfg.get_int("link.max_gap", lc.max_gap);
  return lc;
}

TrainConfig train_config(const FlatConfig& cfg, uint64_t seed) {
  TrainConfig tc;
  tc.tau_iou = cfg.get_double("train.tau_iou", tc.tau_iou);
  tc.tau_t = cfg.get_double("train.tau_t", tc.tau_t);
  tc.epochs = cfg.get_int("train.epochs", tc.epochs);
  tc.clip_len = cfg.get_int("train.clip_len", tc.clip_len);
  tc.learning_rate = cfg.get_double("train.learning_rate", tc.learning_rate);
  tc.lr_decay_epoch = cfg.get_int("train.lr_decay_epoch", tc.lr_decay_epoch);
  tc.literal_outer_sum = cfg.get_bool("train.literal_outer_sum", false);
  tc.seed = seed;
  if (tc.tau_t <= 0) config_error("train.tau_t must be > 0");
  return tc;
}

ScoringConfig scoring_config(const FlatConfig& cfg) {
  ScoringConfig sc;
  sc.k = cfg.get_int("score.k", sc.k);
  sc.tau_k = cfg.get_int("score.tau_k", sc.tau_k);
  sc.fill_gaps = cfg.get_bool("score.fill_gaps", false);
  sc.drop_below_none = cfg.get_bool("score.drop_below_none", false);
  return sc;
}

}  // namespace tubelink
