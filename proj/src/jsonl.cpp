#include "tubelink/jsonl.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace tubelink {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

[[noreturn]] void schema_error(const std::string& what, int line) {
  throw TubelinkError(ErrorCode::SchemaViolation,
                      "line " + std::to_string(line) + ": " + what, line);
}

json parse_line(const std::string& line, int lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) schema_error("malformed JSON", lineno);
  return j;
}

BBox parse_box(const json& j, int lineno) {
  if (!j.is_array() || j.size() != 4) schema_error("box must be [x1,y1,x2,y2]", lineno);
  BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) schema_error("box must satisfy x1<x2 and y1<y2", lineno);
  return b;
}

void append_box(std::string& s, const BBox& b) {
  s += '[';
  s += format_double(b.x1); s += ',';
  s += format_double(b.y1); s += ',';
  s += format_double(b.x2); s += ',';
  s += format_double(b.y2); s += ']';
}

void append_vec(std::string& s, const std::vector<double>& v) {
  s += '[';
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  s += ']';
}

template <typename F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, lineno);
    // Provenance header emitted by the CLI; not a record.
    if (j.is_object() && j.size() == 1 && j.contains("header")) continue;
    f(j, lineno);
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TubelinkError(ErrorCode::MissingFile, "cannot open " + path);
  return in;
}

}  // namespace

std::vector<DetectionRecord> read_detections(std::istream& in) {
  std::vector<DetectionRecord> recs;
  size_t n_scores = 0, dim = 0;
  for_each_line(in, [&](const json& j, int lineno) {
    DetectionRecord r;
    if (!j.contains("frame") || !j.contains("box") || !j.contains("scores") ||
        !j.contains("query"))
      schema_error("detection needs frame, box, scores, query", lineno);
    r.frame = j["frame"].get<int>();
    if (r.frame < 0) schema_error("frame must be >= 0", lineno);
    r.box = parse_box(j["box"], lineno);
    r.class_scores = j["scores"].get<std::vector<double>>();
    for (double s : r.class_scores)
      if (s < 0 || s > 1) schema_error("scores must be in [0,1]", lineno);
    r.query = j["query"].get<std::vector<double>>();
    if (r.query.empty()) schema_error("query must be non-empty", lineno);
    if (j.contains("gt_person") && !j["gt_person"].is_null())
      r.gt_person = j["gt_person"].get<int>();
    if (j.contains("gt_action") && !j["gt_action"].is_null())
      r.gt_action = j["gt_action"].get<int>();
    if (recs.empty()) {
      n_scores = r.class_scores.size();
      dim = r.query.size();
    } else {
      if (r.class_scores.size() != n_scores)
        schema_error("scores length differs from earlier records", lineno);
      if (r.query.size() != dim)
        schema_error("query dimension differs from earlier records", lineno);
      if (r.frame < recs.back().frame)
        schema_error("records must be sorted by frame", lineno);
    }
    recs.push_back(std::move(r));
  });
  return recs;
}

void write_detections(std::ostream& out, const std::vector<DetectionRecord>& recs) {
  for (const auto& r : recs) {
    std::string s = "{\"frame\":" + std::to_string(r.frame) + ",\"box\":";
    append_box(s, r.box);
    s += ",\"scores\":";
    append_vec(s, r.class_scores);
    s += ",\"query\":";
    append_vec(s, r.query);
    s += ",\"gt_person\":" + std::to_string(r.gt_person);
    s += ",\"gt_action\":" + std::to_string(r.gt_action);
    s += "}\n";
    out << s;
  }
}

std::vector<GroundTruthTube> read_gt(std::istream& in) {
  std::vector<GroundTruthTube> gts;
  for_each_line(in, [&](const json& j, int lineno) {
    GroundTruthTube g;
    if (!j.contains("person_id") || !j.contains("entries"))
      schema_error("gt tube needs person_id, entries", lineno);
    g.person_id = j["person_id"].get<int>();
    for (const auto& e : j["entries"]) {
      int frame = e["frame"].get<int>();
      if (g.entries.count(frame)) schema_error("duplicate gt frame", lineno);
      g.entries[frame] = {parse_box(e["box"], lineno), e["action"].get<int>()};
    }
    if (g.entries.empty()) schema_error("gt tube must have entries", lineno);
    gts.push_back(std::move(g));
  });
  return gts;
}

void write_gt(std::ostream& out, const std::vector<GroundTruthTube>& gts) {
  for (const auto& g : gts) {
    std::string s = "{\"person_id\":" + std::to_string(g.person_id) + ",\"entries\":[";
    bool first = true;
    for (const auto& [t, e] : g.entries) {
      if (!first) s += ',';
      first = false;
      s += "{\"frame\":" + std::to_string(t) + ",\"box\":";
      append_box(s, e.box);
      s += ",\"action\":" + std::to_string(e.action) + "}";
    }
    s += "]}\n";
    out << s;
  }
}

std::vector<Tube> read_tubes(std::istream& in) {
  std::vector<Tube> tubes;
  for_each_line(in, [&](const json& j, int lineno) {
    Tube t;
    t.person_id = j["person_id"].get<int>();
    t.action = j["action"].get<int>();
    t.score = j["score"].get<double>();
    if (t.score < 0 || t.score > 1) schema_error("tube score must be in [0,1]", lineno);
    for (const auto& e : j["boxes"])
      t.boxes[e["frame"].get<int>()] = parse_box(e["box"], lineno);
    if (t.boxes.empty()) schema_error("tube must have boxes", lineno);
    tubes.push_back(std::move(t));
  });
  return tubes;
}

void write_tubes(std::ostream& out, const std::vector<Tube>& tubes) {
  for (const auto& t : tubes) {
    std::string s = "{\"person_id\":" + std::to_string(t.person_id) +
                    ",\"action\":" + std::to_string(t.action) +
                    ",\"score\":" + format_double(t.score) + ",\"boxes\":[";
    bool first = true;
    for (const auto& [frame, b] : t.boxes) {
      if (!first) s += ',';
      first = false;
      s += "{\"frame\":" + std::to_string(frame) + ",\"box\":";
      append_box(s, b);
      s += "}";
    }
    s += "]}\n";
    out << s;
  }
}

std::vector<TrackList> read_tracks(std::istream& in) {
  std::vector<TrackList> tracks;
  for_each_line(in, [&](const json& j, int lineno) {
    TrackList t;
    t.id = j["id"].get<int>();
    int prev = -1;
    for (const auto& e : j["entries"]) {
      TrackEntry te;
      te.frame = e["frame"].get<int>();
      if (te.frame <= prev) schema_error("track frames must be strictly increasing", lineno);
      prev = te.frame;
      const auto& d = e["detection"];
      te.detection.frame = te.frame;
      te.detection.box = parse_box(d["box"], lineno);
      te.detection.class_scores = d["scores"].get<std::vector<double>>();
      te.detection.query = d["query"].get<std::vector<double>>();
      if (d.contains("gt_person")) te.detection.gt_person = d["gt_person"].get<int>();
      if (d.contains("gt_action")) te.detection.gt_action = d["gt_action"].get<int>();
      t.entries.push_back(std::move(te));
    }
    if (t.entries.empty()) schema_error("track must have entries", lineno);
    tracks.push_back(std::move(t));
  });
  return tracks;
}

void write_tracks(std::ostream& out, const std::vector<TrackList>& tracks) {
  for (const auto& t : tracks) {
    std::string s = "{\"id\":" + std::to_string(t.id) + ",\"entries\":[";
    bool first = true;
    for (const auto& e : t.entries) {
      if (!first) s += ',';
      first = false;
      s += "{\"frame\":" + std::to_string(e.frame) + ",\"detection\":{\"box\":";
      append_box(s, e.detection.box);
      s += ",\"scores\":";
      append_vec(s, e.detection.class_scores);
      s += ",\"query\":";
      append_vec(s, e.detection.query);
      s += ",\"gt_person\":" + std::to_string(e.detection.gt_person);
      s += ",\"gt_action\":" + std::to_string(e.detection.gt_action);
      s += "}}";
    }
    s += "]}\n";
    out << s;
  }
}

DetectionStream group_by_frame(const std::vector<DetectionRecord>& recs) {
  DetectionStream s;
  for (const auto& r : recs) {
    if (s.frames.empty() || s.frames.back() != r.frame) {
      s.frames.push_back(r.frame);
      s.per_frame.emplace_back();
    }
    s.per_frame.back().push_back(r);
  }
  return s;
}

std::vector<DetectionRecord> read_detections_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_detections(in);
}
std::vector<GroundTruthTube> read_gt_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_gt(in);
}
std::vector<Tube> read_tubes_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_tubes(in);
}
std::vector<TrackList> read_tracks_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_tracks(in);
}

}  // namespace tubelink
