#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tubelink/types.hpp"

namespace tubelink {

enum class ErrorCode : int {
  Ok = 0,
  Usage = 1,
  MissingFile = 2,
  SchemaViolation = 3,
  DimensionMismatch = 4,
  ConfigError = 5,
};

/// Error with a stable category code and, for file input, the offending line.
class TubelinkError : public std::runtime_error {
 public:
  TubelinkError(ErrorCode code, std::string msg, int line = -1)
      : std::runtime_error(std::move(msg)), code_(code), line_(line) {}
  ErrorCode code() const { return code_; }
  int line() const { return line_; }

 private:
  ErrorCode code_;
  int line_;
};

// Deterministic number formatting: shortest representation that
// round-trips a double exactly.
std::string format_double(double v);

std::vector<DetectionRecord> read_detections(std::istream& in);
std::vector<DetectionRecord> read_detections_file(const std::string& path);
void write_detections(std::ostream& out, const std::vector<DetectionRecord>& recs);

std::vector<GroundTruthTube> read_gt(std::istream& in);
std::vector<GroundTruthTube> read_gt_file(const std::string& path);
void write_gt(std::ostream& out, const std::vector<GroundTruthTube>& gts);

std::vector<Tube> read_tubes(std::istream& in);
std::vector<Tube> read_tubes_file(const std::string& path);
void write_tubes(std::ostream& out, const std::vector<Tube>& tubes);

std::vector<TrackList> read_tracks(std::istream& in);
std::vector<TrackList> read_tracks_file(const std::string& path);
void write_tracks(std::ostream& out, const std::vector<TrackList>& tracks);

/// Group flat records into a per-frame stream; records must be sorted by frame.
DetectionStream group_by_frame(const std::vector<DetectionRecord>& recs);

}  // namespace tubelink
