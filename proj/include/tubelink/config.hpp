#pragma once

#include <map>
#include <string>

#include "tubelink/encoder.hpp"
#include "tubelink/linking.hpp"
#include "tubelink/scoring.hpp"
#include "tubelink/sim.hpp"

namespace tubelink {

/// Flat `key = value` config file; '#' starts a comment.
struct FlatConfig {
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string get(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  bool get_bool(const std::string& key, bool def) const;
};

FlatConfig parse_config(std::istream& in);
FlatConfig parse_config_file(const std::string& path);

/// FNV-1a over the sorted canonical key=value form.
std::string config_hash(const FlatConfig& cfg);

ScenarioConfig scenario_config(const FlatConfig& cfg, uint64_t seed);
LinkConfig link_config(const FlatConfig& cfg);
TrainConfig train_config(const FlatConfig& cfg, uint64_t seed);
ScoringConfig scoring_config(const FlatConfig& cfg);

}  // namespace tubelink
