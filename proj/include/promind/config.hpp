#pragma once

#include <filesystem>
#include <string>

#include "promind/factors.hpp"
#include "promind/time.hpp"

namespace promind {

struct AgentSettings {
  Duration grace{15 * 60};          // after execution time, before a task expires
  Duration event_spacing{5 * 60};   // offset between reminders of an event-based task
  double proximity_radius_m = 100.0;

  bool operator==(const AgentSettings&) const = default;
};

struct LearningSettings {
  double alpha = 0.2;   // EMA learning rate, in (0,1]
  double lambda = 0.3;  // preference blend factor, in [0,1]

  bool operator==(const LearningSettings&) const = default;
};

struct Config {
  CountTable counts;
  ModalityTable modality = ModalityTable::defaults();
  Weights weights;
  AgentSettings agent;
  LearningSettings learning;

  bool operator==(const Config&) const = default;
};

/// All invariant violations of a configuration, including the factor tables.
std::vector<std::string> validate_config(const Config& config);

/// Caps the reminder count at `n` (>= 1), lowering table entries above it so
/// the table stays valid.
Config with_max_count(Config config, int n);

/// Parses a JSON configuration. Absent sections and fields keep their defaults.
/// Throws Error(InvalidArgument) listing every violation.
Config parse_config(const std::string& json_text);
Config load_config(const std::filesystem::path& path);
std::string dump_config(const Config& config);

}  // namespace promind
