#pragma once

// Virtual-clock harness: runs planner + agent against scripted or random
// user behaviour and measures completion against reminders fired.
// Never reads the wall clock.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "promind/agent.hpp"
#include "promind/config.hpp"
#include "promind/geo.hpp"
#include "promind/task.hpp"
#include "promind/time.hpp"

namespace promind {

struct UserPolicy {
  enum class Kind {
    AlwaysAcceptFirst,
    AcceptWithProbability,
    BusyUntil,
    AlwaysIgnore,
    PostponeOnceThenAccept,
  };

  Kind kind = Kind::AlwaysAcceptFirst;
  double probability = 0.5;  // AcceptWithProbability
  Timestamp until;           // BusyUntil
  bool then_accept = true;   // BusyUntil
  Duration delay{600};       // PostponeOnceThenAccept
  std::uint64_t seed = 0;    // mixed into the task's random stream

  bool operator==(const UserPolicy&) const = default;
};

std::string_view to_string(UserPolicy::Kind k);
std::optional<UserPolicy::Kind> parse_policy_kind(std::string_view s);

struct ScenarioTask {
  ProMTask task;
  UserPolicy policy;
};

struct Scenario {
  std::string name;
  std::optional<Timestamp> start;  // defaults to the earliest timestamp in the scenario
  std::optional<GeoPoint> current_location;
  TravelMode mode = TravelMode::Walk;
  std::vector<ScenarioTask> tasks;
  std::vector<TriggerEvent> events;
  Config config;
};

struct TraceEvent {
  enum class Kind { Fire, Accept, Postpone, Ignore, Latch, Completed, Expired };

  Timestamp at;
  std::string task_id;
  Kind kind = Kind::Fire;
  int index = -1;      // Fire and responses
  std::string detail;  // modality, delay, trigger

  bool operator==(const TraceEvent&) const = default;
};

std::string_view to_string(TraceEvent::Kind k);

struct SimReport {
  int tasks_total = 0;
  int tasks_completed = 0;
  int reminders_fired = 0;
  Duration mean_time_to_accept{0};  // first fire to Accept, over completed tasks
  int expired_count = 0;
  int cancelled_count = 0;
  int pending_count = 0;  // event tasks whose cue never came, and the like
  std::vector<TraceEvent> event_trace;

  bool operator==(const SimReport&) const = default;
};

/// One line per trace event.
std::string format_trace(const SimReport& report);

/// Throws Error(InvalidArgument) for malformed scenarios before running
/// anything.
SimReport run(const Scenario& scenario, std::uint64_t seed, Duration tick_step = Duration{1});

/// Throws Error(Rejected) when no event-based task in the scenario could
/// react to the event.
Scenario inject_event(Scenario scenario, const TriggerEvent& event);

struct CompareRow {
  std::string label;
  SimReport report;
};

std::vector<CompareRow> compare(const Scenario& scenario,
                                const std::vector<std::pair<std::string, Config>>& configs,
                                std::uint64_t seed, Duration tick_step = Duration{1});

void write_table(std::ostream& out, const std::vector<CompareRow>& rows);
void write_csv(std::ostream& out, const std::vector<CompareRow>& rows);

/// Scenario file format (see docs/scenario.md). `base` supplies the tables
/// that the scenario's own "config" section overlays.
Scenario parse_scenario(const nlohmann::json& j, const Config& base = {});
Scenario load_scenario(const std::filesystem::path& path, const Config& base = {});

}  // namespace promind
