#pragma once

// The reminder engine: owns every task, its agent state and the user's
// preference state, and records each change in the journal. The daemon,
// the CLI and the persistence tests all drive this one code path.
//
// Not thread-safe; callers serialize commands (the service holds a mutex).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "promind/agent.hpp"
#include "promind/config.hpp"
#include "promind/planner.hpp"
#include "promind/store.hpp"
#include "promind/task.hpp"
#include "promind/user_model.hpp"

namespace promind {

/// Planner output adapted to the learned preferences. Shared by the engine
/// and by `promind plan`.
ReminderPlan plan_task(const ProMTask& task, const Config& config, const PreferenceState& prefs,
                       const PlanContext& context);

/// Task as seen through the API: the intention, its plan and its stage.
struct TaskView {
  ProMTask task;
  AgentState state;

  bool operator==(const TaskView&) const = default;
};

nlohmann::json to_api_json(const TaskView& view);

/// Everything that must survive a restart.
struct EngineState {
  std::vector<std::string> order;  // task ids in creation order
  std::map<std::string, ProMTask> tasks;
  std::map<std::string, AgentState> agents;
  PreferenceState preferences;
  std::uint64_t next_id = 1;

  bool operator==(const EngineState&) const = default;
};

void to_json(nlohmann::json& j, const EngineState& s);
void from_json(const nlohmann::json& j, EngineState& s);

class Engine {
 public:
  Engine(Config config, Journal& journal);

  /// Rebuilds state from an optional snapshot plus the journal entries after
  /// it. Falls back to a full replay when the snapshot is ahead of the journal.
  /// Returns a description of any fallback taken (empty when none).
  std::string recover(const std::optional<Snapshot>& snapshot);

  Snapshot snapshot() const;

  /// The descriptor's id is ignored; the engine assigns one.
  TaskView create_task(ProMTask descriptor, Timestamp now);
  TaskView update_task(const std::string& id, const TaskEdits& edits, Timestamp now);
  TaskView cancel_task(const std::string& id, Timestamp now);
  TaskView respond(const std::string& id, const UserResponse& response);

  /// Records the user's position, fires location triggers of event-based
  /// tasks and re-plans travel for time-based tasks that have not started.
  std::vector<AgentAction> update_location(const GeoPoint& point, Timestamp now);
  /// Non-location cues, e.g. the user calling a contact.
  std::vector<AgentAction> signal(const TriggerEvent& event);
  std::vector<AgentAction> tick(Timestamp now);

  std::optional<TaskView> find(const std::string& id) const;
  std::vector<TaskView> list() const;

  const EngineState& state() const noexcept { return state_; }
  const Config& config() const noexcept { return config_; }
  const Journal& journal() const noexcept { return journal_; }
  std::optional<GeoPoint> current_location() const noexcept { return location_; }
  TravelMode travel_mode() const noexcept { return mode_; }
  void set_travel_mode(TravelMode mode) noexcept { mode_ = mode; }

 private:
  const ProMTask& task_at(const std::string& id) const;
  ReminderPlan plan_for(const ProMTask& task, Timestamp now) const;
  void apply(const JournalEntry& entry);
  void record(const std::string& id, EntryKind kind, nlohmann::json payload, Timestamp at);
  void commit(const std::string& id, const AgentState& after, Timestamp at);
  std::vector<AgentAction> signal_one(const std::string& id, const TriggerEvent& event);
  std::vector<AgentAction> record_actions(const std::string& id, const AgentState& before,
                                          const AgentStep& step);

  Config config_;
  Journal& journal_;
  EngineState state_;
  std::optional<GeoPoint> location_;
  TravelMode mode_ = TravelMode::Walk;
};

}  // namespace promind
