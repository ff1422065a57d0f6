#pragma once

// The prospective-memory agent: holds a task's plan in retention, fires
// reminders when their time (or trigger) comes, and reacts to the user's
// Accept / Postpone / Ignore responses. Every operation is a pure transition
// from one AgentState to the next, driven by timestamps supplied by the caller.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promind/config.hpp"
#include "promind/planner.hpp"
#include "promind/task.hpp"
#include "promind/time.hpp"

namespace promind {

enum class Stage { Encoded, Retention, Initiating, Executing, Completed, Expired, Cancelled };

bool is_terminal(Stage s) noexcept;
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct AgentState {
  std::string task_id;
  TaskKind kind = TaskKind::TimeBased;
  Stage stage = Stage::Encoded;
  ReminderPlan plan;
  int next_index = 0;   // schedule cursor: entries before it have fired
  int fired_count = 0;
  Duration postpone_total{0};
  bool trigger_latched = false;
  std::optional<Timestamp> deadline;  // the task's execution time, if any
  Duration grace{15 * 60};
  std::vector<Timestamp> fired_at;    // actual emission time per fired index

  bool operator==(const AgentState&) const = default;
};

struct AgentAction {
  enum class Kind { FireReminder, MarkCompleted, MarkExpired, Noop };

  Kind kind = Kind::Noop;
  std::string task_id;
  int index = -1;  // FireReminder only
  ReminderModality modality;
  Timestamp at;

  bool operator==(const AgentAction&) const = default;
};

struct UserResponse {
  enum class Kind { Accept, Postpone, Ignore };

  Kind kind = Kind::Ignore;
  Duration delay{0};  // Postpone only, strictly positive
  Timestamp at;
  int reminder_index = 0;

  bool operator==(const UserResponse&) const = default;
};

struct TriggerEvent {
  enum class Kind { LocationEnter, CallingPerson };

  Kind kind = Kind::LocationEnter;
  GeoPoint point;    // LocationEnter
  std::string name;  // CallingPerson
  Timestamp at;

  bool operator==(const TriggerEvent&) const = default;
};

struct AgentStep {
  AgentState state;
  std::vector<AgentAction> actions;
};

/// Holds the task and its plan for initiation. Rejects plans that fire after
/// the execution time or whose schedule disagrees with the count.
AgentState encode(const ProMTask& task, const ReminderPlan& plan,
                  const AgentSettings& settings = {});

/// Fires due, unfired reminders (at most `max_fires` of them) and expires
/// tasks past deadline + grace once nothing due is left. Returns a single
/// Noop action when nothing happens.
AgentStep tick(const AgentState& state, Timestamp now,
               std::size_t max_fires = std::numeric_limits<std::size_t>::max());

/// Earliest time at which tick() would do something; nullopt while the task
/// waits on a trigger or has ended.
std::optional<Timestamp> next_wakeup(const AgentState& state);

AgentStep handle_response(const AgentState& state, const UserResponse& response);

/// True when the event is the cue the task waits for.
bool trigger_matches(const TriggerEvent& event, const ProMTask& task, double proximity_radius_m);

AgentStep apply_trigger(const AgentState& state, const TriggerEvent& event, const ProMTask& task,
                        double proximity_radius_m);

using Replanner = std::function<ReminderPlan(const ProMTask&)>;

struct UpdateResult {
  AgentState state;
  ProMTask task;
};

/// Applies edits atomically and re-plans the reminders that have not fired yet.
UpdateResult update_task(const AgentState& state, const ProMTask& task, const TaskEdits& edits,
                         const Replanner& replan);

AgentState cancel(const AgentState& state);

std::string_view to_string(AgentAction::Kind k);
std::string_view to_string(UserResponse::Kind k);
std::optional<UserResponse::Kind> parse_response_kind(std::string_view s);
std::string_view to_string(TriggerEvent::Kind k);

}  // namespace promind
