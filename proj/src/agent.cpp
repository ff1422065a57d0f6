#include "promind/agent.hpp"

#include <algorithm>
#include <cctype>

#include "promind/error.hpp"

namespace promind {

namespace {

AgentAction noop(const AgentState& s, Timestamp at) {
  AgentAction a;
  a.kind = AgentAction::Kind::Noop;
  a.task_id = s.task_id;
  a.at = at;
  return a;
}

AgentAction fire(AgentState& s, Timestamp at) {
  AgentAction a;
  a.kind = AgentAction::Kind::FireReminder;
  a.task_id = s.task_id;
  a.index = s.next_index;
  a.modality = s.plan.modality;
  a.at = at;
  s.fired_at.push_back(at);
  ++s.next_index;
  ++s.fired_count;
  s.stage = Stage::Initiating;
  return a;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

// Keeps the schedule strictly increasing after clamping; plan.count follows.
void merge_collapsed(AgentState& s) {
  auto& sched = s.plan.schedule;
  const auto first_unfired = sched.begin() + s.next_index;
  sched.erase(std::unique(first_unfired, sched.end()), sched.end());
  s.plan.count = static_cast<int>(sched.size());
}

std::optional<Timestamp> expiry_time(const AgentState& s) {
  if (s.deadline) return *s.deadline + s.grace;
  if (s.trigger_latched && s.next_index >= static_cast<int>(s.plan.schedule.size()) &&
      !s.plan.schedule.empty()) {
    return s.plan.schedule.back() + s.grace;
  }
  return std::nullopt;
}

}  // namespace

bool is_terminal(Stage s) noexcept {
  return s == Stage::Completed || s == Stage::Expired || s == Stage::Cancelled;
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Encoded: return "Encoded";
    case Stage::Retention: return "Retention";
    case Stage::Initiating: return "Initiating";
    case Stage::Executing: return "Executing";
    case Stage::Completed: return "Completed";
    case Stage::Expired: return "Expired";
    case Stage::Cancelled: return "Cancelled";
  }
  return "Encoded";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : {Stage::Encoded, Stage::Retention, Stage::Initiating, Stage::Executing,
                   Stage::Completed, Stage::Expired, Stage::Cancelled}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

AgentState encode(const ProMTask& task, const ReminderPlan& plan, const AgentSettings& settings) {
  if (auto errors = validate_task(task); !errors.empty()) {
    throw invalid_fields(std::move(errors));
  }
  if (plan.count < 1) throw Error(ErrorCode::InvalidArgument, "plan must hold at least one reminder");

  if (task.kind == TaskKind::TimeBased) {
    if (static_cast<int>(plan.schedule.size()) != plan.count) {
      throw Error(ErrorCode::InvalidArgument, "schedule length differs from reminder count");
    }
    if (!std::is_sorted(plan.schedule.begin(), plan.schedule.end()) ||
        std::adjacent_find(plan.schedule.begin(), plan.schedule.end()) != plan.schedule.end()) {
      throw Error(ErrorCode::InvalidArgument, "schedule must be strictly increasing");
    }
  } else if (static_cast<int>(plan.offsets.size()) != plan.count || !plan.schedule.empty()) {
    throw Error(ErrorCode::InvalidArgument, "event-based plan must be relative to its trigger");
  }
  if (task.whe && !plan.schedule.empty() && plan.schedule.back() > *task.whe) {
    throw Error(ErrorCode::InvalidArgument, "plan schedules a reminder after the execution time");
  }

  AgentState s;
  s.task_id = task.id;
  s.kind = task.kind;
  s.plan = plan;
  s.deadline = task.whe;
  s.grace = settings.grace;
  s.stage = Stage::Retention;
  return s;
}

AgentStep tick(const AgentState& state, Timestamp now, std::size_t max_fires) {
  if (is_terminal(state.stage) || state.stage == Stage::Executing ||
      state.stage == Stage::Encoded) {
    return {state, {noop(state, now)}};
  }

  AgentStep out{state, {}};
  AgentState& s = out.state;
  const bool armed = s.kind == TaskKind::TimeBased || s.trigger_latched;
  const auto due = [&] {
    return armed && s.next_index < static_cast<int>(s.plan.schedule.size()) &&
           s.plan.schedule[static_cast<std::size_t>(s.next_index)] <= now;
  };
  while (out.actions.size() < max_fires && due()) out.actions.push_back(fire(s, now));
  if (due()) return out;

  if (const auto expires = expiry_time(s); expires && now > *expires) {
    s.stage = Stage::Expired;
    AgentAction a;
    a.kind = AgentAction::Kind::MarkExpired;
    a.task_id = s.task_id;
    a.at = now;
    out.actions.push_back(a);
  }

  if (out.actions.empty()) out.actions.push_back(noop(s, now));
  return out;
}

std::optional<Timestamp> next_wakeup(const AgentState& s) {
  if (is_terminal(s.stage) || s.stage == Stage::Executing || s.stage == Stage::Encoded) {
    return std::nullopt;
  }
  std::optional<Timestamp> wake;
  const bool armed = s.kind == TaskKind::TimeBased || s.trigger_latched;
  if (armed && s.next_index < static_cast<int>(s.plan.schedule.size())) {
    wake = s.plan.schedule[static_cast<std::size_t>(s.next_index)];
  }
  if (const auto expires = expiry_time(s)) {
    const Timestamp after = *expires + Duration{1};
    if (!wake || after < *wake) wake = after;
  }
  return wake;
}

AgentStep handle_response(const AgentState& state, const UserResponse& r) {
  if (is_terminal(state.stage)) throw Error(ErrorCode::TerminalStage, "terminal stage");
  if (r.reminder_index < 0 || r.reminder_index >= state.next_index) {
    throw Error(ErrorCode::StaleResponse, "stale response");
  }

  AgentStep out{state, {}};
  AgentState& s = out.state;
  switch (r.kind) {
    case UserResponse::Kind::Accept: {
      // Executing is entered and left in the same step: an accepted task has
      // no remaining reminders, so completion is immediate.
      s.stage = Stage::Completed;
      AgentAction a;
      a.kind = AgentAction::Kind::MarkCompleted;
      a.task_id = s.task_id;
      a.at = r.at;
      out.actions.push_back(a);
      return out;
    }
    case UserResponse::Kind::Postpone: {
      if (r.delay <= Duration{0}) {
        throw Error(ErrorCode::InvalidArgument, "postpone delay must be positive");
      }
      auto& sched = s.plan.schedule;
      const auto clamp = [&](Timestamp t) { return s.deadline ? std::min(t, *s.deadline) : t; };
      if (s.next_index < static_cast<int>(sched.size())) {
        for (auto it = sched.begin() + s.next_index; it != sched.end(); ++it) *it = clamp(*it + r.delay);
        merge_collapsed(s);
      } else {
        // Nothing left to shift: re-arm one follow-up for the postponed reminder.
        const Timestamp again = clamp(r.at + r.delay);
        if (again > r.at) {
          sched.push_back(again);
          s.plan.count = static_cast<int>(sched.size());
        }
      }
      s.postpone_total += r.delay;
      s.stage = Stage::Retention;
      out.actions.push_back(noop(s, r.at));
      return out;
    }
    case UserResponse::Kind::Ignore:
      out.actions.push_back(noop(s, r.at));
      return out;
  }
  return out;
}

bool trigger_matches(const TriggerEvent& event, const ProMTask& task, double radius_m) {
  switch (event.kind) {
    case TriggerEvent::Kind::LocationEnter:
      return task.loc && haversine_km(event.point, task.loc->point) * 1000.0 <= radius_m;
    case TriggerEvent::Kind::CallingPerson:
      return task.per && iequals(event.name, *task.per);
  }
  return false;
}

AgentStep apply_trigger(const AgentState& state, const TriggerEvent& event, const ProMTask& task,
                        double radius_m) {
  if (task.kind != TaskKind::EventBased || state.kind != TaskKind::EventBased) {
    throw Error(ErrorCode::Rejected, "triggers apply to event-based tasks only");
  }
  if (is_terminal(state.stage) || state.stage == Stage::Executing || state.trigger_latched ||
      !trigger_matches(event, task, radius_m)) {
    return {state, {noop(state, event.at)}};
  }

  AgentStep out{state, {}};
  AgentState& s = out.state;
  s.trigger_latched = true;
  const Timestamp limit = s.deadline ? std::max(*s.deadline, event.at) : Timestamp::max();
  s.plan.schedule.clear();
  for (const auto offset : s.plan.offsets) {
    const Timestamp at = std::min(event.at + offset, limit);
    if (s.plan.schedule.empty() || s.plan.schedule.back() < at) s.plan.schedule.push_back(at);
  }
  s.plan.count = static_cast<int>(s.plan.schedule.size());
  out.actions.push_back(fire(s, event.at));
  return out;
}

UpdateResult update_task(const AgentState& state, const ProMTask& task, const TaskEdits& edits,
                         const Replanner& replan) {
  if (is_terminal(state.stage) || state.stage == Stage::Executing) {
    throw Error(ErrorCode::TerminalStage, "terminal stage");
  }
  ProMTask edited = apply_edits(task, edits);
  edited.id = task.id;
  if (auto errors = validate_task(edited); !errors.empty()) {
    throw invalid_fields(std::move(errors));
  }
  const bool started = state.next_index > 0 || state.trigger_latched;
  if (edited.kind != task.kind && started) {
    throw Error(ErrorCode::InvalidArgument, "task kind cannot change after reminders fired",
                {{"kind", "task kind cannot change after reminders fired"}});
  }

  const ReminderPlan fresh = replan(edited);

  AgentState s = state;
  s.kind = edited.kind;
  s.deadline = edited.whe;
  s.stage = Stage::Retention;

  if (!started) {
    s.plan = fresh;
    if (edited.whe && !s.plan.schedule.empty() && s.plan.schedule.back() > *edited.whe) {
      throw Error(ErrorCode::InvalidArgument, "plan schedules a reminder after the execution time");
    }
    return {s, edited};
  }

  // Fired history is kept verbatim; only the tail is re-planned.
  const auto fired = static_cast<std::size_t>(s.next_index);
  std::vector<Timestamp> schedule(state.plan.schedule.begin(),
                                  state.plan.schedule.begin() + static_cast<std::ptrdiff_t>(fired));
  const Timestamp last = schedule.empty() ? Timestamp::min() : schedule.back();

  if (edited.kind == TaskKind::TimeBased) {
    if (edited.whe && *edited.whe > last) {
      const int remaining = std::max(fresh.count - static_cast<int>(fired), 1);
      const auto tail = distribute_schedule(last, *edited.whe, remaining + 1);
      schedule.insert(schedule.end(), tail.schedule.begin() + 1, tail.schedule.end());
    }
  } else {
    const Timestamp anchor = schedule.front();
    const Timestamp limit = edited.whe ? std::max(*edited.whe, anchor) : Timestamp::max();
    for (std::size_t i = fired; i < fresh.offsets.size(); ++i) {
      const Timestamp at = std::min(anchor + fresh.offsets[i], limit);
      if (at > schedule.back()) schedule.push_back(at);
    }
  }

  s.plan.schedule = std::move(schedule);
  s.plan.count = static_cast<int>(s.plan.schedule.size());
  s.plan.offsets = fresh.offsets;
  s.plan.modality = fresh.modality;
  s.plan.raw_modality_score = fresh.raw_modality_score;
  s.plan.warnings = fresh.warnings;
  return {s, edited};
}

AgentState cancel(const AgentState& state) {
  if (is_terminal(state.stage)) throw Error(ErrorCode::TerminalStage, "terminal stage");
  AgentState s = state;
  s.stage = Stage::Cancelled;
  return s;
}

std::string_view to_string(AgentAction::Kind k) {
  switch (k) {
    case AgentAction::Kind::FireReminder: return "FireReminder";
    case AgentAction::Kind::MarkCompleted: return "MarkCompleted";
    case AgentAction::Kind::MarkExpired: return "MarkExpired";
    case AgentAction::Kind::Noop: return "Noop";
  }
  return "Noop";
}

std::string_view to_string(UserResponse::Kind k) {
  switch (k) {
    case UserResponse::Kind::Accept: return "Accept";
    case UserResponse::Kind::Postpone: return "Postpone";
    case UserResponse::Kind::Ignore: return "Ignore";
  }
  return "Ignore";
}

std::optional<UserResponse::Kind> parse_response_kind(std::string_view s) {
  if (s == "Accept" || s == "accept") return UserResponse::Kind::Accept;
  if (s == "Postpone" || s == "postpone") return UserResponse::Kind::Postpone;
  if (s == "Ignore" || s == "ignore") return UserResponse::Kind::Ignore;
  return std::nullopt;
}

std::string_view to_string(TriggerEvent::Kind k) {
  return k == TriggerEvent::Kind::LocationEnter ? "LocationEnter" : "CallingPerson";
}

}  // namespace promind
