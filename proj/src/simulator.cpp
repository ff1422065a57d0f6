#include "promind/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "promind/codec.hpp"
#include "promind/error.hpp"
#include "promind/planner.hpp"
#include "promind/rng.hpp"

namespace promind {

namespace {

struct Lane {
  const ProMTask* task = nullptr;
  UserPolicy policy;
  AgentState state;
  SplitMix64 rng{0};
  bool postponed = false;
  std::optional<Timestamp> first_fire;
};

std::string modality_text(const ReminderModality& m) {
  std::string s{to_string(m.channel)};
  s += '/';
  s += to_string(m.duration);
  if (m.channel == Channel::Audio) {
    s += '/';
    s += to_string(m.sound);
  }
  return s;
}

std::string trigger_text(const TriggerEvent& e) {
  std::ostringstream os;
  if (e.kind == TriggerEvent::Kind::LocationEnter) {
    os << "location " << std::setprecision(9) << e.point.latitude << ',' << e.point.longitude;
  } else {
    os << "call " << e.name;
  }
  return os.str();
}

UserResponse decide(Lane& lane, int index, Timestamp now) {
  UserResponse r;
  r.at = now;
  r.reminder_index = index;
  const UserPolicy& p = lane.policy;
  switch (p.kind) {
    case UserPolicy::Kind::AlwaysAcceptFirst:
      r.kind = UserResponse::Kind::Accept;
      break;
    case UserPolicy::Kind::AcceptWithProbability:
      r.kind = lane.rng.uniform() < p.probability ? UserResponse::Kind::Accept
                                                  : UserResponse::Kind::Ignore;
      break;
    case UserPolicy::Kind::BusyUntil:
      if (now < p.until) {
        r.kind = UserResponse::Kind::Postpone;
        r.delay = p.until - now;
      } else {
        r.kind = p.then_accept ? UserResponse::Kind::Accept : UserResponse::Kind::Ignore;
      }
      break;
    case UserPolicy::Kind::AlwaysIgnore:
      r.kind = UserResponse::Kind::Ignore;
      break;
    case UserPolicy::Kind::PostponeOnceThenAccept:
      if (!lane.postponed) {
        lane.postponed = true;
        r.kind = UserResponse::Kind::Postpone;
        r.delay = p.delay;
      } else {
        r.kind = UserResponse::Kind::Accept;
      }
      break;
  }
  return r;
}

void validate(const Scenario& scenario, Duration tick_step) {
  std::vector<FieldError> errors;
  if (tick_step <= Duration{0}) errors.push_back({"tick_step", "must be positive"});
  if (auto problems = validate_config(scenario.config); !problems.empty()) {
    for (auto& m : problems) errors.push_back({"config", m});
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < scenario.tasks.size(); ++i) {
    const auto& [task, policy] = scenario.tasks[i];
    const std::string prefix = "tasks[" + std::to_string(i) + "].";
    if (!ids.insert(task.id).second) errors.push_back({prefix + "id", "duplicate task id " + task.id});
    for (auto& e : validate_task(task)) errors.push_back({prefix + e.field, e.message});
    if (policy.kind == UserPolicy::Kind::AcceptWithProbability &&
        !(policy.probability >= 0.0 && policy.probability <= 1.0)) {
      errors.push_back({prefix + "policy.p", "must lie in [0, 1]"});
    }
    if (policy.kind == UserPolicy::Kind::PostponeOnceThenAccept && policy.delay <= Duration{0}) {
      errors.push_back({prefix + "policy.delay_s", "must be positive"});
    }
  }
  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    const auto& e = scenario.events[i];
    if (e.kind == TriggerEvent::Kind::LocationEnter && !e.point.valid()) {
      errors.push_back({"events[" + std::to_string(i) + "]", "coordinates out of range"});
    }
  }
  if (!errors.empty()) {
    throw invalid_fields(std::move(errors), "malformed scenario: ");
  }
}

// First tick at or after t on the grid start + k * step.
Timestamp align(Timestamp start, Duration step, Timestamp t) {
  if (t <= start) return start;
  const auto k = (t - start + step - Duration{1}) / step;
  return start + k * step;
}

}  // namespace

std::string_view to_string(UserPolicy::Kind k) {
  switch (k) {
    case UserPolicy::Kind::AlwaysAcceptFirst: return "AlwaysAcceptFirst";
    case UserPolicy::Kind::AcceptWithProbability: return "AcceptWithProbability";
    case UserPolicy::Kind::BusyUntil: return "BusyUntil";
    case UserPolicy::Kind::AlwaysIgnore: return "AlwaysIgnore";
    case UserPolicy::Kind::PostponeOnceThenAccept: return "PostponeOnceThenAccept";
  }
  return "AlwaysAcceptFirst";
}

std::optional<UserPolicy::Kind> parse_policy_kind(std::string_view s) {
  for (auto k : {UserPolicy::Kind::AlwaysAcceptFirst, UserPolicy::Kind::AcceptWithProbability,
                 UserPolicy::Kind::BusyUntil, UserPolicy::Kind::AlwaysIgnore,
                 UserPolicy::Kind::PostponeOnceThenAccept}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(TraceEvent::Kind k) {
  switch (k) {
    case TraceEvent::Kind::Fire: return "fire";
    case TraceEvent::Kind::Accept: return "accept";
    case TraceEvent::Kind::Postpone: return "postpone";
    case TraceEvent::Kind::Ignore: return "ignore";
    case TraceEvent::Kind::Latch: return "latch";
    case TraceEvent::Kind::Completed: return "completed";
    case TraceEvent::Kind::Expired: return "expired";
  }
  return "fire";
}

std::string format_trace(const SimReport& report) {
  std::string out;
  for (const auto& e : report.event_trace) {
    out += format_rfc3339(e.at);
    out += ' ';
    out += e.task_id;
    out += ' ';
    out += to_string(e.kind);
    if (e.index >= 0) out += " #" + std::to_string(e.index);
    if (!e.detail.empty()) out += ' ' + e.detail;
    out += '\n';
  }
  return out;
}

SimReport run(const Scenario& scenario, std::uint64_t seed, Duration tick_step) {
  validate(scenario, tick_step);

  SimReport report;
  report.tasks_total = static_cast<int>(scenario.tasks.size());
  if (scenario.tasks.empty()) return report;

  std::optional<Timestamp> start = scenario.start;
  const auto earliest = [&](Timestamp t) {
    if (!scenario.start && (!start || t < *start)) start = t;
  };
  for (const auto& st : scenario.tasks) {
    if (st.task.rem) earliest(*st.task.rem);
    if (st.task.whe) earliest(*st.task.whe);
  }
  for (const auto& e : scenario.events) earliest(e.at);

  std::vector<Lane> lanes;
  lanes.reserve(scenario.tasks.size());
  for (std::size_t i = 0; i < scenario.tasks.size(); ++i) {
    const auto& st = scenario.tasks[i];
    PlanContext context{scenario.current_location, scenario.mode, std::nullopt};
    ReminderPlan plan = build_plan(st.task, scenario.config, context);
    if (!plan.schedule.empty()) earliest(plan.schedule.front());
    Lane lane;
    lane.task = &st.task;
    lane.policy = st.policy;
    lane.state = encode(st.task, plan, scenario.config.agent);
    lane.rng = derive_stream(seed ^ st.policy.seed, i);
    lanes.push_back(std::move(lane));
  }
  if (!start) return report;  // nothing timed and no events: every task stays pending

  std::vector<TriggerEvent> events = scenario.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const TriggerEvent& a, const TriggerEvent& b) { return a.at < b.at; });
  std::size_t next_event = 0;
  const double radius = scenario.config.agent.proximity_radius_m;
  auto& trace = report.event_trace;

  const auto deliver = [&](Lane& lane, const AgentAction& action, Timestamp now) {
    if (action.kind == AgentAction::Kind::MarkExpired) {
      trace.push_back({now, lane.state.task_id, TraceEvent::Kind::Expired, -1, {}});
      return;
    }
    if (action.kind != AgentAction::Kind::FireReminder) return;
    trace.push_back({now, lane.state.task_id, TraceEvent::Kind::Fire, action.index,
                     modality_text(action.modality)});
    ++report.reminders_fired;
    if (!lane.first_fire) lane.first_fire = now;

    const UserResponse r = decide(lane, action.index, now);
    const AgentStep step = handle_response(lane.state, r);
    lane.state = step.state;
    switch (r.kind) {
      case UserResponse::Kind::Accept:
        trace.push_back({now, lane.state.task_id, TraceEvent::Kind::Accept, r.reminder_index, {}});
        trace.push_back({now, lane.state.task_id, TraceEvent::Kind::Completed, -1, {}});
        break;
      case UserResponse::Kind::Postpone:
        trace.push_back({now, lane.state.task_id, TraceEvent::Kind::Postpone, r.reminder_index,
                         std::to_string(r.delay.count()) + "s"});
        break;
      case UserResponse::Kind::Ignore:
        trace.push_back({now, lane.state.task_id, TraceEvent::Kind::Ignore, r.reminder_index, {}});
        break;
    }
  };

  // Only ticks where something can happen are visited; skipped ticks would
  // have been no-ops, so the trace matches a tick-by-tick walk exactly.
  Timestamp now = *start;
  for (;;) {
    std::optional<Timestamp> wake;
    if (next_event < events.size()) wake = events[next_event].at;
    for (const auto& lane : lanes) {
      if (const auto w = next_wakeup(lane.state); w && (!wake || *w < *wake)) wake = w;
    }
    if (!wake) break;
    now = std::max(now, align(*start, tick_step, *wake));

    for (; next_event < events.size() && events[next_event].at <= now; ++next_event) {
      TriggerEvent event = events[next_event];
      event.at = now;
      for (auto& lane : lanes) {
        if (lane.task->kind != TaskKind::EventBased || is_terminal(lane.state.stage) ||
            lane.state.trigger_latched || !trigger_matches(event, *lane.task, radius)) {
          continue;
        }
        const AgentStep step = apply_trigger(lane.state, event, *lane.task, radius);
        lane.state = step.state;
        trace.push_back({now, lane.state.task_id, TraceEvent::Kind::Latch, -1, trigger_text(event)});
        for (const auto& a : step.actions) deliver(lane, a, now);
      }
    }

    for (auto& lane : lanes) {
      // One reminder at a time, so each response lands before the next fires.
      for (;;) {
        if (is_terminal(lane.state.stage)) break;
        const AgentStep step = tick(lane.state, now, 1);
        if (step.state == lane.state) break;
        lane.state = step.state;
        for (const auto& a : step.actions) deliver(lane, a, now);
      }
    }
    now += tick_step;
  }

  long long accept_total = 0;
  for (const auto& lane : lanes) {
    switch (lane.state.stage) {
      case Stage::Completed: {
        ++report.tasks_completed;
        const auto accepted = std::find_if(trace.rbegin(), trace.rend(), [&](const TraceEvent& e) {
          return e.task_id == lane.state.task_id && e.kind == TraceEvent::Kind::Accept;
        });
        accept_total += (accepted->at - *lane.first_fire).count();
        break;
      }
      case Stage::Expired: ++report.expired_count; break;
      case Stage::Cancelled: ++report.cancelled_count; break;
      default: ++report.pending_count; break;
    }
  }
  if (report.tasks_completed > 0) {
    report.mean_time_to_accept = Duration{accept_total / report.tasks_completed};
  }
  return report;
}

Scenario inject_event(Scenario scenario, const TriggerEvent& event) {
  const double radius = scenario.config.agent.proximity_radius_m;
  const bool reacts = std::any_of(scenario.tasks.begin(), scenario.tasks.end(), [&](const ScenarioTask& st) {
    return st.task.kind == TaskKind::EventBased && trigger_matches(event, st.task, radius);
  });
  if (!reacts) {
    throw Error(ErrorCode::Rejected, "no event-based task in the scenario reacts to " + trigger_text(event));
  }
  scenario.events.push_back(event);
  return scenario;
}

std::vector<CompareRow> compare(const Scenario& scenario,
                                const std::vector<std::pair<std::string, Config>>& configs,
                                std::uint64_t seed, Duration tick_step) {
  std::vector<CompareRow> rows;
  rows.reserve(configs.size());
  for (const auto& [label, config] : configs) {
    Scenario s = scenario;
    s.config = config;
    rows.push_back({label, run(s, seed, tick_step)});
  }
  return rows;
}

void write_table(std::ostream& out, const std::vector<CompareRow>& rows) {
  std::size_t width = 6;
  for (const auto& row : rows) width = std::max(width, row.label.size());
  out << std::left << std::setw(static_cast<int>(width)) << "config" << std::right
      << std::setw(11) << "completed" << std::setw(7) << "total" << std::setw(7) << "fired"
      << std::setw(9) << "expired" << std::setw(9) << "pending" << std::setw(11) << "mean_tta"
      << '\n';
  for (const auto& [label, r] : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << label << std::right
        << std::setw(11) << r.tasks_completed << std::setw(7) << r.tasks_total << std::setw(7)
        << r.reminders_fired << std::setw(9) << r.expired_count << std::setw(9) << r.pending_count
        << std::setw(10) << r.mean_time_to_accept.count() << "s" << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "config,tasks_total,tasks_completed,reminders_fired,expired_count,cancelled_count,"
         "pending_count,mean_time_to_accept_s\n";
  for (const auto& [label, r] : rows) {
    std::string quoted = label;
    if (quoted.find_first_of(",\"\n") != std::string::npos) {
      std::string escaped;
      for (char c : quoted) {
        if (c == '"') escaped += '"';
        escaped += c;
      }
      quoted = '"' + escaped + '"';
    }
    out << quoted << ',' << r.tasks_total << ',' << r.tasks_completed << ',' << r.reminders_fired
        << ',' << r.expired_count << ',' << r.cancelled_count << ',' << r.pending_count << ','
        << r.mean_time_to_accept.count() << '\n';
  }
}

Scenario parse_scenario(const Json& j, const Config& base) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "scenario must be a JSON object");
  Scenario s;
  s.config = base;
  std::vector<FieldError> errors;
  const auto guard = [&](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.fields().empty()) errors.push_back({field, e.what()});
      for (const auto& f : e.fields()) errors.push_back({field + "." + f.field, f.message});
    } catch (const std::exception& e) {
      errors.push_back({field, e.what()});
    }
  };

  guard("name", [&] { s.name = j.value("name", std::string{}); });
  guard("start", [&] {
    if (j.contains("start") && !j["start"].is_null()) s.start = j["start"].get<Timestamp>();
  });
  guard("current_location", [&] {
    if (j.contains("current_location") && !j["current_location"].is_null()) {
      s.current_location = j["current_location"].get<GeoPoint>();
    }
  });
  guard("travel_mode", [&] {
    if (!j.contains("travel_mode")) return;
    const auto m = parse_travel_mode(j["travel_mode"].get<std::string>());
    if (!m) throw std::invalid_argument("expected walk or car");
    s.mode = *m;
  });
  guard("config", [&] {
    if (j.contains("config")) from_json(j["config"], s.config);
  });

  const Json tasks = j.value("tasks", Json::array());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string field = "tasks[" + std::to_string(i) + "]";
    guard(field, [&] {
      const Json& item = tasks[i];
      ScenarioTask st;
      st.task = task_from_descriptor(item);
      st.task.id = item.value("id", "t" + std::to_string(i + 1));
      const Json policy = item.value("policy", Json::object());
      const auto kind = parse_policy_kind(policy.value("kind", std::string{"AlwaysAcceptFirst"}));
      if (!kind) throw std::invalid_argument("unknown policy kind");
      st.policy.kind = *kind;
      st.policy.probability = policy.value("p", 0.5);
      if (policy.contains("until")) st.policy.until = policy["until"].get<Timestamp>();
      st.policy.then_accept = policy.value("then_accept", true);
      st.policy.delay = Duration{policy.value("delay_s", 600LL)};
      st.policy.seed = policy.value("seed", std::uint64_t{0});
      if (st.policy.kind == UserPolicy::Kind::BusyUntil && !policy.contains("until")) {
        throw std::invalid_argument("BusyUntil needs an until timestamp");
      }
      s.tasks.push_back(std::move(st));
    });
  }
  const Json events = j.value("events", Json::array());
  for (std::size_t i = 0; i < events.size(); ++i) {
    guard("events[" + std::to_string(i) + "]", [&] { s.events.push_back(events[i].get<TriggerEvent>()); });
  }

  if (!errors.empty()) {
    throw invalid_fields(std::move(errors), "malformed scenario: ");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const Config& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open scenario " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(j, base);
}

}  // namespace promind
