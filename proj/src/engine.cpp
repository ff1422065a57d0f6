#include "promind/engine.hpp"

#include "promind/codec.hpp"
#include "promind/error.hpp"

namespace promind {

ReminderPlan plan_task(const ProMTask& task, const Config& config, const PreferenceState& prefs,
                       const PlanContext& context) {
  return adapt_plan(build_plan(task, config, context), prefs, config.learning.lambda);
}

Json to_api_json(const TaskView& view) {
  Json j = view.task;
  j["plan"] = view.state.plan;
  j["stage"] = view.state.stage;
  j["next_index"] = view.state.next_index;
  j["fired_count"] = view.state.fired_count;
  j["postpone_total_s"] = view.state.postpone_total.count();
  j["trigger_latched"] = view.state.trigger_latched;
  j["fired_at"] = view.state.fired_at;
  return j;
}

void to_json(Json& j, const EngineState& s) {
  Json tasks = Json::array();
  for (const auto& id : s.order) tasks.push_back({{"task", s.tasks.at(id)}, {"state", s.agents.at(id)}});
  j = Json{{"tasks", tasks}, {"preferences", s.preferences}, {"next_id", s.next_id}};
}

void from_json(const Json& j, EngineState& s) {
  s = EngineState{};
  for (const auto& item : j.at("tasks")) {
    auto task = item.at("task").get<ProMTask>();
    auto state = item.at("state").get<AgentState>();
    s.order.push_back(task.id);
    s.agents.emplace(task.id, std::move(state));
    s.tasks.emplace(task.id, std::move(task));
  }
  s.preferences = j.at("preferences").get<PreferenceState>();
  s.next_id = j.at("next_id").get<std::uint64_t>();
}

Engine::Engine(Config config, Journal& journal) : config_(std::move(config)), journal_(journal) {}

std::string Engine::recover(const std::optional<Snapshot>& snapshot) {
  state_ = EngineState{};
  std::string note;
  std::uint64_t from = 1;
  if (snapshot && snapshot->last_sequence <= journal_.last_sequence()) {
    state_ = snapshot->state.get<EngineState>();
    from = snapshot->last_sequence + 1;
  } else if (snapshot) {
    note = "snapshot at sequence " + std::to_string(snapshot->last_sequence) +
           " is ahead of the journal (" + std::to_string(journal_.last_sequence()) +
           "); replayed the full journal instead";
  }
  for (const auto& entry : journal_.replay(from)) apply(entry);
  return note;
}

Snapshot Engine::snapshot() const { return Snapshot{journal_.last_sequence(), Json(state_)}; }

// Live mutations go through the same apply() that replay uses.
void Engine::apply(const JournalEntry& e) {
  const Json& p = e.payload;
  switch (e.kind) {
    case EntryKind::TaskCreated: {
      auto task = p.at("task").get<ProMTask>();
      if (!state_.tasks.contains(task.id)) state_.order.push_back(task.id);
      state_.tasks[task.id] = std::move(task);
      ++state_.next_id;
      break;
    }
    case EntryKind::TaskUpdated: {
      auto task = p.at("task").get<ProMTask>();
      state_.tasks[task.id] = std::move(task);
      break;
    }
    case EntryKind::PreferenceUpdated:
      state_.preferences = p.at("preferences").get<PreferenceState>();
      break;
    default:
      break;
  }
  if (const auto it = p.find("state"); it != p.end()) {
    auto agent = it->get<AgentState>();
    state_.agents[agent.task_id] = std::move(agent);
  }
}

void Engine::record(const std::string& id, EntryKind kind, Json payload, Timestamp at) {
  payload["task_id"] = id;
  const auto seq = journal_.append(at, kind, payload);
  apply(JournalEntry{seq, at, kind, std::move(payload)});
}

void Engine::commit(const std::string& id, const AgentState& after, Timestamp at) {
  const AgentState& before = state_.agents.at(id);
  if (before.stage != after.stage) {
    record(id, EntryKind::StageChanged,
           {{"from", before.stage}, {"to", after.stage}, {"state", after}}, at);
  }
}

std::vector<AgentAction> Engine::record_actions(const std::string& id, const AgentState& before,
                                                const AgentStep& step) {
  std::vector<AgentAction> out;
  const ProMTask& task = task_at(id);
  for (const auto& action : step.actions) {
    if (action.kind == AgentAction::Kind::Noop) continue;
    out.push_back(action);
    if (action.kind != AgentAction::Kind::FireReminder) continue;
    Json payload{{"index", action.index},
                 {"wha", task.wha},
                 {"modality", action.modality},
                 {"at", action.at},
                 {"state", step.state}};
    if (task.per) payload["per"] = *task.per;
    record(id, EntryKind::ReminderFired, std::move(payload), action.at);
  }
  const Timestamp at = step.actions.empty() ? Timestamp{} : step.actions.back().at;
  if (before.stage != step.state.stage) {
    record(id, EntryKind::StageChanged,
           {{"from", before.stage}, {"to", step.state.stage}, {"state", step.state}}, at);
  }
  return out;
}

const ProMTask& Engine::task_at(const std::string& id) const {
  const auto it = state_.tasks.find(id);
  if (it == state_.tasks.end()) throw Error(ErrorCode::NotFound, "unknown task " + id);
  return it->second;
}

ReminderPlan Engine::plan_for(const ProMTask& task, Timestamp now) const {
  PlanContext context{location_, mode_, now};
  return plan_task(task, config_, state_.preferences, context);
}

TaskView Engine::create_task(ProMTask task, Timestamp now) {
  task.id = "t" + std::to_string(state_.next_id);
  const ReminderPlan plan = plan_for(task, now);
  const AgentState agent = encode(task, plan, config_.agent);

  record(task.id, EntryKind::TaskCreated, {{"task", task}}, now);
  record(task.id, EntryKind::PlanBuilt, {{"plan", plan}, {"state", agent}}, now);
  return {state_.tasks.at(task.id), state_.agents.at(task.id)};
}

TaskView Engine::update_task(const std::string& id, const TaskEdits& edits, Timestamp now) {
  const ProMTask& current = task_at(id);
  const AgentState before = state_.agents.at(id);
  auto result = promind::update_task(before, current, edits,
                                     [&](const ProMTask& t) { return plan_for(t, now); });

  record(id, EntryKind::TaskUpdated, {{"task", result.task}}, now);
  commit(id, result.state, now);
  record(id, EntryKind::PlanBuilt, {{"plan", result.state.plan}, {"state", result.state}}, now);
  return {state_.tasks.at(id), state_.agents.at(id)};
}

TaskView Engine::cancel_task(const std::string& id, Timestamp now) {
  task_at(id);
  const AgentState after = cancel(state_.agents.at(id));
  commit(id, after, now);
  return {state_.tasks.at(id), state_.agents.at(id)};
}

TaskView Engine::respond(const std::string& id, const UserResponse& response) {
  task_at(id);
  const AgentState before = state_.agents.at(id);
  const AgentStep step = handle_response(before, response);

  InteractionRecord interaction;
  interaction.task_id = id;
  interaction.reminder_index = response.reminder_index;
  interaction.modality_used = before.plan.modality;
  interaction.response = response.kind;
  if (response.kind != UserResponse::Kind::Ignore) {
    interaction.latency = response.at - before.fired_at.at(static_cast<std::size_t>(response.reminder_index));
  }
  const PreferenceState prefs =
      record_interaction(state_.preferences, interaction, config_.learning.alpha);

  record(id, EntryKind::ResponseReceived, {{"response", response}, {"state", step.state}},
         response.at);
  if (before.stage != step.state.stage) {
    record(id, EntryKind::StageChanged,
           {{"from", before.stage}, {"to", step.state.stage}, {"state", step.state}}, response.at);
  }
  record(id, EntryKind::PreferenceUpdated, {{"record", interaction}, {"preferences", prefs}},
         response.at);
  return {state_.tasks.at(id), state_.agents.at(id)};
}

std::vector<AgentAction> Engine::update_location(const GeoPoint& point, Timestamp now) {
  if (!point.valid()) {
    throw Error(ErrorCode::InvalidArgument, "coordinates out of range",
                {{"lat", "latitude must lie in [-90, 90] and longitude in [-180, 180]"}});
  }
  location_ = point;

  std::vector<AgentAction> out;
  const auto ids = state_.order;
  for (const auto& id : ids) {
    const ProMTask& task = state_.tasks.at(id);
    const AgentState& state = state_.agents.at(id);
    if (is_terminal(state.stage) || !task.loc) continue;

    if (task.kind == TaskKind::EventBased) {
      TriggerEvent event;
      event.kind = TriggerEvent::Kind::LocationEnter;
      event.point = point;
      event.at = now;
      auto actions = signal_one(id, event);
      out.insert(out.end(), actions.begin(), actions.end());
    } else if (state.next_index == 0 && state.stage == Stage::Retention) {
      ReminderPlan plan = plan_for(task, now);
      if (plan != state.plan) {
        AgentState after = state;
        after.plan = std::move(plan);
        record(id, EntryKind::PlanBuilt, {{"plan", after.plan}, {"state", after}}, now);
      }
    }
  }
  return out;
}

std::vector<AgentAction> Engine::signal(const TriggerEvent& event) {
  std::vector<AgentAction> out;
  const auto ids = state_.order;
  for (const auto& id : ids) {
    if (state_.tasks.at(id).kind != TaskKind::EventBased) continue;
    auto actions = signal_one(id, event);
    out.insert(out.end(), actions.begin(), actions.end());
  }
  return out;
}

std::vector<AgentAction> Engine::signal_one(const std::string& id, const TriggerEvent& event) {
  const ProMTask& task = state_.tasks.at(id);
  const AgentState before = state_.agents.at(id);
  if (is_terminal(before.stage) || before.trigger_latched ||
      !trigger_matches(event, task, config_.agent.proximity_radius_m)) {
    return {};
  }
  const AgentStep step = apply_trigger(before, event, task, config_.agent.proximity_radius_m);
  record(id, EntryKind::TriggerLatched, {{"event", event}, {"state", step.state}}, event.at);
  return record_actions(id, before, step);
}

std::vector<AgentAction> Engine::tick(Timestamp now) {
  std::vector<AgentAction> out;
  for (const auto& id : state_.order) {
    const AgentState before = state_.agents.at(id);
    if (is_terminal(before.stage)) continue;
    const AgentStep step = promind::tick(before, now);
    if (step.state == before) continue;
    auto actions = record_actions(id, before, step);
    out.insert(out.end(), actions.begin(), actions.end());
  }
  return out;
}

std::optional<TaskView> Engine::find(const std::string& id) const {
  const auto it = state_.tasks.find(id);
  if (it == state_.tasks.end()) return std::nullopt;
  return TaskView{it->second, state_.agents.at(id)};
}

std::vector<TaskView> Engine::list() const {
  std::vector<TaskView> out;
  out.reserve(state_.order.size());
  for (const auto& id : state_.order) out.push_back({state_.tasks.at(id), state_.agents.at(id)});
  return out;
}

}  // namespace promind
