#include "promind/codec.hpp"

#include "promind/error.hpp"

namespace nlohmann {

void adl_serializer<promind::Timestamp>::to_json(json& j, const promind::Timestamp& t) {
  j = promind::format_rfc3339(t);
}

void adl_serializer<promind::Timestamp>::from_json(const json& j, promind::Timestamp& t) {
  const auto parsed = promind::parse_rfc3339(j.get<std::string>());
  if (!parsed) {
    throw promind::Error(promind::ErrorCode::InvalidArgument,
                         "not an RFC 3339 timestamp: " + j.get<std::string>());
  }
  t = *parsed;
}

}  // namespace nlohmann

namespace promind {

namespace {

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

template <typename T>
void get_if_present(const Json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end() && !it->is_null()) out = it->template get<T>();
}

template <typename E, typename Parse>
E parse_enum(const Json& j, Parse parse, const char* what) {
  const auto s = j.get<std::string>();
  const auto v = parse(s);
  if (!v) throw Error(ErrorCode::InvalidArgument, std::string("unknown ") + what + ": " + s);
  return *v;
}

}  // namespace

void to_json(Json& j, FactorLevel v) { j = to_string(v); }
void from_json(const Json& j, FactorLevel& v) { v = parse_enum<FactorLevel>(j, parse_factor_level, "factor level"); }
void to_json(Json& j, AgeGroup v) { j = to_string(v); }
void from_json(const Json& j, AgeGroup& v) { v = parse_enum<AgeGroup>(j, parse_age_group, "age group"); }
void to_json(Json& j, TaskCategory v) { j = to_string(v); }
void from_json(const Json& j, TaskCategory& v) { v = parse_enum<TaskCategory>(j, parse_task_category, "task category"); }
void to_json(Json& j, TaskKind v) { j = to_string(v); }
void from_json(const Json& j, TaskKind& v) { v = parse_enum<TaskKind>(j, parse_task_kind, "task kind"); }
void to_json(Json& j, Stage v) { j = to_string(v); }
void from_json(const Json& j, Stage& v) { v = parse_enum<Stage>(j, parse_stage, "stage"); }

void to_json(Json& j, const FactorProfile& p) {
  j = Json{{"com", p.com}, {"imp", p.imp}, {"mot", p.mot}, {"age", p.age}, {"typ", p.typ}};
}

void from_json(const Json& j, FactorProfile& p) {
  get_if_present(j, "com", p.com);
  get_if_present(j, "imp", p.imp);
  get_if_present(j, "mot", p.mot);
  get_if_present(j, "age", p.age);
  get_if_present(j, "typ", p.typ);
}

void to_json(Json& j, const CountTable& t) {
  j = Json{{"n_low", t.n_low},     {"n_medium", t.n_medium}, {"n_high", t.n_high},
           {"a_young", t.a_young}, {"a_old", t.a_old},       {"max_count", t.max_count}};
}

void from_json(const Json& j, CountTable& t) {
  get_if_present(j, "n_low", t.n_low);
  get_if_present(j, "n_medium", t.n_medium);
  get_if_present(j, "n_high", t.n_high);
  get_if_present(j, "a_young", t.a_young);
  get_if_present(j, "a_old", t.a_old);
  get_if_present(j, "max_count", t.max_count);
}

void to_json(Json& j, const ModalityScore& s) {
  j = Json{{"channel", s.channel}, {"duration", s.duration}, {"sound", s.sound}};
}

void from_json(const Json& j, ModalityScore& s) {
  get_if_present(j, "channel", s.channel);
  get_if_present(j, "duration", s.duration);
  get_if_present(j, "sound", s.sound);
}

void to_json(Json& j, const LevelScores& s) {
  j = Json{{"low", s.low}, {"medium", s.medium}, {"high", s.high}};
}

void from_json(const Json& j, LevelScores& s) {
  get_if_present(j, "low", s.low);
  get_if_present(j, "medium", s.medium);
  get_if_present(j, "high", s.high);
}

void to_json(Json& j, const ModalityTable& t) {
  j = Json{{"com", t.com},
           {"imp", t.imp},
           {"mot", t.mot},
           {"age", {{"young", t.young}, {"old", t.old}}},
           {"typ",
            {{"personal", t.personal},
             {"financial", t.financial},
             {"social", t.social},
             {"work", t.work}}}};
}

void from_json(const Json& j, ModalityTable& t) {
  get_if_present(j, "com", t.com);
  get_if_present(j, "imp", t.imp);
  get_if_present(j, "mot", t.mot);
  if (const auto it = j.find("age"); it != j.end()) {
    get_if_present(*it, "young", t.young);
    get_if_present(*it, "old", t.old);
  }
  if (const auto it = j.find("typ"); it != j.end()) {
    get_if_present(*it, "personal", t.personal);
    get_if_present(*it, "financial", t.financial);
    get_if_present(*it, "social", t.social);
    get_if_present(*it, "work", t.work);
  }
}

void to_json(Json& j, const Weights& w) { j = Json{{"count", w.count}, {"modality", w.modality}}; }

void from_json(const Json& j, Weights& w) {
  get_if_present(j, "count", w.count);
  get_if_present(j, "modality", w.modality);
}

void to_json(Json& j, const GeoPoint& p) { j = Json{{"lat", p.latitude}, {"lon", p.longitude}}; }

void from_json(const Json& j, GeoPoint& p) {
  j.at("lat").get_to(p.latitude);
  j.at("lon").get_to(p.longitude);
}

void to_json(Json& j, const Place& p) {
  j = Json{{"lat", p.point.latitude}, {"lon", p.point.longitude}, {"label", p.label}};
}

void from_json(const Json& j, Place& p) {
  from_json(j, p.point);
  p.label = j.value("label", std::string{});
}

void to_json(Json& j, const ProMTask& t) {
  j = Json{{"id", t.id}, {"wha", t.wha}, {"kind", t.kind}, {"profile", t.profile}, {"note", t.note}};
  put_optional(j, "per", t.per);
  put_optional(j, "whe", t.whe);
  put_optional(j, "rem", t.rem);
  put_optional(j, "loc", t.loc);
}

void from_json(const Json& j, ProMTask& t) {
  t.id = j.at("id").get<std::string>();
  t.wha = j.at("wha").get<std::string>();
  t.kind = j.at("kind").get<TaskKind>();
  t.profile = j.at("profile").get<FactorProfile>();
  t.note = j.value("note", std::string{});
  t.per = get_optional<std::string>(j, "per");
  t.whe = get_optional<Timestamp>(j, "whe");
  t.rem = get_optional<Timestamp>(j, "rem");
  t.loc = get_optional<Place>(j, "loc");
}

void to_json(Json& j, const ReminderModality& m) {
  j = Json{{"channel", to_string(m.channel)},
           {"duration", to_string(m.duration)},
           {"sound", to_string(m.sound)}};
}

void from_json(const Json& j, ReminderModality& m) {
  m.channel = parse_enum<Channel>(j.at("channel"), parse_channel, "channel");
  m.duration = parse_enum<Length>(j.at("duration"), parse_length, "duration");
  m.sound = parse_enum<Sound>(j.at("sound"), parse_sound, "sound");
}

void to_json(Json& j, const ReminderPlan& p) {
  j = Json{{"count", p.count},
           {"schedule", p.schedule},
           {"offsets_s", p.offsets},
           {"modality", p.modality},
           {"raw_modality_score", p.raw_modality_score},
           {"warnings", p.warnings}};
}

void from_json(const Json& j, ReminderPlan& p) {
  p.count = j.at("count").get<int>();
  p.schedule = j.at("schedule").get<std::vector<Timestamp>>();
  p.offsets = j.value("offsets_s", std::vector<Duration>{});
  p.modality = j.at("modality").get<ReminderModality>();
  p.raw_modality_score = j.at("raw_modality_score").get<ModalityScore>();
  p.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(Json& j, const AgentState& s) {
  j = Json{{"task_id", s.task_id},
           {"kind", s.kind},
           {"stage", s.stage},
           {"plan", s.plan},
           {"next_index", s.next_index},
           {"fired_count", s.fired_count},
           {"postpone_total_s", s.postpone_total},
           {"trigger_latched", s.trigger_latched},
           {"grace_s", s.grace},
           {"fired_at", s.fired_at}};
  put_optional(j, "deadline", s.deadline);
}

void from_json(const Json& j, AgentState& s) {
  s.task_id = j.at("task_id").get<std::string>();
  s.kind = j.at("kind").get<TaskKind>();
  s.stage = j.at("stage").get<Stage>();
  s.plan = j.at("plan").get<ReminderPlan>();
  s.next_index = j.at("next_index").get<int>();
  s.fired_count = j.at("fired_count").get<int>();
  s.postpone_total = j.at("postpone_total_s").get<Duration>();
  s.trigger_latched = j.at("trigger_latched").get<bool>();
  s.grace = j.at("grace_s").get<Duration>();
  s.fired_at = j.at("fired_at").get<std::vector<Timestamp>>();
  s.deadline = get_optional<Timestamp>(j, "deadline");
}

void to_json(Json& j, const AgentAction& a) {
  j = Json{{"kind", to_string(a.kind)}, {"task_id", a.task_id}, {"at", a.at}};
  if (a.kind == AgentAction::Kind::FireReminder) {
    j["index"] = a.index;
    j["modality"] = a.modality;
  }
}

void from_json(const Json& j, AgentAction& a) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "FireReminder") a.kind = AgentAction::Kind::FireReminder;
  else if (kind == "MarkCompleted") a.kind = AgentAction::Kind::MarkCompleted;
  else if (kind == "MarkExpired") a.kind = AgentAction::Kind::MarkExpired;
  else if (kind == "Noop") a.kind = AgentAction::Kind::Noop;
  else throw Error(ErrorCode::InvalidArgument, "unknown action kind: " + kind);
  a.task_id = j.at("task_id").get<std::string>();
  a.at = j.at("at").get<Timestamp>();
  a.index = j.value("index", -1);
  if (j.contains("modality")) a.modality = j.at("modality").get<ReminderModality>();
}

void to_json(Json& j, const UserResponse& r) {
  j = Json{{"kind", to_string(r.kind)}, {"at", r.at}, {"reminder_index", r.reminder_index}};
  if (r.kind == UserResponse::Kind::Postpone) j["delay_seconds"] = r.delay.count();
}

void from_json(const Json& j, UserResponse& r) {
  r.kind = parse_enum<UserResponse::Kind>(j.at("kind"), parse_response_kind, "response kind");
  r.at = j.at("at").get<Timestamp>();
  r.reminder_index = j.at("reminder_index").get<int>();
  r.delay = Duration{j.value("delay_seconds", 0LL)};
}

void to_json(Json& j, const TriggerEvent& e) {
  j = Json{{"kind", to_string(e.kind)}, {"at", e.at}};
  if (e.kind == TriggerEvent::Kind::LocationEnter) {
    j["lat"] = e.point.latitude;
    j["lon"] = e.point.longitude;
  } else {
    j["name"] = e.name;
  }
}

void from_json(const Json& j, TriggerEvent& e) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "LocationEnter") {
    e.kind = TriggerEvent::Kind::LocationEnter;
    from_json(j, e.point);
  } else if (kind == "CallingPerson") {
    e.kind = TriggerEvent::Kind::CallingPerson;
    e.name = j.at("name").get<std::string>();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown trigger kind: " + kind);
  }
  e.at = j.at("at").get<Timestamp>();
}

void to_json(Json& j, const InteractionRecord& r) {
  j = Json{{"task_id", r.task_id},
           {"reminder_index", r.reminder_index},
           {"modality_used", r.modality_used},
           {"response", to_string(r.response)}};
  if (r.latency) j["latency_s"] = r.latency->count();
}

void from_json(const Json& j, InteractionRecord& r) {
  r.task_id = j.at("task_id").get<std::string>();
  r.reminder_index = j.at("reminder_index").get<int>();
  r.modality_used = j.at("modality_used").get<ReminderModality>();
  r.response = parse_enum<UserResponse::Kind>(j.at("response"), parse_response_kind, "response kind");
  r.latency = get_optional<Duration>(j, "latency_s");
}

void to_json(Json& j, const PreferenceState& p) {
  j = Json{{"channel", p.channel},
           {"duration", p.duration},
           {"sound", p.sound},
           {"sample_count", p.sample_count}};
}

void from_json(const Json& j, PreferenceState& p) {
  p.channel = j.at("channel").get<double>();
  p.duration = j.at("duration").get<double>();
  p.sound = j.at("sound").get<double>();
  p.sample_count = j.at("sample_count").get<long long>();
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p.channel) || !in_unit(p.duration) || !in_unit(p.sound) || p.sample_count < 0) {
    throw Error(ErrorCode::Corrupt, "preference scores out of range");
  }
}

void to_json(Json& j, const Config& c) {
  j = Json{{"count_table", c.counts},
           {"modality_table", c.modality},
           {"weights", c.weights},
           {"agent",
            {{"grace_s", c.agent.grace.count()},
             {"event_spacing_s", c.agent.event_spacing.count()},
             {"proximity_radius_m", c.agent.proximity_radius_m}}},
           {"user_model", {{"alpha", c.learning.alpha}, {"lambda", c.learning.lambda}}}};
}

void from_json(const Json& j, Config& c) {
  get_if_present(j, "count_table", c.counts);
  get_if_present(j, "modality_table", c.modality);
  get_if_present(j, "weights", c.weights);
  if (const auto it = j.find("agent"); it != j.end()) {
    get_if_present(*it, "grace_s", c.agent.grace);
    get_if_present(*it, "event_spacing_s", c.agent.event_spacing);
    get_if_present(*it, "proximity_radius_m", c.agent.proximity_radius_m);
  }
  if (const auto it = j.find("user_model"); it != j.end()) {
    get_if_present(*it, "alpha", c.learning.alpha);
    get_if_present(*it, "lambda", c.learning.lambda);
  }
}

namespace {

// Field readers that record a problem instead of throwing.
class FieldReader {
 public:
  explicit FieldReader(const Json& body) : body_(body) {}

  std::vector<FieldError>& errors() { return errors_; }

  template <typename T>
  std::optional<T> read(const char* key) {
    const auto it = body_.find(key);
    if (it == body_.end() || it->is_null()) return std::nullopt;
    return convert<T>(*it, key);
  }

  template <typename T>
  std::optional<T> convert(const Json& value, const std::string& field) {
    try {
      return value.get<T>();
    } catch (const Error& e) {
      errors_.push_back({field, e.what()});
    } catch (const nlohmann::json::exception&) {
      errors_.push_back({field, "wrong type"});
    }
    return std::nullopt;
  }

  std::optional<Place> read_place(const Json& value) {
    if (!value.is_object() || !value.contains("lat") || !value.contains("lon") ||
        !value["lat"].is_number() || !value["lon"].is_number()) {
      errors_.push_back({"loc", "expected {\"lat\": number, \"lon\": number}"});
      return std::nullopt;
    }
    auto place = convert<Place>(value, "loc");
    if (place && !place->point.valid()) {
      errors_.push_back({"loc", "coordinates out of range"});
      return std::nullopt;
    }
    return place;
  }

  std::optional<FactorProfile> read_profile(const Json& value, FactorProfile base) {
    if (!value.is_object()) {
      errors_.push_back({"profile", "expected an object"});
      return std::nullopt;
    }
    auto field = [&](const char* key, auto& out) {
      if (const auto it = value.find(key); it != value.end() && !it->is_null()) {
        if (auto v = convert<std::decay_t<decltype(out)>>(*it, std::string("profile.") + key)) out = *v;
      }
    };
    field("com", base.com);
    field("imp", base.imp);
    field("mot", base.mot);
    field("age", base.age);
    field("typ", base.typ);
    return base;
  }

 private:
  const Json& body_;
  std::vector<FieldError> errors_;
};

}  // namespace

ProMTask task_from_descriptor(const Json& body) {
  if (!body.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "body must be a JSON object", {{"body", "expected an object"}});
  }
  FieldReader r(body);
  ProMTask task;
  if (auto v = r.read<std::string>("wha")) task.wha = *v;
  task.per = r.read<std::string>("per");
  task.whe = r.read<Timestamp>("whe");
  task.rem = r.read<Timestamp>("rem");
  if (auto it = body.find("loc"); it != body.end() && !it->is_null()) task.loc = r.read_place(*it);
  if (auto v = r.read<TaskKind>("kind")) task.kind = *v;
  if (auto it = body.find("profile"); it != body.end() && !it->is_null()) {
    if (auto p = r.read_profile(*it, task.profile)) task.profile = *p;
  }
  if (auto v = r.read<std::string>("note")) task.note = *v;

  auto errors = std::move(r.errors());
  if (errors.empty()) errors = validate_task(task);
  if (!errors.empty()) {
    throw invalid_fields(std::move(errors));
  }
  return task;
}

TaskEdits edits_from_json(const Json& body, const ProMTask& current) {
  if (!body.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "body must be a JSON object", {{"body", "expected an object"}});
  }
  FieldReader r(body);
  TaskEdits e;
  auto nullable = [&](const char* key, auto& out, auto reader) {
    const auto it = body.find(key);
    if (it == body.end()) return;
    using Inner = typename std::decay_t<decltype(out)>::value_type::value_type;
    if (it->is_null()) {
      out = std::optional<Inner>{};
    } else if (auto v = reader(*it)) {
      out = std::optional<Inner>{*v};
    }
  };
  if (body.contains("wha")) e.wha = r.read<std::string>("wha");
  nullable("per", e.per, [&](const Json& v) { return r.convert<std::string>(v, "per"); });
  nullable("whe", e.whe, [&](const Json& v) { return r.convert<Timestamp>(v, "whe"); });
  nullable("rem", e.rem, [&](const Json& v) { return r.convert<Timestamp>(v, "rem"); });
  nullable("loc", e.loc, [&](const Json& v) { return r.read_place(v); });
  if (body.contains("kind")) e.kind = r.read<TaskKind>("kind");
  if (body.contains("note")) e.note = r.read<std::string>("note");
  if (body.contains("profile")) {
    e.profile = r.read_profile(body["profile"], current.profile);
  }
  if (!r.errors().empty()) {
    auto errors = std::move(r.errors());
    throw invalid_fields(std::move(errors));
  }
  return e;
}

UserResponse response_from_json(const Json& body, Timestamp at) {
  std::vector<FieldError> errors;
  UserResponse r;
  r.at = at;
  if (!body.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "body must be a JSON object", {{"body", "expected an object"}});
  }
  const auto kind = body.find("kind");
  if (kind == body.end() || !kind->is_string() || !parse_response_kind(kind->get<std::string>())) {
    errors.push_back({"kind", "expected Accept, Postpone or Ignore"});
  } else {
    r.kind = *parse_response_kind(kind->get<std::string>());
  }
  const auto index = body.find("reminder_index");
  if (index == body.end() || !index->is_number_integer()) {
    errors.push_back({"reminder_index", "expected an integer"});
  } else {
    r.reminder_index = index->get<int>();
  }
  if (r.kind == UserResponse::Kind::Postpone) {
    const auto delay = body.find("delay_seconds");
    if (delay == body.end() || !delay->is_number_integer() || delay->get<long long>() <= 0) {
      errors.push_back({"delay_seconds", "postpone requires a positive delay in seconds"});
    } else {
      r.delay = Duration{delay->get<long long>()};
    }
  }
  if (!errors.empty()) {
    throw invalid_fields(std::move(errors));
  }
  return r;
}

}  // namespace promind
