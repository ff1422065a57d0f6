#pragma once

// JSON wire forms of the domain types. Timestamps travel as RFC 3339 UTC
// text, durations as integer seconds, enums by name.

#include <json.hpp>

#include "promind/agent.hpp"
#include "promind/config.hpp"
#include "promind/factors.hpp"
#include "promind/planner.hpp"
#include "promind/task.hpp"
#include "promind/time.hpp"
#include "promind/user_model.hpp"

namespace nlohmann {

template <>
struct adl_serializer<promind::Timestamp> {
  static void to_json(json& j, const promind::Timestamp& t);
  static void from_json(const json& j, promind::Timestamp& t);
};

template <>
struct adl_serializer<promind::Duration> {
  static void to_json(json& j, const promind::Duration& d) { j = d.count(); }
  static void from_json(const json& j, promind::Duration& d) { d = promind::Duration{j.get<long long>()}; }
};

}  // namespace nlohmann

namespace promind {

using Json = nlohmann::json;

void to_json(Json& j, FactorLevel v);
void from_json(const Json& j, FactorLevel& v);
void to_json(Json& j, AgeGroup v);
void from_json(const Json& j, AgeGroup& v);
void to_json(Json& j, TaskCategory v);
void from_json(const Json& j, TaskCategory& v);
void to_json(Json& j, TaskKind v);
void from_json(const Json& j, TaskKind& v);
void to_json(Json& j, Stage v);
void from_json(const Json& j, Stage& v);

void to_json(Json& j, const FactorProfile& p);
void from_json(const Json& j, FactorProfile& p);
void to_json(Json& j, const CountTable& t);
void from_json(const Json& j, CountTable& t);
void to_json(Json& j, const ModalityScore& s);
void from_json(const Json& j, ModalityScore& s);
void to_json(Json& j, const LevelScores& s);
void from_json(const Json& j, LevelScores& s);
void to_json(Json& j, const ModalityTable& t);
void from_json(const Json& j, ModalityTable& t);
void to_json(Json& j, const Weights& w);
void from_json(const Json& j, Weights& w);

void to_json(Json& j, const GeoPoint& p);
void from_json(const Json& j, GeoPoint& p);
void to_json(Json& j, const Place& p);
void from_json(const Json& j, Place& p);
void to_json(Json& j, const ProMTask& t);
void from_json(const Json& j, ProMTask& t);

void to_json(Json& j, const ReminderModality& m);
void from_json(const Json& j, ReminderModality& m);
void to_json(Json& j, const ReminderPlan& p);
void from_json(const Json& j, ReminderPlan& p);

void to_json(Json& j, const AgentState& s);
void from_json(const Json& j, AgentState& s);
void to_json(Json& j, const AgentAction& a);
void from_json(const Json& j, AgentAction& a);
void to_json(Json& j, const UserResponse& r);
void from_json(const Json& j, UserResponse& r);
void to_json(Json& j, const TriggerEvent& e);
void from_json(const Json& j, TriggerEvent& e);

void to_json(Json& j, const InteractionRecord& r);
void from_json(const Json& j, InteractionRecord& r);
void to_json(Json& j, const PreferenceState& p);
void from_json(const Json& j, PreferenceState& p);

void to_json(Json& j, const Config& c);
/// Overlays the fields present in `j` onto `c`.
void from_json(const Json& j, Config& c);

/// Reads a client-supplied task descriptor. Factor levels default to Medium,
/// age to Young and category to Personal. Accepts RFC 3339 timestamps only.
/// Throws Error(InvalidArgument) carrying every field-level problem,
/// including task invariant violations.
ProMTask task_from_descriptor(const Json& body);

/// Reads a PATCH body. `null` clears an optional field; a partial profile
/// is completed from `current`.
TaskEdits edits_from_json(const Json& body, const ProMTask& current);

/// Reads {"kind": "Accept"|"Postpone"|"Ignore", "reminder_index": n,
/// "delay_seconds": s}. `at` is supplied by the caller.
UserResponse response_from_json(const Json& body, Timestamp at);

}  // namespace promind
