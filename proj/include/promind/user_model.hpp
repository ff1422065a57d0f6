#pragma once

// Personalized user model: learns which reminding way the user responds to
// and nudges future plans toward it. Count and schedule are never touched.

#include <optional>
#include <string>

#include "promind/agent.hpp"
#include "promind/planner.hpp"

namespace promind {

struct InteractionRecord {
  std::string task_id;
  int reminder_index = 0;
  ReminderModality modality_used;
  UserResponse::Kind response = UserResponse::Kind::Ignore;
  std::optional<Duration> latency;  // fire to response; absent for Ignore

  bool operator==(const InteractionRecord&) const = default;
};

/// Per-axis acceptance scores in [0,1]. A score leans toward 1 when the user
/// accepts Audio / Long / Music reminders and toward 0 when they accept
/// Visual / Short / Ring ones.
struct PreferenceState {
  double channel = 0.5;
  double duration = 0.5;
  double sound = 0.5;
  long long sample_count = 0;

  bool operator==(const PreferenceState&) const = default;
};

PreferenceState record_interaction(const PreferenceState& pref, const InteractionRecord& record,
                                   double alpha);

/// Blends the plan's raw modality score toward the learned preference and
/// re-decodes. lambda = 0 leaves the plan untouched.
ReminderPlan adapt_plan(const ReminderPlan& plan, const PreferenceState& pref, double lambda);

std::string export_preferences(const PreferenceState& pref);
/// Throws Error(Corrupt) on malformed input.
PreferenceState import_preferences(const std::string& text);

}  // namespace promind
