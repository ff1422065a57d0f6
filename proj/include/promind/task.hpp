#pragma once

#include <optional>
#include <string>
#include <vector>

#include "promind/error.hpp"
#include "promind/factors.hpp"
#include "promind/geo.hpp"
#include "promind/time.hpp"

namespace promind {

struct Place {
  GeoPoint point;
  std::string label;

  bool operator==(const Place&) const = default;
};

/// A user intention as entered: what, when, where, who.
struct ProMTask {
  std::string id;
  std::string wha;                 // title
  std::optional<std::string> per;  // person the task involves
  std::optional<Timestamp> whe;    // execution time
  std::optional<Timestamp> rem;    // requested first-reminder time
  std::optional<Place> loc;
  TaskKind kind = TaskKind::TimeBased;
  FactorProfile profile;
  std::string note;                // free-form execution guidance, carried but never rendered

  bool operator==(const ProMTask&) const = default;
};

/// Field-level invariant violations; empty when the task is well formed.
std::vector<FieldError> validate_task(const ProMTask& task);

/// Partial edit of a task. Optional-of-optional fields distinguish "leave
/// alone" (outer nullopt) from "clear" (inner nullopt).
struct TaskEdits {
  std::optional<std::string> wha;
  std::optional<std::optional<std::string>> per;
  std::optional<std::optional<Timestamp>> whe;
  std::optional<std::optional<Timestamp>> rem;
  std::optional<std::optional<Place>> loc;
  std::optional<TaskKind> kind;
  std::optional<FactorProfile> profile;
  std::optional<std::string> note;

  bool empty() const noexcept {
    return !wha && !per && !whe && !rem && !loc && !kind && !profile && !note;
  }
};

ProMTask apply_edits(ProMTask task, const TaskEdits& edits);

}  // namespace promind
