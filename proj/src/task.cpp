#include "promind/task.hpp"

namespace promind {

std::vector<FieldError> validate_task(const ProMTask& task) {
  std::vector<FieldError> errors;
  if (task.wha.empty()) errors.push_back({"wha", "title must not be empty"});
  if (task.loc && !task.loc->point.valid()) {
    errors.push_back({"loc", "coordinates out of range"});
  }
  if (task.per && task.per->empty()) errors.push_back({"per", "person must not be empty"});

  if (task.kind == TaskKind::TimeBased) {
    if (!task.whe) errors.push_back({"whe", "time-based task requires an execution time"});
    if (!task.rem) errors.push_back({"rem", "time-based task requires a first-reminder time"});
    if (task.whe && task.rem && !(*task.rem < *task.whe)) {
      errors.push_back({"rem", "first reminder must be before the execution time"});
    }
  } else {
    if (!task.loc && !task.per) {
      errors.push_back({"loc", "event-based task requires a place or a person"});
    }
    if (task.whe && task.rem && !(*task.rem < *task.whe)) {
      errors.push_back({"rem", "first reminder must be before the execution time"});
    }
  }
  return errors;
}

ProMTask apply_edits(ProMTask task, const TaskEdits& e) {
  if (e.wha) task.wha = *e.wha;
  if (e.per) task.per = *e.per;
  if (e.whe) task.whe = *e.whe;
  if (e.rem) task.rem = *e.rem;
  if (e.loc) task.loc = *e.loc;
  if (e.kind) task.kind = *e.kind;
  if (e.profile) task.profile = *e.profile;
  if (e.note) task.note = *e.note;
  return task;
}

}  // namespace promind
