#pragma once

// The reminder planner: how many reminders, when, and in what form.

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promind/config.hpp"
#include "promind/factors.hpp"
#include "promind/geo.hpp"
#include "promind/task.hpp"
#include "promind/time.hpp"

namespace promind {

enum class Channel { Visual, Audio };
enum class Length { Short, Long };
enum class Sound { Ring, Music };  // only meaningful for Audio

struct ReminderModality {
  Channel channel = Channel::Visual;
  Length duration = Length::Short;
  Sound sound = Sound::Ring;

  bool operator==(const ReminderModality&) const = default;
};

struct ReminderPlan {
  int count = 1;
  // Absolute fire times. Event-based tasks keep this empty until their
  // trigger latches; `offsets` holds the schedule relative to the trigger.
  std::vector<Timestamp> schedule;
  std::vector<Duration> offsets;
  ReminderModality modality;
  ModalityScore raw_modality_score;
  std::vector<std::string> warnings;

  bool relative() const noexcept { return schedule.empty() && !offsets.empty(); }
  bool operator==(const ReminderPlan&) const = default;
};

using TravelMinutes = std::chrono::duration<double, std::ratio<60>>;

/// Weighted average of the count contributions, rounded half away from zero
/// and clamped to [1, max_count]. Requires a positive weight sum.
int compute_reminder_count(const FactorProfile& profile, const CountTable& table,
                           const Weights& weights);

/// Straight-line travel time between two points.
TravelMinutes compute_time_cost(const GeoPoint& from, const GeoPoint& to, TravelMode mode);

struct FirstReminder {
  Timestamp rem;
  bool adjusted = false;
  bool infeasible = false;  // the adjusted time already lies before `now`
};

/// Moves the first reminder earlier to whe - time_cost when the travel time
/// exceeds whe - rem. Travel time is rounded up to whole seconds.
FirstReminder adjust_first_reminder(Timestamp rem, Timestamp whe, TravelMinutes time_cost,
                                    std::optional<Timestamp> now = std::nullopt);

struct Distribution {
  std::vector<Timestamp> schedule;
  int requested = 0;

  bool reduced() const noexcept { return static_cast<int>(schedule.size()) < requested; }
};

/// `count` fire times evenly spaced over [rem, whe], both ends included, at
/// whole-second resolution. Entries that collapse onto each other are merged.
Distribution distribute_schedule(Timestamp rem, Timestamp whe, int count);

/// Threshold decode: an axis value >= 0.5 selects Audio / Long / Music.
ReminderModality decode_modality(const ModalityScore& score);

struct ModalityResult {
  ReminderModality modality;
  ModalityScore score;
};

ModalityResult compute_modality(const FactorProfile& profile, const ModalityTable& table,
                                const Weights& weights);

struct PlanContext {
  std::optional<GeoPoint> current_location;
  TravelMode mode = TravelMode::Walk;
  std::optional<Timestamp> now;
};

/// Composes count, schedule and modality into one plan. Throws
/// Error(InvalidArgument) for tasks that violate their invariants.
ReminderPlan build_plan(const ProMTask& task, const Config& config, const PlanContext& context = {});

std::string_view to_string(Channel c);
std::string_view to_string(Length l);
std::string_view to_string(Sound s);
std::optional<Channel> parse_channel(std::string_view s);
std::optional<Length> parse_length(std::string_view s);
std::optional<Sound> parse_sound(std::string_view s);

}  // namespace promind
