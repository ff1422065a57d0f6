#include "promind/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "promind/error.hpp"

namespace promind {

namespace {

// Weighted averages are snapped to a 1e-9 grid before rounding or
// thresholding, so scaling all weights cannot move a value across a tie.
double snap(double v) { return std::round(v * 1e9) / 1e9; }

template <std::size_t N>
double weight_sum(const std::array<double, N>& w) {
  return std::accumulate(w.begin(), w.end(), 0.0);
}

}  // namespace

int compute_reminder_count(const FactorProfile& profile, const CountTable& table,
                           const Weights& weights) {
  const double total = weight_sum(weights.count);
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights sum to zero");

  const auto t = count_contribution(profile, table);
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) acc += weights.count[i] * t[i];
  const double rounded = std::round(snap(acc / total));
  return std::clamp(static_cast<int>(rounded), 1, table.max_count);
}

TravelMinutes compute_time_cost(const GeoPoint& from, const GeoPoint& to, TravelMode mode) {
  const double hours = haversine_km(from, to) / travel_speed_kmh(mode);
  return TravelMinutes{hours * 60.0};
}

FirstReminder adjust_first_reminder(Timestamp rem, Timestamp whe, TravelMinutes time_cost,
                                    std::optional<Timestamp> now) {
  if (!(rem < whe)) throw Error(ErrorCode::InvalidArgument, "first reminder must precede execution time");
  if (time_cost.count() < 0.0) throw Error(ErrorCode::InvalidArgument, "negative travel time");

  // Round up to whole seconds, ignoring sub-microsecond noise from the
  // distance computation so that 2.5 km on foot stays exactly 30 minutes.
  const double seconds = std::chrono::duration<double>(time_cost).count();
  const Duration cost{static_cast<long long>(std::ceil(seconds - 1e-6))};
  FirstReminder out{rem};
  if (cost <= whe - rem) return out;
  out.rem = whe - cost;
  out.adjusted = true;
  out.infeasible = now.has_value() && out.rem < *now;
  return out;
}

Distribution distribute_schedule(Timestamp rem, Timestamp whe, int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "reminder count must be at least 1");
  if (whe < rem) throw Error(ErrorCode::InvalidArgument, "schedule window is inverted");

  Distribution out;
  out.requested = count;
  out.schedule.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.schedule.push_back(rem);
    return out;
  }
  const long long span = (whe - rem).count();
  const long long gaps = count - 1;
  for (long long i = 0; i < count; ++i) {
    // round(i * span / gaps), half up; all terms are non-negative
    const long long offset = (2 * i * span + gaps) / (2 * gaps);
    const Timestamp at = rem + Duration{offset};
    if (out.schedule.empty() || out.schedule.back() < at) out.schedule.push_back(at);
  }
  return out;
}

ReminderModality decode_modality(const ModalityScore& s) {
  return {snap(s.channel) >= 0.5 ? Channel::Audio : Channel::Visual,
          snap(s.duration) >= 0.5 ? Length::Long : Length::Short,
          snap(s.sound) >= 0.5 ? Sound::Music : Sound::Ring};
}

ModalityResult compute_modality(const FactorProfile& profile, const ModalityTable& table,
                                const Weights& weights) {
  const double total = weight_sum(weights.modality);
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights sum to zero");

  const auto h = modality_contribution(profile, table);
  ModalityScore s{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < h.size(); ++i) {
    s.channel += weights.modality[i] * h[i].channel;
    s.duration += weights.modality[i] * h[i].duration;
    s.sound += weights.modality[i] * h[i].sound;
  }
  s = {s.channel / total, s.duration / total, s.sound / total};
  return {decode_modality(s), s};
}

ReminderPlan build_plan(const ProMTask& task, const Config& config, const PlanContext& context) {
  if (auto errors = validate_task(task); !errors.empty()) {
    throw invalid_fields(std::move(errors));
  }

  ReminderPlan plan;
  plan.count = compute_reminder_count(task.profile, config.counts, config.weights);
  const auto modality = compute_modality(task.profile, config.modality, config.weights);
  plan.modality = modality.modality;
  plan.raw_modality_score = modality.score;

  if (task.kind == TaskKind::EventBased) {
    for (int i = 0; i < plan.count; ++i) plan.offsets.push_back(i * config.agent.event_spacing);
    return plan;
  }

  Timestamp first = *task.rem;
  if (context.current_location && task.loc) {
    const auto cost = compute_time_cost(*context.current_location, task.loc->point, context.mode);
    const auto adjusted = adjust_first_reminder(first, *task.whe, cost, context.now);
    first = adjusted.rem;
    if (adjusted.infeasible) {
      plan.warnings.push_back("infeasible travel: departure time " + format_rfc3339(first) +
                              " has already passed");
    }
  }

  auto distribution = distribute_schedule(first, *task.whe, plan.count);
  if (distribution.reduced()) {
    plan.warnings.push_back("schedule window too short: " + std::to_string(plan.count) +
                            " reminders reduced to " + std::to_string(distribution.schedule.size()));
    plan.count = static_cast<int>(distribution.schedule.size());
  }
  plan.schedule = std::move(distribution.schedule);
  return plan;
}

std::string_view to_string(Channel c) { return c == Channel::Visual ? "Visual" : "Audio"; }
std::string_view to_string(Length l) { return l == Length::Short ? "Short" : "Long"; }
std::string_view to_string(Sound s) { return s == Sound::Ring ? "Ring" : "Music"; }

std::optional<Channel> parse_channel(std::string_view s) {
  if (s == "Visual") return Channel::Visual;
  if (s == "Audio") return Channel::Audio;
  return std::nullopt;
}

std::optional<Length> parse_length(std::string_view s) {
  if (s == "Short") return Length::Short;
  if (s == "Long") return Length::Long;
  return std::nullopt;
}

std::optional<Sound> parse_sound(std::string_view s) {
  if (s == "Ring") return Sound::Ring;
  if (s == "Music") return Sound::Music;
  return std::nullopt;
}

}  // namespace promind
