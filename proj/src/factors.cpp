#include "promind/factors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace promind {

namespace {

int count_for_level(FactorLevel level, const CountTable& t) {
  switch (level) {
    case FactorLevel::Low: return t.n_high;
    case FactorLevel::Medium: return t.n_medium;
    case FactorLevel::High: return t.n_low;
  }
  return t.n_medium;
}

const ModalityScore& score_for_level(FactorLevel level, const LevelScores& s) {
  switch (level) {
    case FactorLevel::Low: return s.high;
    case FactorLevel::Medium: return s.medium;
    case FactorLevel::High: return s.low;
  }
  return s.medium;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool in_unit(const ModalityScore& s) {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  return ok(s.channel) && ok(s.duration) && ok(s.sound);
}

}  // namespace

ModalityTable ModalityTable::defaults() {
  ModalityTable t;
  t.com = {{0.1, 0.2, 0.3}, {0.4, 0.5, 0.5}, {0.8, 0.7, 0.6}};
  t.imp = {{0.2, 0.3, 0.4}, {0.5, 0.5, 0.5}, {0.9, 0.8, 0.6}};
  t.mot = {{0.2, 0.2, 0.4}, {0.5, 0.4, 0.5}, {0.8, 0.7, 0.6}};
  t.young = {0.3, 0.3, 0.5};
  t.old = {0.9, 0.9, 0.7};
  t.personal = {0.6, 0.5, 0.8};
  t.financial = {0.5, 0.6, 0.2};
  t.social = {0.6, 0.4, 0.9};
  t.work = {0.2, 0.3, 0.1};
  return t;
}

std::array<int, 4> count_contribution(const FactorProfile& p, const CountTable& t) {
  return {count_for_level(p.com, t), count_for_level(p.imp, t), count_for_level(p.mot, t),
          p.age == AgeGroup::Young ? t.a_young : t.a_old};
}

std::array<ModalityScore, 5> modality_contribution(const FactorProfile& p, const ModalityTable& t) {
  const ModalityScore* category = &t.personal;
  switch (p.typ) {
    case TaskCategory::Personal: category = &t.personal; break;
    case TaskCategory::Financial: category = &t.financial; break;
    case TaskCategory::Social: category = &t.social; break;
    case TaskCategory::Work: category = &t.work; break;
  }
  return {score_for_level(p.com, t.com), score_for_level(p.imp, t.imp),
          score_for_level(p.mot, t.mot), p.age == AgeGroup::Young ? t.young : t.old, *category};
}

std::vector<std::string> validate_tables(const CountTable& c, const ModalityTable& m,
                                         const Weights& w) {
  std::vector<std::string> errors;

  if (c.n_low < 1 || c.n_medium < 1 || c.n_high < 1 || c.a_young < 1 || c.a_old < 1 ||
      c.max_count < 1) {
    errors.emplace_back("count table entries must be positive");
  }
  if (!(c.n_low <= c.n_medium && c.n_medium <= c.n_high)) {
    errors.emplace_back("count table not monotone");
  }
  if (c.n_high > c.max_count || c.a_young > c.max_count || c.a_old > c.max_count) {
    errors.emplace_back("count table entry exceeds max_count");
  }

  const std::array<std::pair<const char*, const ModalityScore*>, 15> entries{{
      {"com.low", &m.com.low},       {"com.medium", &m.com.medium}, {"com.high", &m.com.high},
      {"imp.low", &m.imp.low},       {"imp.medium", &m.imp.medium}, {"imp.high", &m.imp.high},
      {"mot.low", &m.mot.low},       {"mot.medium", &m.mot.medium}, {"mot.high", &m.mot.high},
      {"age.young", &m.young},       {"age.old", &m.old},           {"typ.personal", &m.personal},
      {"typ.financial", &m.financial}, {"typ.social", &m.social},   {"typ.work", &m.work},
  }};
  for (const auto& [name, score] : entries) {
    if (!in_unit(*score)) errors.push_back(std::string("modality entry ") + name + " outside [0,1]");
  }

  auto check_weights = [&](auto const& ws, const char* which) {
    bool bad = false;
    for (double v : ws) bad = bad || !std::isfinite(v) || v < 0.0;
    if (bad) {
      errors.push_back(std::string(which) + " weights must be non-negative");
      return;
    }
    if (std::accumulate(ws.begin(), ws.end(), 0.0) <= 0.0) errors.emplace_back("weights sum to zero");
  };
  check_weights(w.count, "count");
  check_weights(w.modality, "modality");

  // Both weight sets zero should read as one problem.
  std::sort(errors.begin(), errors.end());
  errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
  return errors;
}

std::string_view to_string(FactorLevel v) {
  switch (v) {
    case FactorLevel::Low: return "Low";
    case FactorLevel::Medium: return "Medium";
    case FactorLevel::High: return "High";
  }
  return "Medium";
}

std::string_view to_string(AgeGroup v) { return v == AgeGroup::Young ? "Young" : "Old"; }

std::string_view to_string(TaskCategory v) {
  switch (v) {
    case TaskCategory::Personal: return "Personal";
    case TaskCategory::Financial: return "Financial";
    case TaskCategory::Social: return "Social";
    case TaskCategory::Work: return "Work";
  }
  return "Personal";
}

std::string_view to_string(TaskKind v) {
  return v == TaskKind::TimeBased ? "TimeBased" : "EventBased";
}

std::optional<FactorLevel> parse_factor_level(std::string_view s) {
  const auto v = lower(s);
  if (v == "l" || v == "low") return FactorLevel::Low;
  if (v == "m" || v == "medium") return FactorLevel::Medium;
  if (v == "h" || v == "high") return FactorLevel::High;
  return std::nullopt;
}

std::optional<AgeGroup> parse_age_group(std::string_view s) {
  const auto v = lower(s);
  if (v == "y" || v == "young") return AgeGroup::Young;
  if (v == "o" || v == "old") return AgeGroup::Old;
  return std::nullopt;
}

std::optional<TaskCategory> parse_task_category(std::string_view s) {
  const auto v = lower(s);
  if (v == "per" || v == "personal") return TaskCategory::Personal;
  if (v == "fin" || v == "financial" || v == "finance") return TaskCategory::Financial;
  if (v == "soc" || v == "social") return TaskCategory::Social;
  if (v == "wor" || v == "work") return TaskCategory::Work;
  return std::nullopt;
}

std::optional<TaskKind> parse_task_kind(std::string_view s) {
  const auto v = lower(s);
  if (v == "timebased" || v == "time" || v == "time_based") return TaskKind::TimeBased;
  if (v == "eventbased" || v == "event" || v == "event_based") return TaskKind::EventBased;
  return std::nullopt;
}

}  // namespace promind
