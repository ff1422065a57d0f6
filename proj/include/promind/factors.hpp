#pragma once

// Factor vocabulary for reminder planning and the response tables that map
// factor levels to reminder-count contributions and modality scores.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promind {

enum class FactorLevel { Low, Medium, High };
enum class AgeGroup { Young, Old };
enum class TaskCategory { Personal, Financial, Social, Work };
enum class TaskKind { TimeBased, EventBased };

struct FactorProfile {
  FactorLevel com = FactorLevel::Medium;  // complexity of the ongoing task
  FactorLevel imp = FactorLevel::Medium;  // importance of the intended task
  FactorLevel mot = FactorLevel::Medium;  // motivation for the intended task
  AgeGroup age = AgeGroup::Young;
  TaskCategory typ = TaskCategory::Personal;

  bool operator==(const FactorProfile&) const = default;
};

/// Reminder counts contributed by each factor level. Lookups invert the level:
/// a Low factor contributes `n_high`, a High factor contributes `n_low`.
struct CountTable {
  int n_low = 1;
  int n_medium = 2;
  int n_high = 3;
  int a_young = 1;
  int a_old = 3;
  int max_count = 5;

  bool operator==(const CountTable&) const = default;
};

/// Position of a reminding way on three axes, each in [0,1]:
/// channel 0 = visual .. 1 = audio, duration 0 = short .. 1 = long,
/// sound 0 = ring .. 1 = music.
struct ModalityScore {
  double channel = 0.5;
  double duration = 0.5;
  double sound = 0.5;

  bool operator==(const ModalityScore&) const = default;
};

/// Score entries named after the constants they stand for: `low` is h_L,
/// `medium` is h_M, `high` is h_H.
struct LevelScores {
  ModalityScore low;
  ModalityScore medium;
  ModalityScore high;

  bool operator==(const LevelScores&) const = default;
};

struct ModalityTable {
  LevelScores com;
  LevelScores imp;
  LevelScores mot;
  ModalityScore young;
  ModalityScore old;
  ModalityScore personal;
  ModalityScore financial;
  ModalityScore social;
  ModalityScore work;

  bool operator==(const ModalityTable&) const = default;

  /// The shipped defaults: high complexity leans visual/short, old users lean audio/long.
  static ModalityTable defaults();
};

struct Weights {
  std::array<double, 4> count{1.0, 1.0, 1.0, 1.0};          // com, imp, mot, age
  std::array<double, 5> modality{1.0, 1.0, 1.0, 1.0, 1.0};  // com, imp, mot, age, typ

  bool operator==(const Weights&) const = default;
};

/// (t1..t4) for com, imp, mot, age.
std::array<int, 4> count_contribution(const FactorProfile& profile, const CountTable& table);

/// (h1..h5) for com, imp, mot, age, typ.
std::array<ModalityScore, 5> modality_contribution(const FactorProfile& profile,
                                                   const ModalityTable& table);

/// Every invariant violation across the three tables; empty means valid.
std::vector<std::string> validate_tables(const CountTable& counts, const ModalityTable& modality,
                                         const Weights& weights);

std::string_view to_string(FactorLevel v);
std::string_view to_string(AgeGroup v);
std::string_view to_string(TaskCategory v);
std::string_view to_string(TaskKind v);

// Parsers accept the long names ("Low", "personal") and the short symbols
// ("L", "y", "per", "fin", "soc", "wor"), case-insensitively.
std::optional<FactorLevel> parse_factor_level(std::string_view s);
std::optional<AgeGroup> parse_age_group(std::string_view s);
std::optional<TaskCategory> parse_task_category(std::string_view s);
std::optional<TaskKind> parse_task_kind(std::string_view s);

}  // namespace promind
