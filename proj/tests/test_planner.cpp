#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "promind/error.hpp"
#include "promind/planner.hpp"
#include "support.hpp"

using namespace promind;
using namespace promind::testing;

using L = FactorLevel;

namespace {

// Great-circle distance through the 3-D chord, a different route from the
// haversine formula.
double chord_km(GeoPoint a, GeoPoint b) {
  constexpr double kR = 6371.0;
  const auto xyz = [](GeoPoint p) {
    const double lat = p.latitude * std::numbers::pi / 180.0;
    const double lon = p.longitude * std::numbers::pi / 180.0;
    return std::array<double, 3>{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
  };
  const auto u = xyz(a), v = xyz(b);
  const double c = std::sqrt((u[0] - v[0]) * (u[0] - v[0]) + (u[1] - v[1]) * (u[1] - v[1]) +
                             (u[2] - v[2]) * (u[2] - v[2]));
  return 2.0 * kR * std::asin(std::min(1.0, c / 2.0));
}

// 2.5 km due east along the equator.
GeoPoint east_of_origin(double km) { return {0.0, km / 6371.0 * 180.0 / std::numbers::pi}; }

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("haversine agrees with the chord formula") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
    for (int i = 0; i < 500; ++i) {
      const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
      CHECK(haversine_km(a, b) == doctest::Approx(chord_km(a, b)).epsilon(1e-9));
    }
    CHECK(haversine_km({51.5, -0.12}, {51.5, -0.12}) == 0.0);
  }

  TEST_CASE("2.5 km on foot takes 30 minutes, by car 2.5") {
    const GeoPoint here{0.0, 0.0};
    const auto walk = compute_time_cost(here, east_of_origin(2.5), TravelMode::Walk);
    CHECK(std::abs(std::chrono::duration<double>(walk).count() - 1800.0) <= 1.0);
    const auto car = compute_time_cost(here, east_of_origin(2.5), TravelMode::Car);
    CHECK(std::abs(std::chrono::duration<double>(car).count() - 150.0) <= 1.0);
  }

  TEST_CASE("first reminder moves earlier only when travel does not fit") {
    const auto moved = adjust_first_reminder(utc(13, 50), utc(14, 0), TravelMinutes{30.0});
    CHECK(moved.rem == utc(13, 30));
    CHECK(moved.adjusted);
    CHECK_FALSE(moved.infeasible);

    const auto kept = adjust_first_reminder(utc(13, 30), utc(14, 0), TravelMinutes{10.0});
    CHECK(kept.rem == utc(13, 30));
    CHECK_FALSE(kept.adjusted);

    const auto exact = adjust_first_reminder(utc(13, 30), utc(14, 0), TravelMinutes{30.0});
    CHECK_FALSE(exact.adjusted);

    const auto late = adjust_first_reminder(utc(13, 50), utc(14, 0), TravelMinutes{30.0}, utc(13, 45));
    CHECK(late.rem == utc(13, 30));
    CHECK(late.infeasible);

    const auto partial = adjust_first_reminder(utc(13, 50), utc(14, 0), TravelMinutes{10.5 + 1.0 / 120.0});
    CHECK(partial.rem == utc(13, 49, 29));

    CHECK_THROWS_AS(adjust_first_reminder(utc(14, 0), utc(14, 0), TravelMinutes{1.0}), Error);
  }

  TEST_CASE("count of the worked examples") {
    const Config c;
    CHECK(compute_reminder_count(profile(L::High, L::High, L::High, AgeGroup::Young), c.counts, c.weights) == 1);
    CHECK(compute_reminder_count(profile(L::Low, L::Low, L::Low, AgeGroup::Old), c.counts, c.weights) == 3);
    // (2 + 2 + 2 + 1) / 4 = 1.75
    CHECK(compute_reminder_count(FactorProfile{}, c.counts, c.weights) == 2);
    // (3 + 2 + 1 + 3) / 4 = 2.25
    CHECK(compute_reminder_count(profile(L::Low, L::Medium, L::High, AgeGroup::Old), c.counts, c.weights) == 2);
    // (3 + 3 + 1 + 3) / 4 = 2.5 rounds away from zero
    CHECK(compute_reminder_count(profile(L::Low, L::Low, L::High, AgeGroup::Old), c.counts, c.weights) == 3);
  }

  TEST_CASE("count agrees with integer arithmetic on every profile") {
    const Config c;
    const int by_level[] = {3, 2, 1};  // Low, Medium, High
    for (int com = 0; com < 3; ++com)
      for (int imp = 0; imp < 3; ++imp)
        for (int mot = 0; mot < 3; ++mot)
          for (int age = 0; age < 2; ++age) {
            const int sum = by_level[com] + by_level[imp] + by_level[mot] + (age ? 3 : 1);
            const int expected = (2 * sum + 4) / 8;  // round(sum / 4), halves up
            const auto p = profile(static_cast<L>(com), static_cast<L>(imp), static_cast<L>(mot),
                                   static_cast<AgeGroup>(age));
            CAPTURE(sum);
            CHECK(compute_reminder_count(p, c.counts, c.weights) == std::clamp(expected, 1, 5));
          }
  }

  TEST_CASE("count is clamped to max_count") {
    Config c;
    c.counts.max_count = 2;
    CHECK(compute_reminder_count(profile(L::Low, L::Low, L::Low, AgeGroup::Old), c.counts, c.weights) == 2);
  }

  TEST_CASE("zero weights are rejected") {
    Config c;
    c.weights.count = {0, 0, 0, 0};
    CHECK_THROWS_AS(compute_reminder_count(FactorProfile{}, c.counts, c.weights), Error);
  }

  TEST_CASE("schedule spreads evenly over the window") {
    const auto d = distribute_schedule(utc(13, 0), utc(14, 0), 3);
    CHECK(d.schedule == std::vector<Timestamp>{utc(13, 0), utc(13, 30), utc(14, 0)});
    CHECK_FALSE(d.reduced());
    CHECK(distribute_schedule(utc(13, 0), utc(14, 0), 1).schedule == std::vector<Timestamp>{utc(13, 0)});
    // 100 s over 3 gaps: 33.3 -> 33, 66.7 -> 67
    CHECK(distribute_schedule(utc(13, 0), utc(13, 1, 40), 4).schedule ==
          std::vector<Timestamp>{utc(13, 0), utc(13, 0, 33), utc(13, 1, 7), utc(13, 1, 40)});
  }

  TEST_CASE("schedule collapses when the window is too short") {
    const auto d = distribute_schedule(utc(13, 0), utc(13, 0, 2), 5);
    CHECK(d.schedule == std::vector<Timestamp>{utc(13, 0), utc(13, 0, 1), utc(13, 0, 2)});
    CHECK(d.reduced());
    CHECK(d.requested == 5);
  }

  TEST_CASE("schedule properties hold on random windows") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long long> span(1, 6 * 3600);
    std::uniform_int_distribution<int> count(1, 5);
    for (int i = 0; i < 2000; ++i) {
      const Timestamp rem = utc(8, 0) + Duration{span(rng)};
      const Timestamp whe = rem + Duration{span(rng)};
      const int n = count(rng);
      const auto d = distribute_schedule(rem, whe, n);
      REQUIRE_FALSE(d.schedule.empty());
      CHECK(d.schedule.front() == rem);
      CHECK(std::adjacent_find(d.schedule.begin(), d.schedule.end(), std::greater_equal<>{}) ==
            d.schedule.end());
      CHECK(d.schedule.back() <= whe);
      if ((whe - rem).count() >= n - 1) {
        CHECK(static_cast<int>(d.schedule.size()) == n);
        if (n > 1) CHECK(d.schedule.back() == whe);
      }
    }
  }

  TEST_CASE("modality of the default profile") {
    // channel (0.4+0.5+0.5+0.3+0.6)/5 = 0.46, duration 0.44, sound 0.56
    const Config c;
    const auto m = compute_modality(FactorProfile{}, c.modality, c.weights);
    CHECK(m.score.channel == doctest::Approx(0.46));
    CHECK(m.score.duration == doctest::Approx(0.44));
    CHECK(m.score.sound == doctest::Approx(0.56));
    CHECK(m.modality == ReminderModality{Channel::Visual, Length::Short, Sound::Music});
  }

  TEST_CASE("modality ties decode to the audio, long, music side") {
    CHECK(decode_modality({0.5, 0.5, 0.5}) == ReminderModality{Channel::Audio, Length::Long, Sound::Music});
    CHECK(decode_modality({0.4999999999999, 0.5000000000001, 0.49}) ==
          ReminderModality{Channel::Audio, Length::Long, Sound::Ring});
    CHECK(decode_modality({0.49, 0.0, 1.0}) == ReminderModality{Channel::Visual, Length::Short, Sound::Music});
  }

  TEST_CASE("scaling every weight leaves count and modality unchanged") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> scale(1e-6, 10.0), base(0.05, 3.0);
    const Config c;
    for (int i = 0; i < 500; ++i) {
      const auto p = random_profile(rng);
      Weights w;
      if (i % 2) {
        for (auto& x : w.count) x = base(rng);
        for (auto& x : w.modality) x = base(rng);
      }
      Weights scaled = w;
      const double k = scale(rng);
      for (auto& x : scaled.count) x *= k;
      for (auto& x : scaled.modality) x *= k;
      CHECK(compute_reminder_count(p, c.counts, w) == compute_reminder_count(p, c.counts, scaled));
      CHECK(compute_modality(p, c.modality, w).modality == compute_modality(p, c.modality, scaled).modality);
    }
  }

  TEST_CASE("time-based plan") {
    const Config c;
    auto task = timed_task("t1", utc(13, 0), utc(14, 0), profile(L::Low, L::Low, L::Low, AgeGroup::Old));
    const auto plan = build_plan(task, c);
    CHECK(plan.count == 3);
    CHECK(plan.schedule == std::vector<Timestamp>{utc(13, 0), utc(13, 30), utc(14, 0)});
    CHECK(plan.offsets.empty());
    CHECK(plan.warnings.empty());
  }

  TEST_CASE("plan with travel moves the first reminder") {
    const Config c;
    auto task = timed_task("t1", utc(13, 50), utc(14, 0));
    task.loc = Place{east_of_origin(2.5), "office"};
    PlanContext ctx{GeoPoint{0.0, 0.0}, TravelMode::Walk, utc(13, 0)};
    const auto plan = build_plan(task, c, ctx);
    CHECK(plan.schedule == std::vector<Timestamp>{utc(13, 30), utc(14, 0)});
    CHECK(*task.whe - plan.schedule.front() >= Duration{1800});

    ctx.now = utc(13, 40);
    CHECK(build_plan(task, c, ctx).warnings.size() == 1);
  }

  TEST_CASE("short window reduces the count with a warning") {
    const Config c;
    auto task = timed_task("t1", utc(13, 0), utc(13, 0, 1), profile(L::Low, L::Low, L::Low, AgeGroup::Old));
    const auto plan = build_plan(task, c);
    CHECK(plan.count == 2);
    CHECK(plan.schedule.size() == 2);
    REQUIRE(plan.warnings.size() == 1);
    CHECK(plan.warnings[0].find("reduced to 2") != std::string::npos);
  }

  TEST_CASE("event-based plan is relative to its trigger") {
    const Config c;
    ProMTask task;
    task.id = "t1";
    task.wha = "buy milk";
    task.kind = TaskKind::EventBased;
    task.loc = Place{{48.85, 2.35}, "shop"};
    task.profile = profile(L::Low, L::Low, L::Low, AgeGroup::Old);
    const auto plan = build_plan(task, c);
    CHECK(plan.schedule.empty());
    CHECK(plan.offsets == std::vector<Duration>{Duration{0}, Duration{300}, Duration{600}});
    CHECK(plan.relative());
  }

  TEST_CASE("invalid tasks are rejected with field errors") {
    const Config c;
    auto task = timed_task("t1", utc(14, 0), utc(13, 0));
    try {
      build_plan(task, c);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
      REQUIRE_FALSE(e.fields().empty());
      CHECK(e.fields().front().field == "rem");
    }
    ProMTask event;
    event.wha = "call";
    event.kind = TaskKind::EventBased;
    CHECK_THROWS_AS(build_plan(event, c), Error);
  }
}
