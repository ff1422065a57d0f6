#include <doctest.h>

#include "promind/error.hpp"
#include "promind/user_model.hpp"
#include "support.hpp"

using namespace promind;
using namespace promind::testing;

namespace {

InteractionRecord interaction(ReminderModality m, UserResponse::Kind kind) {
  InteractionRecord r;
  r.task_id = "t1";
  r.modality_used = m;
  r.response = kind;
  return r;
}

const ReminderModality kAudioLongMusic{Channel::Audio, Length::Long, Sound::Music};
const ReminderModality kVisualShortRing{Channel::Visual, Length::Short, Sound::Ring};

}  // namespace

TEST_SUITE("user_model") {
  TEST_CASE("fresh preferences sit at the midpoint") {
    const PreferenceState p;
    CHECK(p.channel == 0.5);
    CHECK(p.duration == 0.5);
    CHECK(p.sound == 0.5);
    CHECK(p.sample_count == 0);
  }

  TEST_CASE("three accepts on audio move the channel score up") {
    PreferenceState p;
    for (int i = 0; i < 3; ++i) p = record_interaction(p, interaction(kAudioLongMusic, UserResponse::Kind::Accept), 0.2);
    // 0.5 -> 0.6 -> 0.68 -> 0.744
    CHECK(p.channel == doctest::Approx(0.744));
    CHECK(p.duration == doctest::Approx(0.744));
    CHECK(p.sample_count == 3);
  }

  TEST_CASE("accepting the low side pushes toward zero") {
    const auto p = record_interaction({}, interaction(kVisualShortRing, UserResponse::Kind::Accept), 0.2);
    CHECK(p.channel == doctest::Approx(0.4));
    CHECK(p.sound == doctest::Approx(0.4));
  }

  TEST_CASE("ignoring audio pushes the channel score down") {
    const auto p = record_interaction({}, interaction(kAudioLongMusic, UserResponse::Kind::Ignore), 0.2);
    CHECK(p.channel == doctest::Approx(0.4));
    const auto q = record_interaction({}, interaction(kVisualShortRing, UserResponse::Kind::Postpone), 0.2);
    CHECK(q.channel == doctest::Approx(0.6));
  }

  TEST_CASE("scores stay inside the unit interval") {
    PreferenceState p;
    for (int i = 0; i < 200; ++i) p = record_interaction(p, interaction(kAudioLongMusic, UserResponse::Kind::Accept), 0.9);
    CHECK(p.channel <= 1.0);
    CHECK(p.channel > 0.99);
  }

  TEST_CASE("lambda zero leaves the plan alone") {
    ReminderPlan plan;
    plan.raw_modality_score = {0.45, 0.45, 0.45};
    plan.modality = decode_modality(plan.raw_modality_score);
    PreferenceState p;
    p.channel = 1.0;
    CHECK(adapt_plan(plan, p, 0.0) == plan);
  }

  TEST_CASE("adaptation flips an axis near the threshold") {
    ReminderPlan plan;
    plan.count = 2;
    plan.schedule = {utc(13, 0), utc(14, 0)};
    plan.raw_modality_score = {0.45, 0.2, 0.45};
    plan.modality = decode_modality(plan.raw_modality_score);
    PreferenceState p;
    p.channel = 0.7;  // 0.7*0.45 + 0.3*0.7 = 0.525
    p.duration = 0.7; // 0.7*0.2 + 0.3*0.7 = 0.35
    const auto adapted = adapt_plan(plan, p, 0.3);
    CHECK(adapted.modality.channel == Channel::Audio);
    CHECK(adapted.modality.duration == Length::Short);
    CHECK(adapted.count == plan.count);
    CHECK(adapted.schedule == plan.schedule);
    CHECK(adapted.raw_modality_score == plan.raw_modality_score);
  }

  TEST_CASE("preferences export and import") {
    PreferenceState p;
    p.channel = 0.25;
    p.sample_count = 4;
    CHECK(import_preferences(export_preferences(p)) == p);
    CHECK_THROWS_AS(import_preferences("{\"channel\": "), Error);
  }
}
