#include <doctest.h>

#include <sstream>

#include "promind/codec.hpp"
#include "promind/error.hpp"
#include "promind/rng.hpp"
#include "promind/simulator.hpp"
#include "support.hpp"

using namespace promind;
using namespace promind::testing;

using L = FactorLevel;
using P = UserPolicy::Kind;

namespace {

ScenarioTask three(const std::string& id, UserPolicy::Kind kind, Timestamp rem = utc(13, 0),
                   Timestamp whe = utc(14, 0)) {
  ScenarioTask st;
  st.task = timed_task(id, rem, whe, profile(L::Low, L::Low, L::Low, AgeGroup::Old));
  st.policy.kind = kind;
  return st;
}

int count(const SimReport& r, TraceEvent::Kind k) {
  return static_cast<int>(std::count_if(r.event_trace.begin(), r.event_trace.end(),
                                        [&](const TraceEvent& e) { return e.kind == k; }));
}

Scenario mixed(int tasks) {
  Scenario s;
  for (int i = 0; i < tasks; ++i) {
    auto st = three("t" + std::to_string(i + 1), P::AcceptWithProbability, utc(9, 0) + Duration{i * 600},
                    utc(10, 0) + Duration{i * 900});
    st.task.profile = profile(static_cast<L>(i % 3), static_cast<L>((i / 3) % 3), static_cast<L>((i / 9) % 3),
                              static_cast<AgeGroup>(i % 2));
    s.tasks.push_back(st);
  }
  return s;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("splitmix64 reference values") {
    // First outputs for seed 0, as published with the algorithm.
    SplitMix64 g(0);
    CHECK(g.next() == 0xE220A8397B1DCDAFULL);
    CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(g.next() == 0x06C45D188009454FULL);
    SplitMix64 u(42);
    for (int i = 0; i < 1000; ++i) {
      const double x = u.uniform();
      CHECK((x >= 0.0 && x < 1.0));
    }
  }

  TEST_CASE("empty scenario gives an all-zero report") {
    CHECK(run(Scenario{}, 1) == SimReport{});
  }

  TEST_CASE("accepting the first reminder fires one") {
    Scenario s;
    s.tasks.push_back(three("t1", P::AlwaysAcceptFirst));
    const auto r = run(s, 1);
    CHECK(r.reminders_fired == 1);
    CHECK(r.tasks_completed == 1);
    CHECK(r.mean_time_to_accept == Duration{0});
    CHECK(format_trace(r) ==
          "2024-05-01T13:00:00Z t1 fire #0 Audio/Long/Music\n"
          "2024-05-01T13:00:00Z t1 accept #0\n"
          "2024-05-01T13:00:00Z t1 completed\n");
  }

  TEST_CASE("ignoring everything fires three then expires") {
    Scenario s;
    s.tasks.push_back(three("t1", P::AlwaysIgnore));
    const auto r = run(s, 1);
    CHECK(r.reminders_fired == 3);
    CHECK(r.expired_count == 1);
    CHECK(r.tasks_completed == 0);
    REQUIRE(r.event_trace.size() == 7);
    CHECK(r.event_trace.back().kind == TraceEvent::Kind::Expired);
    CHECK(r.event_trace.back().at == utc(14, 15, 1));
  }

  TEST_CASE("postpone once then accept") {
    Scenario s;
    auto st = three("t1", P::PostponeOnceThenAccept);
    st.policy.delay = Duration{600};
    s.tasks.push_back(st);
    const auto r = run(s, 1);
    CHECK(r.reminders_fired == 2);
    CHECK(r.tasks_completed == 1);
    CHECK(r.mean_time_to_accept == Duration{2400});  // 13:00 -> 13:40
    CHECK(r.event_trace[3].at == utc(13, 40));
  }

  TEST_CASE("busy until a time, then accept") {
    Scenario s;
    auto st = three("t1", P::BusyUntil);
    st.policy.until = utc(13, 50);
    s.tasks.push_back(st);
    const auto r = run(s, 1);
    CHECK(r.reminders_fired == 2);
    CHECK(r.tasks_completed == 1);
    CHECK(r.event_trace.back().at == utc(14, 0));  // postponed to 13:50, merged into 14:00

    s.tasks[0].policy.then_accept = false;
    const auto ignored = run(s, 1);
    CHECK(ignored.expired_count == 1);
  }

  TEST_CASE("same seed gives the same trace") {
    const auto s = mixed(50);
    const auto a = run(s, 7), b = run(s, 7);
    CHECK(format_trace(a) == format_trace(b));
    CHECK(a == b);
  }

  TEST_CASE("accounting holds for many seeds") {
    const auto s = mixed(30);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto r = run(s, seed);
      CAPTURE(seed);
      CHECK(r.reminders_fired == count(r, TraceEvent::Kind::Fire));
      CHECK(r.tasks_completed + r.expired_count + r.cancelled_count + r.pending_count == r.tasks_total);
      CHECK(r.tasks_completed == count(r, TraceEvent::Kind::Accept));
      for (const auto& e : r.event_trace) {
        if (e.kind != TraceEvent::Kind::Completed) continue;
        const bool accepted = std::any_of(r.event_trace.begin(), r.event_trace.end(), [&](const TraceEvent& x) {
          return x.task_id == e.task_id && x.kind == TraceEvent::Kind::Accept;
        });
        CHECK(accepted);
      }
      CHECK(std::is_sorted(r.event_trace.begin(), r.event_trace.end(),
                           [](const TraceEvent& x, const TraceEvent& y) { return x.at < y.at; }));
    }
  }

  TEST_CASE("always ignoring fires exactly the planned count") {
    auto s = mixed(27);
    int planned = 0;
    for (auto& st : s.tasks) {
      st.policy.kind = P::AlwaysIgnore;
      planned += build_plan(st.task, s.config).count;
    }
    const auto r = run(s, 3);
    CHECK(r.reminders_fired == planned);
    CHECK(r.expired_count == 27);
  }

  TEST_CASE("halving the tick step keeps the fired indices") {
    const auto s = mixed(20);
    const auto fired = [](const SimReport& r) {
      std::vector<std::pair<std::string, int>> out;
      for (const auto& e : r.event_trace) {
        if (e.kind == TraceEvent::Kind::Fire) out.emplace_back(e.task_id, e.index);
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    for (long long step : {240LL, 120LL, 60LL, 30LL}) {
      const auto coarse = run(s, 5, Duration{step});
      const auto fine = run(s, 5, Duration{step / 2});
      CAPTURE(step);
      CHECK(fired(coarse) == fired(fine));
      // each fire lands within one step of its scheduled time
      for (const auto& e : coarse.event_trace) {
        if (e.kind == TraceEvent::Kind::Fire) CHECK(e.at.time_since_epoch().count() % step == 0);
      }
    }
  }

  TEST_CASE("raising max_count never lowers completion or fired reminders") {
    const auto s = mixed(40);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::vector<std::pair<std::string, Config>> configs;
      for (int n : {1, 3, 5}) {
        configs.emplace_back(std::to_string(n), with_max_count(Config{}, n));
      }
      const auto rows = compare(s, configs, seed);
      CAPTURE(seed);
      CHECK(rows[0].report.tasks_completed <= rows[1].report.tasks_completed);
      CHECK(rows[1].report.tasks_completed <= rows[2].report.tasks_completed);
      CHECK(rows[0].report.reminders_fired <= rows[1].report.reminders_fired);
      CHECK(rows[1].report.reminders_fired <= rows[2].report.reminders_fired);
    }
  }

  TEST_CASE("identical configs give identical rows") {
    const auto rows = compare(mixed(10), {{"a", Config{}}, {"b", Config{}}}, 11);
    CHECK(rows[0].report == rows[1].report);
  }

  TEST_CASE("location event fires on the first tick at or after it") {
    Scenario s;
    ScenarioTask st;
    st.task.id = "e1";
    st.task.wha = "buy milk";
    st.task.kind = TaskKind::EventBased;
    st.task.loc = Place{{48.8566, 2.3522}, "shop"};
    st.task.profile = profile(L::Low, L::Low, L::Low, AgeGroup::Old);
    st.policy.kind = P::AlwaysIgnore;
    s.tasks.push_back(st);
    s.start = utc(9, 0);
    TriggerEvent e;
    e.kind = TriggerEvent::Kind::LocationEnter;
    e.point = {48.8567, 2.3522};
    e.at = utc(9, 0, 50);
    s = inject_event(s, e);
    s = inject_event(s, e);  // duplicate: latches once

    const auto r = run(s, 1, Duration{60});
    CHECK(count(r, TraceEvent::Kind::Latch) == 1);
    REQUIRE(r.event_trace.size() >= 2);
    CHECK(r.event_trace[0].kind == TraceEvent::Kind::Latch);
    CHECK(r.event_trace[1].kind == TraceEvent::Kind::Fire);
    CHECK(r.event_trace[1].at == utc(9, 1));
    CHECK(r.reminders_fired == 3);
    CHECK(r.expired_count == 1);
  }

  TEST_CASE("events without a matching event task are rejected") {
    Scenario s;
    s.tasks.push_back(three("t1", P::AlwaysIgnore));
    TriggerEvent e;
    e.point = {48.0, 2.0};
    e.at = utc(9, 0);
    try {
      inject_event(s, e);
      FAIL("expected rejection");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::Rejected);
    }
  }

  TEST_CASE("untriggered event tasks stay pending") {
    Scenario s;
    ScenarioTask st;
    st.task.id = "e1";
    st.task.wha = "ask Bob";
    st.task.kind = TaskKind::EventBased;
    st.task.per = "Bob";
    s.tasks.push_back(st);
    s.tasks.push_back(three("t2", P::AlwaysAcceptFirst));
    const auto r = run(s, 1);
    CHECK(r.pending_count == 1);
    CHECK(r.tasks_completed == 1);
  }

  TEST_CASE("malformed scenarios are rejected before running") {
    Scenario s;
    s.tasks.push_back(three("t1", P::AcceptWithProbability));
    s.tasks[0].policy.probability = 1.5;
    CHECK_THROWS_AS(run(s, 1), Error);
    s.tasks[0].policy.probability = 0.5;
    CHECK_THROWS_AS(run(s, 1, Duration{0}), Error);
    s.tasks.push_back(s.tasks[0]);  // duplicate id
    CHECK_THROWS_AS(run(s, 1), Error);
  }

  TEST_CASE("scenario files") {
    const auto s = parse_scenario(Json::parse(R"({
      "name": "demo",
      "config": {"count_table": {"max_count": 4}},
      "tasks": [
        {"wha": "pay rent", "rem": "2024-05-01T09:00:00Z", "whe": "2024-05-01T10:00:00Z",
         "profile": {"imp": "High"}, "policy": {"kind": "AcceptWithProbability", "p": 0.25}},
        {"id": "shop", "wha": "buy milk", "kind": "EventBased", "per": "Ann",
         "policy": {"kind": "PostponeOnceThenAccept", "delay_s": 120}}
      ],
      "events": [{"kind": "CallingPerson", "name": "ann", "at": "2024-05-01T09:30:00Z"}]
    })"));
    CHECK(s.name == "demo");
    CHECK(s.config.counts.max_count == 4);
    REQUIRE(s.tasks.size() == 2);
    CHECK(s.tasks[0].task.id == "t1");
    CHECK(s.tasks[0].policy.probability == 0.25);
    CHECK(s.tasks[1].task.id == "shop");
    CHECK(s.tasks[1].policy.delay == Duration{120});
    REQUIRE(s.events.size() == 1);
    const auto r = run(s, 9);
    CHECK(r.tasks_total == 2);

    CHECK_THROWS_AS(parse_scenario(Json::parse(R"({"tasks": [{"wha": "x", "policy": {"kind": "Sometimes"}}]})")),
                    Error);
  }

  TEST_CASE("csv report") {
    std::ostringstream out;
    write_csv(out, compare(mixed(3), {{"plain", Config{}}, {"a,b", Config{}}}, 1));
    const auto text = out.str();
    CHECK(text.rfind("config,tasks_total,tasks_completed,reminders_fired,", 0) == 0);
    CHECK(text.find("\n\"a,b\",3,") != std::string::npos);
  }
}
