#include <doctest.h>

#include <fstream>
#include <thread>

#include "promind/codec.hpp"
#include "promind/error.hpp"
#include "promind/store.hpp"
#include "support.hpp"

using namespace promind;
using namespace promind::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_SUITE("store") {
  TEST_CASE("entry encoding round trips") {
    const JournalEntry e{7, utc(13, 0), EntryKind::ReminderFired, Json{{"task_id", "t1"}, {"index", 0}}};
    const auto line = encode_entry(e);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.find("\"v\":1") != std::string::npos);
    CHECK(decode_entry(line) == e);
    CHECK_FALSE(decode_entry("{\"v\":2,\"seq\":1}"));
    CHECK_FALSE(decode_entry("not json"));
    CHECK_FALSE(decode_entry(R"({"v":1,"seq":1,"at":"2024-05-01T13:00:00Z","kind":"Bogus","payload":{}})"));
  }

  TEST_CASE("entry kinds have stable names") {
    for (auto k : {EntryKind::TaskCreated, EntryKind::TaskUpdated, EntryKind::PlanBuilt, EntryKind::ReminderFired,
                   EntryKind::ResponseReceived, EntryKind::TriggerLatched, EntryKind::StageChanged,
                   EntryKind::PreferenceUpdated}) {
      CHECK(parse_entry_kind(to_string(k)) == k);
    }
  }

  TEST_CASE("in-memory journal numbers entries from one") {
    Journal j;
    CHECK(j.last_sequence() == 0);
    CHECK(j.append(utc(13, 0), EntryKind::TaskCreated, Json::object()) == 1);
    CHECK(j.append(utc(13, 0), EntryKind::PlanBuilt, Json::object()) == 2);
    CHECK(j.replay().size() == 2);
    CHECK(j.replay(2).size() == 1);
    CHECK(j.replay(3).empty());
    CHECK_FALSE(j.path());
  }

  TEST_CASE("file journal survives a reopen") {
    TempDir dir;
    const auto path = dir.path() / "journal.ndjson";
    {
      Journal j(path);
      for (int i = 0; i < 5; ++i) j.append(utc(13, i), EntryKind::StageChanged, Json{{"i", i}});
    }
    Journal j(path);
    CHECK(j.last_sequence() == 5);
    CHECK(j.recovery().entries_loaded == 5);
    CHECK_FALSE(j.recovery().truncated());
    CHECK(j.replay(3).front().payload.at("i") == 2);
    CHECK(j.append(utc(14, 0), EntryKind::StageChanged, Json::object()) == 6);
  }

  TEST_CASE("an incomplete last line is cut off") {
    TempDir dir;
    const auto path = dir.path() / "journal.ndjson";
    {
      Journal j(path);
      j.append(utc(13, 0), EntryKind::TaskCreated, Json{{"a", 1}});
      j.append(utc(13, 1), EntryKind::PlanBuilt, Json{{"b", 2}});
    }
    const std::string clean = slurp(path);
    spill(path, clean + R"({"v":1,"seq":3,"at":"2024-05-01T13:02:00Z","ki)");
    Journal j(path);
    CHECK(j.last_sequence() == 2);
    CHECK(j.recovery().truncated());
    CHECK(j.recovery().message == "incomplete trailing entry");
    CHECK(slurp(path) == clean);
    CHECK(j.append(utc(13, 3), EntryKind::StageChanged, Json::object()) == 3);
  }

  TEST_CASE("garbage and sequence gaps end the valid prefix") {
    TempDir dir;
    const auto path = dir.path() / "journal.ndjson";
    const auto line = [](std::uint64_t seq) {
      return encode_entry({seq, utc(13, 0), EntryKind::StageChanged, Json::object()}) + "\n";
    };
    spill(path, line(1) + line(2) + "%%%\n" + line(3));
    {
      Journal j(path);
      CHECK(j.last_sequence() == 2);
      CHECK(j.recovery().message.find("unreadable") != std::string::npos);
    }
    spill(path, line(1) + line(3));
    Journal j(path);
    CHECK(j.last_sequence() == 1);
    CHECK(j.recovery().message.find("sequence gap") != std::string::npos);
    CHECK(slurp(path) == line(1));
  }

  TEST_CASE("snapshots are written whole") {
    TempDir dir;
    const auto path = dir.path() / "snapshot.json";
    CHECK_FALSE(read_snapshot(path));
    const Snapshot s{42, Json{{"tasks", Json::array()}, {"next_id", 3}}};
    write_snapshot(path, s);
    CHECK(read_snapshot(path) == s);
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));

    spill(path, "{\"v\":1,\"last_seq");
    std::string problem;
    CHECK_FALSE(read_snapshot(path, &problem));
    CHECK_FALSE(problem.empty());
  }

  TEST_CASE("waiters wake on append") {
    Journal j;
    std::thread writer([&] {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      j.append(utc(13, 0), EntryKind::TaskCreated, Json::object());
    });
    CHECK(j.wait_beyond(0, std::chrono::seconds(5)));
    writer.join();
    CHECK_FALSE(j.wait_beyond(1, std::chrono::milliseconds(10)));
  }

  TEST_CASE("data directory layout") {
    const DataDir d{"/var/lib/promind"};
    CHECK(d.journal() == "/var/lib/promind/journal.ndjson");
    CHECK(d.snapshot() == "/var/lib/promind/snapshot.json");
    CHECK(d.config() == "/var/lib/promind/config.json");
  }

  TEST_CASE("opening an unwritable path is a storage error") {
    try {
      Journal j("/proc/promind-no-such-dir/journal.ndjson");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Storage);
    }
  }
}
