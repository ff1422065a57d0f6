#pragma once

// Durable persistence: an append-only journal of engine events (one JSON
// record per line) plus compacted state snapshots.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "promind/time.hpp"

namespace promind {

inline constexpr int kJournalFormatVersion = 1;

enum class EntryKind {
  TaskCreated,
  TaskUpdated,
  PlanBuilt,
  ReminderFired,
  ResponseReceived,
  TriggerLatched,
  StageChanged,
  PreferenceUpdated,
};

std::string_view to_string(EntryKind k);
std::optional<EntryKind> parse_entry_kind(std::string_view s);

struct JournalEntry {
  std::uint64_t sequence = 0;
  Timestamp at;
  EntryKind kind = EntryKind::TaskCreated;
  nlohmann::json payload;

  bool operator==(const JournalEntry&) const = default;
};

/// One line, without the trailing newline.
std::string encode_entry(const JournalEntry& entry);
std::optional<JournalEntry> decode_entry(std::string_view line);

struct RecoveryReport {
  std::size_t entries_loaded = 0;
  std::uintmax_t bytes_truncated = 0;
  std::string message;  // empty when the file was clean

  bool truncated() const noexcept { return bytes_truncated > 0; }
};

/// Sequence numbers start at 1 and increase by one per append. With a file
/// backing, an append is flushed and fsync'ed before it returns.
///
/// Thread-safe: one writer, any number of readers.
class Journal {
 public:
  /// Purely in memory.
  Journal();
  /// Loads `path` if it exists, truncating a corrupt tail at the last valid entry.
  explicit Journal(const std::filesystem::path& path);
  ~Journal();

  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  /// Throws Error(Storage) on I/O failure; nothing is recorded in that case.
  std::uint64_t append(Timestamp at, EntryKind kind, nlohmann::json payload);

  /// Entries with sequence >= from_sequence, in order.
  std::vector<JournalEntry> replay(std::uint64_t from_sequence = 1) const;

  std::uint64_t last_sequence() const;
  const RecoveryReport& recovery() const noexcept { return recovery_; }
  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

  /// Blocks until an entry beyond `sequence` exists or the timeout passes.
  bool wait_beyond(std::uint64_t sequence, std::chrono::milliseconds timeout) const;

  /// Wakes every waiter, e.g. at shutdown.
  void notify_all() const;

 private:
  struct FileCloser {
    void operator()(std::FILE* f) const noexcept;
  };

  std::optional<std::filesystem::path> path_;
  std::unique_ptr<std::FILE, FileCloser> file_;
  std::vector<JournalEntry> entries_;
  RecoveryReport recovery_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
};

struct Snapshot {
  std::uint64_t last_sequence = 0;  // journal entries up to here are folded in
  nlohmann::json state;

  bool operator==(const Snapshot&) const = default;
};

/// Written to a temporary file, fsync'ed, then renamed over `path`.
void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);

/// nullopt when the file is missing or unreadable; callers fall back to a
/// full journal replay. `problem` receives a description of unreadable files.
std::optional<Snapshot> read_snapshot(const std::filesystem::path& path,
                                      std::string* problem = nullptr);

/// Layout of a daemon data directory.
struct DataDir {
  std::filesystem::path root;

  std::filesystem::path journal() const { return root / "journal.ndjson"; }
  std::filesystem::path snapshot() const { return root / "snapshot.json"; }
  std::filesystem::path config() const { return root / "config.json"; }
};

}  // namespace promind
