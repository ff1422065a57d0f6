#include "promind/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "promind/codec.hpp"
#include "promind/error.hpp"

namespace promind {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 8> kEntryKindNames{
    "TaskCreated",    "TaskUpdated",      "PlanBuilt",    "ReminderFired",
    "ResponseReceived", "TriggerLatched", "StageChanged", "PreferenceUpdated",
};

[[noreturn]] void storage_failure(const std::string& what) {
  throw Error(ErrorCode::Storage, what + ": " + std::strerror(errno));
}

void fsync_directory(const fs::path& dir) {
  const int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

}  // namespace

std::string_view to_string(EntryKind k) { return kEntryKindNames[static_cast<std::size_t>(k)]; }

std::optional<EntryKind> parse_entry_kind(std::string_view s) {
  for (std::size_t i = 0; i < kEntryKindNames.size(); ++i) {
    if (kEntryKindNames[i] == s) return static_cast<EntryKind>(i);
  }
  return std::nullopt;
}

std::string encode_entry(const JournalEntry& e) {
  const Json j{{"v", kJournalFormatVersion},
               {"seq", e.sequence},
               {"at", e.at},
               {"kind", to_string(e.kind)},
               {"payload", e.payload}};
  return j.dump();
}

std::optional<JournalEntry> decode_entry(std::string_view line) {
  try {
    const auto j = Json::parse(line);
    if (!j.is_object() || j.value("v", 0) != kJournalFormatVersion) return std::nullopt;
    const auto kind = parse_entry_kind(j.at("kind").get<std::string>());
    if (!kind) return std::nullopt;
    JournalEntry e;
    e.sequence = j.at("seq").get<std::uint64_t>();
    e.at = j.at("at").get<Timestamp>();
    e.kind = *kind;
    e.payload = j.at("payload");
    return e;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void Journal::FileCloser::operator()(std::FILE* f) const noexcept {
  if (f) std::fclose(f);
}

Journal::Journal() = default;

Journal::Journal(const fs::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Storage, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }

  std::uintmax_t valid_bytes = 0;
  if (fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < contents.size()) {
      const auto nl = contents.find('\n', pos);
      if (nl == std::string::npos) {
        recovery_.message = "incomplete trailing entry";
        break;
      }
      auto entry = decode_entry(std::string_view(contents).substr(pos, nl - pos));
      const std::uint64_t expected = entries_.empty() ? 1 : entries_.back().sequence + 1;
      if (!entry) {
        recovery_.message = "unreadable entry after sequence " + std::to_string(expected - 1);
        break;
      }
      if (entry->sequence != expected) {
        recovery_.message = "sequence gap: expected " + std::to_string(expected) + ", found " +
                            std::to_string(entry->sequence);
        break;
      }
      entries_.push_back(std::move(*entry));
      pos = nl + 1;
      valid_bytes = pos;
    }
    if (valid_bytes < contents.size()) {
      recovery_.bytes_truncated = contents.size() - valid_bytes;
      fs::resize_file(path, valid_bytes);
    }
  }
  recovery_.entries_loaded = entries_.size();

  file_.reset(std::fopen(path.c_str(), "ab"));
  if (!file_) storage_failure("cannot open journal " + path.string());
}

Journal::~Journal() = default;

std::uint64_t Journal::append(Timestamp at, EntryKind kind, nlohmann::json payload) {
  std::unique_lock lock(mutex_);
  JournalEntry entry{entries_.empty() ? 1 : entries_.back().sequence + 1, at, kind,
                     std::move(payload)};
  if (file_) {
    const std::string line = encode_entry(entry) + "\n";
    std::FILE* f = file_.get();
    const long before = std::ftell(f);
    const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() &&
                    std::fflush(f) == 0 && ::fsync(::fileno(f)) == 0;
    if (!ok) {
      const int saved = errno;
      if (before >= 0) {
        std::clearerr(f);
        [[maybe_unused]] const int rc = ::ftruncate(::fileno(f), before);
      }
      errno = saved;
      storage_failure("journal append failed");
    }
  }
  entries_.push_back(std::move(entry));
  const auto seq = entries_.back().sequence;
  lock.unlock();
  changed_.notify_all();
  return seq;
}

std::vector<JournalEntry> Journal::replay(std::uint64_t from) const {
  std::lock_guard lock(mutex_);
  if (from < 1) from = 1;
  if (from > entries_.size()) return {};
  return {entries_.begin() + static_cast<std::ptrdiff_t>(from - 1), entries_.end()};
}

std::uint64_t Journal::last_sequence() const {
  std::lock_guard lock(mutex_);
  return entries_.empty() ? 0 : entries_.back().sequence;
}

bool Journal::wait_beyond(std::uint64_t sequence, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return changed_.wait_for(lock, timeout, [&] {
    return !entries_.empty() && entries_.back().sequence > sequence;
  });
}

void Journal::notify_all() const { changed_.notify_all(); }

void write_snapshot(const fs::path& path, const Snapshot& snapshot) {
  const Json j{{"v", kJournalFormatVersion},
               {"last_sequence", snapshot.last_sequence},
               {"state", snapshot.state}};
  const std::string text = j.dump(2) + "\n";
  const fs::path tmp = path.string() + ".tmp";

  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) storage_failure("cannot write snapshot " + tmp.string());
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size() &&
                  std::fflush(f) == 0 && ::fsync(::fileno(f)) == 0;
  std::fclose(f);
  if (!ok) storage_failure("snapshot write failed");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Storage, "snapshot rename failed: " + ec.message());
  fsync_directory(path.parent_path());
}

std::optional<Snapshot> read_snapshot(const fs::path& path, std::string* problem) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    const auto j = Json::parse(buf.str());
    if (j.value("v", 0) != kJournalFormatVersion) throw std::runtime_error("unsupported snapshot version");
    return Snapshot{j.at("last_sequence").get<std::uint64_t>(), j.at("state")};
  } catch (const std::exception& e) {
    if (problem) *problem = std::string("unreadable snapshot: ") + e.what();
    return std::nullopt;
  }
}

}  // namespace promind
