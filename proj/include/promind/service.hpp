#pragma once

// HTTP daemon around the engine. JSON bodies, RFC 3339 timestamps, and a
// Server-Sent Events stream of fired reminders on GET /events.

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "promind/config.hpp"
#include "promind/engine.hpp"
#include "promind/store.hpp"
#include "promind/time.hpp"

namespace httplib {
class Server;
}

namespace promind {

inline constexpr std::string_view kServiceVersion = "0.1.0";

using Clock = std::function<Timestamp()>;

/// Wall clock truncated to whole seconds.
Timestamp system_now();

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 7468;  // 0 picks an ephemeral port
  std::optional<std::filesystem::path> data_dir;  // nullopt keeps the journal in memory
  std::chrono::milliseconds tick_interval{1000};  // 0 disables the ticker
  std::chrono::milliseconds heartbeat{15000};
  std::size_t snapshot_every = 256;  // journal entries between snapshots
  Config config;
  Clock clock = system_now;
};

/// Splits "host:port". Throws Error(InvalidArgument).
std::pair<std::string, int> parse_address(const std::string& address);

/// PROMIND_ADDR, PROMIND_DATA_DIR, PROMIND_TICK_MS and PROMIND_CONFIG, with
/// the config falling back to <data dir>/config.json, then to the defaults.
ServiceOptions options_from_env();

class Service {
 public:
  /// Opens the data directory and recovers state from snapshot + journal.
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket and returns the port.
  int bind();
  /// Serves until stop(). Binds first if bind() was not called.
  void run();
  /// run() on a background thread; returns once the server accepts requests.
  void start();
  /// Stops the ticker and the server and writes a final snapshot.
  void stop();

  int port() const noexcept { return port_; }
  /// Problems found and repaired while opening the data directory.
  const std::string& startup_notes() const noexcept { return notes_; }

  /// One ticker pass at the injected clock's current time.
  void tick_once();

  const Journal& journal() const noexcept { return *journal_; }
  EngineState state() const;

 private:
  void install_routes();
  void ticker_loop();
  void maybe_snapshot(bool force);

  ServiceOptions options_;
  std::unique_ptr<Journal> journal_;
  std::unique_ptr<Engine> engine_;
  std::unique_ptr<httplib::Server> server_;
  mutable std::mutex engine_mutex_;
  std::uint64_t snapshot_sequence_ = 0;
  std::string notes_;
  int port_ = 0;
  bool bound_ = false;

  std::mutex ticker_mutex_;
  std::condition_variable ticker_cv_;
  bool stopping_ = false;
  std::thread ticker_;
  std::thread server_thread_;
};

}  // namespace promind
