#include "promind/service.hpp"

#include <httplib.h>

#include <cstdlib>
#include <iostream>

#include "promind/codec.hpp"
#include "promind/error.hpp"

namespace promind {

namespace {

constexpr std::chrono::milliseconds kStreamPoll{200};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return 422;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::StaleResponse:
    case ErrorCode::TerminalStage:
    case ErrorCode::Rejected: return 409;
    case ErrorCode::Storage: return 503;
    case ErrorCode::Corrupt: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& field, const std::string& message) {
  send_json(res, status, {{"errors", Json::array({{{"field", field}, {"message", message}}})}});
}

void send_error(httplib::Response& res, const Error& e) {
  Json errors = Json::array();
  for (const auto& f : e.fields()) errors.push_back({{"field", f.field}, {"message", f.message}});
  if (errors.empty()) errors.push_back({{"field", ""}, {"message", e.what()}});
  send_json(res, status_for(e.code()), {{"errors", errors}});
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "malformed JSON", {{"body", e.what()}});
  }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const Json::exception& e) {
      send_error(res, 422, "body", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "", e.what());
    }
  };
}

Json actions_json(const std::vector<AgentAction>& actions) {
  Json out = Json::array();
  for (const auto& a : actions) out.push_back(a);
  return out;
}

std::string sse_frame(const JournalEntry& e) {
  Json data = e.payload;
  data.erase("state");
  return "id: " + std::to_string(e.sequence) + "\nevent: reminder\ndata: " + data.dump() + "\n\n";
}

}  // namespace

Timestamp system_now() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::pair<std::string, int> parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::InvalidArgument, "address must look like host:port, got '" + address + "'");
  }
  const std::string host = address.substr(0, colon);
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(address.substr(colon + 1), &used);
    if (used != address.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::InvalidArgument, "invalid port in address '" + address + "'");
  }
  return {host, port};
}

ServiceOptions options_from_env() {
  ServiceOptions o;
  const auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  std::tie(o.host, o.port) = parse_address(env("PROMIND_ADDR").value_or("127.0.0.1:7468"));
  o.data_dir = env("PROMIND_DATA_DIR").value_or("./data");
  if (const auto ms = env("PROMIND_TICK_MS")) {
    try {
      o.tick_interval = std::chrono::milliseconds{std::stoll(*ms)};
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "PROMIND_TICK_MS must be an integer, got '" + *ms + "'");
    }
    if (o.tick_interval.count() < 0) throw Error(ErrorCode::InvalidArgument, "PROMIND_TICK_MS must be >= 0");
  }
  if (const auto path = env("PROMIND_CONFIG")) {
    o.config = load_config(*path);
  } else if (const DataDir dir{*o.data_dir}; std::filesystem::exists(dir.config())) {
    o.config = load_config(dir.config());
  }
  return o;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (auto problems = validate_config(options_.config); !problems.empty()) {
    throw Error(ErrorCode::InvalidArgument, "invalid configuration: " + problems.front());
  }
  std::optional<Snapshot> snapshot;
  if (options_.data_dir) {
    const DataDir dir{*options_.data_dir};
    journal_ = std::make_unique<Journal>(dir.journal());
    if (!journal_->recovery().message.empty()) {
      notes_ += "journal: " + journal_->recovery().message + " (" +
                std::to_string(journal_->recovery().bytes_truncated) + " bytes truncated)\n";
    }
    std::string problem;
    snapshot = read_snapshot(dir.snapshot(), &problem);
    if (!problem.empty()) notes_ += problem + "; replaying the full journal\n";
  } else {
    journal_ = std::make_unique<Journal>();
  }
  engine_ = std::make_unique<Engine>(options_.config, *journal_);
  if (auto note = engine_->recover(snapshot); !note.empty()) notes_ += note + "\n";
  snapshot_sequence_ = snapshot ? snapshot->last_sequence : 0;

  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

Service::~Service() {
  try {
    stop();
  } catch (const std::exception& e) {
    std::cerr << "promind: shutdown: " << e.what() << '\n';
  }
}

EngineState Service::state() const {
  std::lock_guard lock(engine_mutex_);
  return engine_->state();
}

void Service::maybe_snapshot(bool force) {
  if (!options_.data_dir) return;
  const auto seq = journal_->last_sequence();
  if (seq == snapshot_sequence_) return;
  if (!force && seq - snapshot_sequence_ < options_.snapshot_every) return;
  write_snapshot(DataDir{*options_.data_dir}.snapshot(), engine_->snapshot());
  snapshot_sequence_ = seq;
}

void Service::tick_once() {
  std::lock_guard lock(engine_mutex_);
  engine_->tick(options_.clock());
  maybe_snapshot(false);
}

void Service::install_routes() {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    res.status = 204;
  });

  // Runs a mutating command under the engine lock and snapshots on schedule.
  const auto command = [this](auto&& fn) {
    std::lock_guard lock(engine_mutex_);
    auto result = fn(*engine_, options_.clock());
    maybe_snapshot(false);
    return result;
  };

  s.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"}, {"version", kServiceVersion}, {"sequence", journal_->last_sequence()}});
  }));

  s.Post("/tasks", guarded([command](const httplib::Request& req, httplib::Response& res) {
    const ProMTask descriptor = task_from_descriptor(parse_body(req));
    const TaskView view = command([&](Engine& e, Timestamp now) { return e.create_task(descriptor, now); });
    send_json(res, 201, to_api_json(view));
  }));

  s.Get("/tasks", guarded([this](const httplib::Request&, httplib::Response& res) {
    Json out = Json::array();
    std::lock_guard lock(engine_mutex_);
    for (const auto& view : engine_->list()) out.push_back(to_api_json(view));
    send_json(res, 200, out);
  }));

  s.Get("/tasks/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(engine_mutex_);
    const auto view = engine_->find(req.path_params.at("id"));
    if (!view) throw Error(ErrorCode::NotFound, "unknown task " + req.path_params.at("id"));
    send_json(res, 200, to_api_json(*view));
  }));

  s.Patch("/tasks/:id", guarded([command](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const Json body = parse_body(req);
    const TaskView view = command([&](Engine& e, Timestamp now) {
      const auto current = e.find(id);
      if (!current) throw Error(ErrorCode::NotFound, "unknown task " + id);
      return e.update_task(id, edits_from_json(body, current->task), now);
    });
    send_json(res, 200, to_api_json(view));
  }));

  s.Delete("/tasks/:id", guarded([command](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const TaskView view = command([&](Engine& e, Timestamp now) { return e.cancel_task(id, now); });
    send_json(res, 200, to_api_json(view));
  }));

  s.Post("/tasks/:id/response", guarded([command](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.path_params.at("id");
    const Json body = parse_body(req);
    const TaskView view = command([&](Engine& e, Timestamp now) {
      return e.respond(id, response_from_json(body, now));
    });
    send_json(res, 200, to_api_json(view));
  }));

  s.Post("/context/location", guarded([command](const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    GeoPoint point;
    std::vector<FieldError> errors;
    for (const auto& [key, out] : {std::pair{"lat", &point.latitude}, std::pair{"lon", &point.longitude}}) {
      const auto it = body.find(key);
      if (it == body.end() || !it->is_number()) {
        errors.push_back({key, "required number"});
      } else {
        *out = it->get<double>();
      }
    }
    if (errors.empty() && (point.latitude < -90.0 || point.latitude > 90.0)) {
      errors.push_back({"lat", "latitude must lie in [-90, 90]"});
    }
    if (errors.empty() && (point.longitude < -180.0 || point.longitude > 180.0)) {
      errors.push_back({"lon", "longitude must lie in [-180, 180]"});
    }
    if (!errors.empty()) throw Error(ErrorCode::InvalidArgument, "invalid location", std::move(errors));
    if (const auto mode = body.find("mode"); mode != body.end()) {
      const auto parsed = mode->is_string() ? parse_travel_mode(mode->get<std::string>()) : std::nullopt;
      if (!parsed) throw Error(ErrorCode::InvalidArgument, "invalid mode", {{"mode", "expected walk or car"}});
      command([&](Engine& e, Timestamp) {
        e.set_travel_mode(*parsed);
        return 0;
      });
    }
    const auto actions = command([&](Engine& e, Timestamp now) { return e.update_location(point, now); });
    send_json(res, 202, {{"actions", actions_json(actions)}});
  }));

  s.Post("/context/call", guarded([command](const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    const auto it = body.find("name");
    if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
      throw Error(ErrorCode::InvalidArgument, "invalid call", {{"name", "required non-empty string"}});
    }
    const auto actions = command([&](Engine& e, Timestamp now) {
      TriggerEvent event;
      event.kind = TriggerEvent::Kind::CallingPerson;
      event.name = it->get<std::string>();
      event.at = now;
      return e.signal(event);
    });
    send_json(res, 202, {{"actions", actions_json(actions)}});
  }));

  s.Get("/preferences", guarded([this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(engine_mutex_);
    res.status = 200;
    res.set_content(export_preferences(engine_->state().preferences), "application/json");
  }));

  s.Get("/journal", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t from = 1;
    if (req.has_param("from")) {
      try {
        from = std::stoull(req.get_param_value("from"));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "invalid from", {{"from", "expected a sequence number"}});
      }
    }
    std::string out;
    for (const auto& e : journal_->replay(from)) out += encode_entry(e) + "\n";
    res.status = 200;
    res.set_content(out, "application/x-ndjson");
  }));

  s.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t cursor = journal_->last_sequence();
    const std::string resume =
        req.has_header("Last-Event-ID") ? req.get_header_value("Last-Event-ID") : req.get_param_value("last_event_id");
    if (!resume.empty()) {
      try {
        cursor = std::stoull(resume);
      } catch (const std::exception&) {
        send_error(res, 422, "Last-Event-ID", "expected a journal sequence number");
        return;
      }
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    auto last_beat = std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::now());
    auto position = std::make_shared<std::uint64_t>(cursor);
    res.set_chunked_content_provider(
        "text/event-stream", [this, position, last_beat](std::size_t, httplib::DataSink& sink) {
          {
            std::lock_guard lock(ticker_mutex_);
            if (stopping_) {
              sink.done();
              return false;
            }
          }
          if (journal_->wait_beyond(*position, kStreamPoll)) {
            std::string frames;
            for (const auto& e : journal_->replay(*position + 1)) {
              if (e.kind == EntryKind::ReminderFired) frames += sse_frame(e);
              *position = e.sequence;
            }
            if (!frames.empty()) {
              *last_beat = std::chrono::steady_clock::now();
              return sink.write(frames.data(), frames.size());
            }
          }
          if (std::chrono::steady_clock::now() - *last_beat >= options_.heartbeat) {
            *last_beat = std::chrono::steady_clock::now();
            static constexpr std::string_view beat = ": heartbeat\n\n";
            return sink.write(beat.data(), beat.size());
          }
          return sink.is_writable();
        });
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty() && res.status == 404) send_error(res, 404, "path", "no such endpoint");
  });
}

int Service::bind() {
  if (bound_) return port_;
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::Storage,
                "cannot listen on " + options_.host + ":" + std::to_string(options_.port));
  }
  bound_ = true;
  return port_;
}

void Service::ticker_loop() {
  std::unique_lock lock(ticker_mutex_);
  while (!stopping_) {
    ticker_cv_.wait_for(lock, options_.tick_interval, [this] { return stopping_; });
    if (stopping_) break;
    lock.unlock();
    try {
      tick_once();
    } catch (const std::exception& e) {
      std::cerr << "promind: tick failed: " << e.what() << '\n';
    }
    lock.lock();
  }
}

void Service::run() {
  bind();
  if (options_.tick_interval.count() > 0 && !ticker_.joinable()) {
    ticker_ = std::thread([this] { ticker_loop(); });
  }
  server_->listen_after_bind();
}

void Service::start() {
  bind();
  server_thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
}

void Service::stop() {
  {
    std::lock_guard lock(ticker_mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  ticker_cv_.notify_all();
  journal_->notify_all();
  server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  if (ticker_.joinable()) ticker_.join();
  std::lock_guard lock(engine_mutex_);
  maybe_snapshot(true);
}

}  // namespace promind
