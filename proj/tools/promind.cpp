// promind: command-line front end for the reminder daemon, the planner and
// the simulator.
//
// Exit codes: 0 ok, 2 usage, 3 API error, 4 simulation failure.

#include <httplib.h>
#include <signal.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "promind/codec.hpp"
#include "promind/engine.hpp"
#include "promind/error.hpp"
#include "promind/service.hpp"
#include "promind/simulator.hpp"

using namespace promind;

namespace {

constexpr int kUsage = 2;
constexpr int kApiError = 3;
constexpr int kSimFailure = 4;

struct Exit {
  int code;
  std::string message;
};

struct TaskFlags {
  std::string wha;
  std::string whe;
  std::string rem;
  std::string date;
  bool event = false;
  std::string loc;
  std::string loc_label;
  std::string per;
  std::string com = "M", imp = "M", mot = "M", age = "y", typ = "per";
  std::string note;
};

void add_task_flags(CLI::App* cmd, TaskFlags& f) {
  cmd->add_option("--wha", f.wha, "What to do")->required();
  cmd->add_option("--whe", f.whe, "Execution time, HH:MM or RFC 3339");
  cmd->add_option("--rem", f.rem, "First reminder time, HH:MM or RFC 3339");
  cmd->add_option("--date", f.date, "Day for HH:MM times, YYYY-MM-DD (default: today, UTC)");
  cmd->add_flag("--event", f.event, "Event-based task, triggered by --loc or --per");
  cmd->add_option("--loc", f.loc, "Task location as lat,lon");
  cmd->add_option("--loc-label", f.loc_label, "Name of the task location");
  cmd->add_option("--per", f.per, "Person the task involves");
  cmd->add_option("--com", f.com, "Ongoing task complexity L|M|H")->capture_default_str();
  cmd->add_option("--imp", f.imp, "Importance L|M|H")->capture_default_str();
  cmd->add_option("--mot", f.mot, "Motivation L|M|H")->capture_default_str();
  cmd->add_option("--age", f.age, "Age group y|o")->capture_default_str();
  cmd->add_option("--typ", f.typ, "Category per|fin|soc|wor")->capture_default_str();
  cmd->add_option("--note", f.note, "Free-form guidance kept with the task");
}

Timestamp resolve_day(const std::string& date) {
  if (date.empty()) return std::chrono::floor<std::chrono::days>(system_now());
  const auto t = parse_rfc3339(date + "T00:00:00Z");
  if (!t) throw Exit{kUsage, "--date must look like YYYY-MM-DD, got '" + date + "'"};
  return *t;
}

std::optional<Timestamp> resolve_time(const std::string& text, const std::string& flag, Timestamp day) {
  if (text.empty()) return std::nullopt;
  auto t = text.find('T') != std::string::npos ? parse_rfc3339(text) : parse_time_of_day(text, day);
  if (!t) throw Exit{kUsage, flag + " must be HH:MM or an RFC 3339 timestamp, got '" + text + "'"};
  return t;
}

template <typename T>
T parse_flag(const std::string& text, const std::string& flag,
             std::optional<T> (*parse)(std::string_view)) {
  const auto v = parse(text);
  if (!v) throw Exit{kUsage, "invalid value '" + text + "' for " + flag};
  return *v;
}

ProMTask task_from_flags(const TaskFlags& f) {
  const Timestamp day = resolve_day(f.date);
  ProMTask t;
  t.wha = f.wha;
  t.whe = resolve_time(f.whe, "--whe", day);
  t.rem = resolve_time(f.rem, "--rem", day);
  if (!f.per.empty()) t.per = f.per;
  if (!f.loc.empty()) t.loc = Place{parse_flag<GeoPoint>(f.loc, "--loc", parse_geo_point), f.loc_label};
  t.kind = f.event ? TaskKind::EventBased : TaskKind::TimeBased;
  t.profile.com = parse_flag<FactorLevel>(f.com, "--com", parse_factor_level);
  t.profile.imp = parse_flag<FactorLevel>(f.imp, "--imp", parse_factor_level);
  t.profile.mot = parse_flag<FactorLevel>(f.mot, "--mot", parse_factor_level);
  t.profile.age = parse_flag<AgeGroup>(f.age, "--age", parse_age_group);
  t.profile.typ = parse_flag<TaskCategory>(f.typ, "--typ", parse_task_category);
  t.note = f.note;
  return t;
}

Config load_config_flag(const std::string& path) {
  if (path.empty()) {
    if (const char* env = std::getenv("PROMIND_CONFIG"); env && *env) return load_config(env);
    return Config{};
  }
  return load_config(path);
}

// ---- daemon client ---------------------------------------------------------

std::string default_address() {
  const char* env = std::getenv("PROMIND_ADDR");
  return env && *env ? env : "127.0.0.1:7468";
}

class ApiClient {
 public:
  explicit ApiClient(const std::string& address) {
    const auto [host, port] = parse_address(address);
    client_ = std::make_unique<httplib::Client>(host, port);
    client_->set_connection_timeout(std::chrono::seconds{5});
    label_ = address;
  }

  Json call(const std::string& method, const std::string& path, const Json* body = nullptr) {
    httplib::Result r;
    const std::string text = body ? body->dump() : std::string{};
    if (method == "GET") r = client_->Get(path);
    else if (method == "POST") r = client_->Post(path, text, "application/json");
    else if (method == "PATCH") r = client_->Patch(path, text, "application/json");
    else r = client_->Delete(path);
    if (!r) throw Exit{kApiError, "cannot reach daemon at " + label_ + ": " + httplib::to_string(r.error())};
    Json parsed = Json::parse(r->body, nullptr, false);
    if (r->status >= 300) {
      std::string message = "daemon answered " + std::to_string(r->status);
      if (parsed.is_object() && parsed.contains("errors")) {
        for (const auto& e : parsed["errors"]) {
          const auto field = e.value("field", std::string{});
          message += "\n  " + (field.empty() ? "" : field + ": ") + e.value("message", std::string{});
        }
      }
      throw Exit{kApiError, message};
    }
    if (parsed.is_discarded()) throw Exit{kApiError, "daemon sent malformed JSON"};
    return parsed;
  }

  std::string raw_get(const std::string& path) {
    auto r = client_->Get(path);
    if (!r) throw Exit{kApiError, "cannot reach daemon at " + label_ + ": " + httplib::to_string(r.error())};
    if (r->status != 200) throw Exit{kApiError, "daemon answered " + std::to_string(r->status)};
    return r->body;
  }

 private:
  std::unique_ptr<httplib::Client> client_;
  std::string label_;
};

// ---- output -----------------------------------------------------------------

std::string modality_text(const ReminderModality& m) {
  std::string s = std::string(to_string(m.channel)) + " / " + std::string(to_string(m.duration));
  if (m.channel == Channel::Audio) s += " / " + std::string(to_string(m.sound));
  return s;
}

// HH:MM when every time falls on one UTC day, RFC 3339 otherwise.
std::string times_text(const std::vector<Timestamp>& times) {
  if (times.empty()) return "-";
  const auto day = std::chrono::floor<std::chrono::days>(times.front());
  const bool same_day = std::all_of(times.begin(), times.end(), [&](Timestamp t) {
    return std::chrono::floor<std::chrono::days>(t) == day;
  });
  std::string out;
  for (const auto t : times) {
    if (!out.empty()) out += ", ";
    out += same_day ? format_time_of_day(t) : format_rfc3339(t);
  }
  return out;
}

std::string offsets_text(const std::vector<Duration>& offsets) {
  std::string out;
  for (const auto d : offsets) {
    if (!out.empty()) out += ", ";
    out += "+" + std::to_string(d.count() / 60) + "m";
    if (d.count() % 60) out += std::to_string(d.count() % 60) + "s";
  }
  return out;
}

void print_plan(const ReminderPlan& plan) {
  std::cout << "count     " << plan.count << '\n';
  if (plan.relative()) {
    std::cout << "schedule  " << offsets_text(plan.offsets) << " after the trigger\n";
  } else {
    std::cout << "schedule  " << times_text(plan.schedule) << '\n';
  }
  std::cout << "modality  " << modality_text(plan.modality) << '\n';
  for (const auto& w : plan.warnings) std::cout << "warning   " << w << '\n';
}

Json explain_json(const ProMTask& task, const Config& config) {
  static constexpr const char* kCountNames[] = {"com", "imp", "mot", "age"};
  static constexpr const char* kModalityNames[] = {"com", "imp", "mot", "age", "typ"};
  const auto t = count_contribution(task.profile, config.counts);
  const auto h = modality_contribution(task.profile, config.modality);
  Json count = Json::array();
  for (std::size_t i = 0; i < t.size(); ++i) {
    count.push_back({{"factor", kCountNames[i]}, {"t", t[i]}, {"weight", config.weights.count[i]}});
  }
  Json modality = Json::array();
  for (std::size_t i = 0; i < h.size(); ++i) {
    modality.push_back({{"factor", kModalityNames[i]}, {"h", h[i]}, {"weight", config.weights.modality[i]}});
  }
  return {{"count", count}, {"modality", modality}};
}

void print_explain(const ProMTask& task, const Config& config, const ReminderPlan& plan) {
  const Json e = explain_json(task, config);
  const std::string levels[] = {std::string(to_string(task.profile.com)), std::string(to_string(task.profile.imp)),
                                std::string(to_string(task.profile.mot)), std::string(to_string(task.profile.age)),
                                std::string(to_string(task.profile.typ))};
  std::cout << "\ncount contributions\n";
  double num = 0, den = 0;
  for (std::size_t i = 0; i < e["count"].size(); ++i) {
    const auto& row = e["count"][i];
    num += row["t"].get<double>() * row["weight"].get<double>();
    den += row["weight"].get<double>();
    std::cout << "  " << row["factor"].get<std::string>() << "  " << std::left << std::setw(9) << levels[i]
              << std::right << "t=" << row["t"].get<int>() << "  w=" << row["weight"].get<double>() << '\n';
  }
  std::cout << "  weighted average " << std::fixed << std::setprecision(3) << num / den
            << std::defaultfloat << std::setprecision(6) << " -> count " << plan.count << " (max "
            << config.counts.max_count << ")\n";
  std::cout << "modality contributions (channel, duration, sound)\n";
  for (std::size_t i = 0; i < e["modality"].size(); ++i) {
    const auto& row = e["modality"][i];
    const auto& h = row["h"];
    std::cout << "  " << row["factor"].get<std::string>() << "  " << std::left << std::setw(9) << levels[i]
              << std::right << std::fixed << std::setprecision(2) << "h=(" << h["channel"].get<double>()
              << ", " << h["duration"].get<double>() << ", " << h["sound"].get<double>() << ")  w="
              << std::defaultfloat << std::setprecision(6) << row["weight"].get<double>() << '\n';
  }
  const auto& s = plan.raw_modality_score;
  std::cout << "  score (" << std::fixed << std::setprecision(3) << s.channel << ", " << s.duration << ", "
            << s.sound << ") -> " << modality_text(plan.modality) << '\n'
            << std::defaultfloat << std::setprecision(6);
}

void print_task_table(const Json& tasks) {
  std::cout << std::left << std::setw(6) << "ID" << std::setw(12) << "STAGE" << std::setw(11) << "KIND"
            << std::setw(7) << "FIRED" << std::setw(22) << "WHE" << "WHA" << '\n';
  for (const auto& t : tasks) {
    std::cout << std::setw(6) << t.value("id", std::string{}) << std::setw(12) << t.value("stage", std::string{})
              << std::setw(11) << t.value("kind", std::string{}) << std::setw(7)
              << (std::to_string(t.value("fired_count", 0)) + "/" + std::to_string(t["plan"].value("count", 0)))
              << std::setw(22) << t.value("whe", std::string{"-"}) << t.value("wha", std::string{}) << '\n';
  }
  std::cout << std::right;
}

void print_task(const Json& t) {
  std::cout << t.value("id", std::string{}) << "  " << t.value("wha", std::string{}) << "  ["
            << t.value("stage", std::string{}) << "]\n";
  print_plan(t.at("plan").get<ReminderPlan>());
}

// ---- subcommands -------------------------------------------------------------

int run_serve(const std::string& addr, const std::string& data_dir, long long tick_ms,
              const std::string& config_path) {
  ServiceOptions options = options_from_env();
  if (!addr.empty()) std::tie(options.host, options.port) = parse_address(addr);
  if (!data_dir.empty()) options.data_dir = data_dir;
  if (tick_ms >= 0) options.tick_interval = std::chrono::milliseconds{tick_ms};
  if (!config_path.empty()) options.config = load_config(config_path);

  // Signals are taken synchronously so shutdown can flush a snapshot.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const std::string host = options.host;
  Service service(std::move(options));
  if (!service.startup_notes().empty()) std::cerr << service.startup_notes();
  const int port = service.bind();
  service.start();
  std::cerr << "promind: listening on " << host << ':' << port << '\n';
  int received = 0;
  sigwait(&signals, &received);
  std::cerr << "promind: shutting down\n";
  service.stop();
  return 0;
}

int run_simulate(const std::string& scenario_path, std::uint64_t seed, const std::string& tick,
                 const std::vector<int>& max_counts, const std::string& csv_path,
                 const std::string& trace_path, const std::string& config_path, bool json) {
  const auto step = parse_duration(tick);
  if (!step || step->count() <= 0) throw Exit{kUsage, "--tick must be a positive duration"};
  Scenario scenario;
  try {
    scenario = load_scenario(scenario_path, load_config_flag(config_path));
  } catch (const Error& e) {
    std::string message = e.fields().size() > 1 ? "invalid scenario" : e.what();
    if (e.fields().size() > 1) {
      for (const auto& f : e.fields()) message += "\n  " + f.field + ": " + f.message;
    }
    throw Exit{kSimFailure, message};
  }

  std::vector<std::pair<std::string, Config>> configs;
  if (max_counts.empty()) {
    configs.emplace_back(scenario.name.empty() ? "default" : scenario.name, scenario.config);
  }
  for (int n : max_counts) {
    if (n < 1) throw Exit{kUsage, "--max-count values must be positive"};
    configs.emplace_back("max_count=" + std::to_string(n), with_max_count(scenario.config, n));
  }

  std::vector<CompareRow> rows;
  try {
    rows = compare(scenario, configs, seed, *step);
  } catch (const Error& e) {
    throw Exit{kSimFailure, std::string("simulation failed: ") + e.what()};
  }

  if (!trace_path.empty()) {
    std::ofstream file;
    if (trace_path != "-") {
      file.open(trace_path);
      if (!file) throw Exit{kSimFailure, "cannot write " + trace_path};
    }
    std::ostream& out = trace_path == "-" ? std::cout : file;
    for (const auto& row : rows) {
      if (rows.size() > 1) out << "# " << row.label << '\n';
      out << format_trace(row.report);
    }
  }
  if (csv_path == "-") {
    write_csv(std::cout, rows);
  } else {
    if (!csv_path.empty()) {
      std::ofstream out(csv_path);
      if (!out) throw Exit{kSimFailure, "cannot write " + csv_path};
      write_csv(out, rows);
    }
    if (json) {
      Json out = Json::array();
      for (const auto& [label, r] : rows) {
        out.push_back({{"config", label},
                       {"tasks_total", r.tasks_total},
                       {"tasks_completed", r.tasks_completed},
                       {"reminders_fired", r.reminders_fired},
                       {"expired_count", r.expired_count},
                       {"cancelled_count", r.cancelled_count},
                       {"pending_count", r.pending_count},
                       {"mean_time_to_accept_s", r.mean_time_to_accept.count()}});
      }
      std::cout << out.dump(2) << '\n';
    } else {
      write_table(std::cout, rows);
    }
  }
  return 0;
}

int run_export(const std::string& data_dir, const std::string& addr, std::uint64_t from) {
  if (data_dir.empty()) {
    std::cout << ApiClient(addr).raw_get("/journal?from=" + std::to_string(from));
    return 0;
  }
  const auto path = DataDir{data_dir}.journal();
  std::ifstream in(path);
  if (!in) throw Exit{kApiError, "cannot open " + path.string()};
  std::string line;
  std::uint64_t expected = 1;
  while (std::getline(in, line)) {
    const auto entry = decode_entry(line);
    if (!entry || entry->sequence != expected) {
      std::cerr << "promind: journal ends with an unreadable entry after sequence " << expected - 1 << '\n';
      break;
    }
    ++expected;
    if (entry->sequence >= from) std::cout << line << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"promind: prospective-memory reminder planner, daemon and simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json = false;
  app.add_flag("--json", json, "Machine-readable output");

  TaskFlags add_flags;
  std::string addr = default_address();
  auto* add = app.add_subcommand("add", "Create a task on the running daemon");
  add_task_flags(add, add_flags);
  add->add_option("--addr", addr, "Daemon address host:port")->capture_default_str();

  auto* list = app.add_subcommand("list", "List the daemon's tasks");
  list->add_option("--addr", addr, "Daemon address host:port")->capture_default_str();

  TaskFlags plan_flags;
  std::string curr_loc, mode = "walk", config_path;
  bool explain = false;
  auto* plan = app.add_subcommand("plan", "Preview a reminder plan locally");
  add_task_flags(plan, plan_flags);
  plan->add_option("--curr-loc", curr_loc, "Current location lat,lon, for travel time");
  plan->add_option("--mode", mode, "Travel mode walk|car")->capture_default_str();
  plan->add_option("--config", config_path, "Factor table file (default: $PROMIND_CONFIG or built in)");
  plan->add_flag("--explain", explain, "Show each factor's contribution and weight");

  std::string task_id, response_kind, delay_text;
  int index = -1;
  auto* respond = app.add_subcommand("respond", "Answer a fired reminder");
  respond->add_option("id", task_id, "Task id")->required();
  respond->add_option("response", response_kind, "accept | postpone | ignore")
      ->required()
      ->check(CLI::IsMember({"accept", "postpone", "ignore"}, CLI::ignore_case));
  respond->add_option("--index", index, "Reminder index (default: the latest fired)");
  respond->add_option("--delay", delay_text, "Postpone delay, e.g. 10m");
  respond->add_option("--addr", addr, "Daemon address host:port")->capture_default_str();

  std::string scenario_path, tick = "1s", csv_path, trace_path;
  std::uint64_t seed = 0;
  std::vector<int> max_counts;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario file on a virtual clock");
  simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--tick", tick, "Virtual tick step")->capture_default_str();
  simulate->add_option("--max-count", max_counts, "Compare runs across these max counts")->delimiter(',');
  simulate->add_option("--csv", csv_path, "Write the report as CSV ('-' for stdout)");
  simulate->add_option("--trace", trace_path, "Write the event trace ('-' for stdout)");
  simulate->add_option("--config", config_path, "Factor table file");

  std::string serve_addr, data_dir, serve_config;
  long long tick_ms = -1;
  auto* serve = app.add_subcommand("serve", "Run the daemon");
  serve->add_option("--addr", serve_addr, "Listen address host:port (default: $PROMIND_ADDR)");
  serve->add_option("--data-dir", data_dir, "Data directory (default: $PROMIND_DATA_DIR or ./data)");
  serve->add_option("--tick-ms", tick_ms, "Tick interval in ms, 0 disables (default: $PROMIND_TICK_MS)");
  serve->add_option("--config", serve_config, "Factor table file (default: $PROMIND_CONFIG)");

  std::string export_dir;
  std::uint64_t from = 1;
  auto* exp = app.add_subcommand("export", "Dump the journal as NDJSON");
  exp->add_option("--data-dir", export_dir, "Read a data directory instead of the daemon");
  exp->add_option("--from", from, "First sequence number")->capture_default_str();
  exp->add_option("--addr", addr, "Daemon address host:port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*add) {
      const Json body = task_from_flags(add_flags);
      const Json created = ApiClient(addr).call("POST", "/tasks", &body);
      if (json) std::cout << created.dump(2) << '\n';
      else print_task(created);
    } else if (*list) {
      const Json tasks = ApiClient(addr).call("GET", "/tasks");
      if (json) std::cout << tasks.dump(2) << '\n';
      else print_task_table(tasks);
    } else if (*plan) {
      const ProMTask task = task_from_flags(plan_flags);
      const Config config = load_config_flag(config_path);
      PlanContext context;
      if (!curr_loc.empty()) context.current_location = parse_flag<GeoPoint>(curr_loc, "--curr-loc", parse_geo_point);
      context.mode = parse_flag<TravelMode>(mode, "--mode", parse_travel_mode);
      const ReminderPlan p = plan_task(task, config, PreferenceState{}, context);
      if (json) {
        Json out = p;
        if (explain) out["explain"] = explain_json(task, config);
        std::cout << out.dump(2) << '\n';
      } else {
        print_plan(p);
        if (explain) print_explain(task, config, p);
      }
    } else if (*respond) {
      ApiClient client(addr);
      Json body{{"kind", response_kind}};
      if (index < 0) {
        const Json current = client.call("GET", "/tasks/" + task_id);
        index = current.value("next_index", 0) - 1;
        if (index < 0) throw Exit{kApiError, "task " + task_id + " has not fired a reminder yet"};
      }
      body["reminder_index"] = index;
      if (!delay_text.empty()) {
        const auto d = parse_duration(delay_text);
        if (!d) throw Exit{kUsage, "--delay must be a duration such as 10m"};
        body["delay_seconds"] = d->count();
      } else if (CLI::detail::to_lower(response_kind) == "postpone") {
        throw Exit{kUsage, "postpone needs --delay"};
      }
      const Json updated = client.call("POST", "/tasks/" + task_id + "/response", &body);
      if (json) std::cout << updated.dump(2) << '\n';
      else print_task(updated);
    } else if (*simulate) {
      return run_simulate(scenario_path, seed, tick, max_counts, csv_path, trace_path, config_path, json);
    } else if (*serve) {
      return run_serve(serve_addr, data_dir, tick_ms, serve_config);
    } else if (*exp) {
      return run_export(export_dir, addr, from);
    }
  } catch (const Exit& e) {
    std::cerr << "promind: " << e.message << '\n';
    return e.code;
  } catch (const Error& e) {
    if (e.fields().empty()) std::cerr << "promind: " << e.what() << '\n';
    for (const auto& f : e.fields()) std::cerr << "promind: " << f.field << ": " << f.message << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kUsage : kApiError;
  } catch (const std::exception& e) {
    std::cerr << "promind: " << e.what() << '\n';
    return kApiError;
  }
  return 0;
}
