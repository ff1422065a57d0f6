#include "promind/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "promind/codec.hpp"
#include "promind/error.hpp"

namespace promind {

Config with_max_count(Config config, int n) {
  auto& t = config.counts;
  t.max_count = n;
  for (int* entry : {&t.n_low, &t.n_medium, &t.n_high, &t.a_young, &t.a_old}) *entry = std::min(*entry, n);
  return config;
}

std::vector<std::string> validate_config(const Config& c) {
  auto errors = validate_tables(c.counts, c.modality, c.weights);
  if (c.agent.grace < Duration{0}) errors.emplace_back("agent.grace_s must be non-negative");
  if (c.agent.event_spacing <= Duration{0}) errors.emplace_back("agent.event_spacing_s must be positive");
  if (!(c.agent.proximity_radius_m > 0.0)) errors.emplace_back("agent.proximity_radius_m must be positive");
  if (!(c.learning.alpha > 0.0 && c.learning.alpha <= 1.0)) errors.emplace_back("user_model.alpha must lie in (0,1]");
  if (!(c.learning.lambda >= 0.0 && c.learning.lambda <= 1.0)) errors.emplace_back("user_model.lambda must lie in [0,1]");
  return errors;
}

Config parse_config(const std::string& json_text) {
  Config config;
  try {
    from_json(Json::parse(json_text), config);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed configuration: ") + e.what());
  }
  if (auto errors = validate_config(config); !errors.empty()) {
    std::string joined = "invalid configuration:";
    for (const auto& e : errors) joined += " " + e + ";";
    throw Error(ErrorCode::InvalidArgument, joined);
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open configuration " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const Config& config) {
  Json j = config;
  return j.dump(2);
}

}  // namespace promind
