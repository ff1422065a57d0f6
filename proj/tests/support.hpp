#pragma once

#include <random>
#include <stdexcept>
#include <string>

#include "promind/factors.hpp"
#include "promind/task.hpp"
#include "promind/time.hpp"

namespace promind::testing {

inline Timestamp at(const std::string& text) {
  const auto t = parse_rfc3339(text);
  if (!t) throw std::invalid_argument("bad test timestamp " + text);
  return *t;
}

inline Timestamp utc(int hour, int minute, int second = 0) {
  using namespace std::chrono;
  return sys_days{year{2024} / May / 1} + hours{hour} + minutes{minute} + seconds{second};
}

inline FactorProfile profile(FactorLevel com, FactorLevel imp, FactorLevel mot, AgeGroup age,
                             TaskCategory typ = TaskCategory::Personal) {
  FactorProfile p;
  p.com = com;
  p.imp = imp;
  p.mot = mot;
  p.age = age;
  p.typ = typ;
  return p;
}

inline FactorProfile random_profile(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(0, 2), age(0, 1), typ(0, 3);
  return profile(static_cast<FactorLevel>(level(rng)), static_cast<FactorLevel>(level(rng)),
                 static_cast<FactorLevel>(level(rng)), static_cast<AgeGroup>(age(rng)),
                 static_cast<TaskCategory>(typ(rng)));
}

inline ProMTask timed_task(std::string id, Timestamp rem, Timestamp whe, FactorProfile p = {}) {
  ProMTask t;
  t.id = std::move(id);
  t.wha = "task " + t.id;
  t.rem = rem;
  t.whe = whe;
  t.profile = p;
  return t;
}

}  // namespace promind::testing

#include <filesystem>
#include <unistd.h>

namespace promind::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("promind-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace promind::testing
