#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "twinverify/model.hpp"
#include "twinverify/timing.hpp"

namespace twinverify::testing {

// Two automata that hand a token back and forth forever.
inline constexpr const char* kHandshake = R"(chan ping, pong
process A {
  loc Send init delay fixed 2
  loc Wait
  edge Send -> Wait sync ping!
  edge Wait -> Send sync pong?
}
process B {
  loc Wait init
  loc Reply delay fixed 3
  edge Wait -> Reply sync ping?
  edge Reply -> Wait sync pong!
}
)";

// Each automaton waits to receive on the other's channel before emitting.
inline constexpr const char* kCrossedWait = R"(chan a, b
process P {
  loc Wait init
  loc Go
  edge Wait -> Go sync b?
  edge Go -> Wait sync a!
}
process Q {
  loc Wait init
  loc Go
  edge Wait -> Go sync a?
  edge Go -> Wait sync b!
}
)";

inline Network net_of(const std::string& text) { return parse_model(text, [](const std::string& p) -> EmpiricalDistribution {
    throw TimingError("no sidecar files in tests: " + p);
  }); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory under the system temp dir, removed on scope exit.
class ScratchDir {
public:
  explicit ScratchDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("twinverify-" + tag + "-" + std::to_string(std::random_device{}()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

}  // namespace twinverify::testing
