#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace slipflow::cli {

inline constexpr const char* kVersion = "0.3.0";

struct RunConfig {
  std::string subcommand;
  std::string domain = "square";
  double h = 0.125;
  int refine = 0;
  std::string s = "4", n = "2", q;
  std::string case_id = "square-slip";
  std::string graph = "sin";
  double delta = 0.25;
  int level = 4;
  int check = 0;  // `all`: run a single check when > 0
  std::string output;
  std::uint64_t seed = 20240611;
  std::string config;
};

/// Applies "key = value" lines from a config file over `cfg`; keys are the
/// long flag names. Throws std::invalid_argument on unknown keys.
void apply_config(std::istream& in, RunConfig& cfg);

/// Exit codes: 0 all checks pass, 1 some check failed, 2 usage or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace slipflow::cli
