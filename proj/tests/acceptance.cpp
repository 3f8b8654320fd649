// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "suites.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
  std::uint64_t seed = 20240611;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
  bool all = true;
  for (int id = 1; id <= 12; ++id) {
    auto c = slipflow::suites::run_check(id, seed);
    all = all && c.pass;
    std::string vals;
    for (const auto& [k, v] : c.values) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " %s=%.6g", k.c_str(), v);
      vals += buf;
    }
    std::printf("%s %2d %-26s (%.2f s)%s%s%s\n", c.pass ? "PASS" : "FAIL", id, c.name.c_str(), c.seconds,
                vals.c_str(), c.note.empty() ? "" : "  note: ", c.note.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
