#pragma once

#include "slipflow/frac_geom.hpp"
#include "slipflow/symbolic.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace slipflow::suites {

/// Outcome of one acceptance check. `values` holds the measured numbers
/// in report order.
struct Check {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> values;
  std::string note;
  double seconds = 0;

  void put(const std::string& key, double v) { values.emplace_back(key, v); }
};

/// Generator for check `id`, derived from the run seed.
std::mt19937_64 make_rng(std::uint64_t seed, int id);

/// Smooth random graph of height ~ delta^{3/2} over D(center, delta).
BoundaryGraph random_graph(std::mt19937_64& rng, double center, double delta, double s);

/// Fixed test profiles used by the CLI: "sin", "poly", "bump".
BoundaryGraph named_graph(const std::string& name, double delta, double s);

/// Random trigonometric expression in x, y with unit-order coefficients
/// and frequencies up to `kmax`.
symbolic::Expr random_trig(std::mt19937_64& rng, double kmax, int terms = 3);

Check piola_identities(std::uint64_t seed);       // 1
Check decompositions(std::uint64_t seed);         // 2
Check jacobian_scaling();                         // 3
Check harmonic_extension_check(std::uint64_t seed);  // 4
Check gagliardo_exactness();                      // 5
Check kernel_detection();                         // 6
Check manufactured_rates();                       // 7
Check stability_estimators();                     // 8
Check reflection();                               // 9
Check lifting();                                  // 10
Check exponent_ladders();                         // 11
Check partition_of_unity(std::uint64_t seed);     // 12

/// All twelve checks in order.
std::vector<Check> acceptance(std::uint64_t seed);

/// Runs one check by id (1..12); exceptions become a failed check.
Check run_check(int id, std::uint64_t seed);

}  // namespace slipflow::suites
