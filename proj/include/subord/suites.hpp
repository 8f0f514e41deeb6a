#pragma once

// Verification suites behind the `verify` command. Each suite runs a set of
// named checks and never throws for a failed check; library errors raised
// inside a check are recorded as that check's failure.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "subord/csv.hpp"

namespace subord::suites {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;  // measured quantity (margin, constant, error ...)
  double limit = 0.0;  // what it is compared against
  std::string detail;
};

struct SuiteResult {
  std::string name;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool pass() const;
  /// Name and detail of the first failing check, or "".
  std::string first_failure() const;
  csv::Table table() const;
};

struct Config {
  /// Bernstein functions checked by the bernstein and steplaw suites; others
  /// use the Levy entries of this list.
  std::vector<std::string> phis;
  /// Subordinators used for the Levy-measure comparisons with S_n.
  std::vector<std::string> dominance_phis{"stable:0.5"};
  /// Subordinators for the E T_n^{-beta} rate check.
  std::vector<std::string> poly_phis{"stable:0.5", "log2"};
  std::vector<std::string> chains{"two-state", "backward"};
  std::vector<std::string> f_specs{"1", "linear"};
  std::size_t pgf_M = std::size_t{1} << 14;
  std::size_t dominance_M = std::size_t{1} << 16;
  std::size_t dominance_n = 50;
  std::size_t moments_n = 200;
  std::size_t chain_M = 4096;
  std::size_t rates_n = 50;
  std::size_t invariance_n = 20;
  std::size_t mc_M = std::size_t{1} << 20;
  std::size_t mc_samples = 1000000;
  std::uint64_t seed = 20240601;
  double tol = 1e-6;  // dominance tolerance

  Config();
};

/// bernstein, steplaw, dominance, moments, chains, rates, montecarlo.
const std::vector<std::string>& names();

/// Throws DomainError for an unknown suite name.
SuiteResult run(const std::string& name, const Config& config);

}  // namespace subord::suites
