#pragma once

// Command-line front end: argument parsing, the verification suite and the
// table/report writers behind the `qgauss` executable.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qgauss::cli {

enum ExitCode : int { kSuccess = 0, kVerificationFailed = 1, kUsageError = 2 };

struct RunConfig {
  std::string command;
  std::optional<double> q;
  std::string kind = "bm";
  std::string cov_grid;  ///< path of a (t_i, t_j, c) CSV; overrides kind
  std::vector<double> times;
  int d = 2;
  int N = 4;
  unsigned quad_points = 200;
  std::size_t paths = 20000;
  std::uint64_t seed = 1;
  std::string out;  ///< empty: standard output
  std::optional<double> tol;
  bool expect_markov = false;
  bool origin = false;
  std::vector<unsigned> exponents;
  unsigned grid_points = 0;  ///< 0: per-command default
  double tmin = 1e-3;
  double tmax = 1e-1;
};

struct CheckResult {
  std::string group;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the invariant groups for the configuration; results in order.
std::vector<CheckResult> run_verify_suite(const RunConfig& config);

/// Parses argv, runs the command and returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qgauss::cli
