#pragma once

// Command-line front end. Everything except argv parsing lives here so the
// tests can drive commands in process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fracnoether::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumeric = 3, kNotFound = 4 };

struct RunConfig {
  std::string command;
  std::string problem = "autonomous_lq";
  double alpha = 0.5;
  int N = 256;
  std::optional<double> a;  // problem default when empty
  std::optional<double> b;
  double tol = 1e-10;                  // Newton tolerance
  std::optional<double> charge_tol;    // default charge_constant * h
  std::string out;                     // empty: $FRACNOETHER_OUT, then "."
  std::vector<std::string> overrides;  // key=value
  std::uint64_t seed = 1;

  // frac-deriv
  std::string function = "power";
  double upsilon = 1.0;
  std::string side = "left";

  // convergence
  std::string check = "frac-deriv";
  int levels = 3;

  // sweep-alpha
  std::vector<double> alphas;
};

/// Parses argv and runs the selected command.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace fracnoether::cli
