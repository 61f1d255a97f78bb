#pragma once

#include "fracnoether/optimal_control.hpp"
#include "fracnoether/variational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fracnoether {

enum class ProblemKind { cv, oc };

using Params = std::map<std::string, double>;

/// Calculus-of-variations problem with both endpoints fixed.
struct CVProblem {
  CVLagrangian L;
  Vec q_a;
  Vec q_b;
};

struct NamedCVSymmetry {
  std::string label;
  CVSymmetry symmetry;
};

struct NamedOCSymmetry {
  std::string label;
  OCSymmetry symmetry;
};

struct ProblemSpec {
  std::string name;
  ProblemKind kind = ProblemKind::oc;
  bool autonomous = false;
  std::variant<CVProblem, OCProblem> problem;
  std::variant<std::vector<NamedCVSymmetry>, std::vector<NamedOCSymmetry>> symmetries;
  Params parameters;  // values the problem was built with
  std::string doc;

  double a = 0.0;  // default interval
  double b = 1.0;
  std::optional<double> fixed_alpha;
  // Conservation tolerance is charge_constant * h.
  double charge_constant = 1.0;
  // Stored regression bound on the charge D-residual at regression_alpha, N = 512.
  std::optional<double> regression_bound;
  double regression_alpha = 0.5;

  const CVProblem& cv() const { return std::get<CVProblem>(problem); }
  const OCProblem& oc() const { return std::get<OCProblem>(problem); }
  const std::vector<NamedCVSymmetry>& cv_symmetries() const {
    return std::get<std::vector<NamedCVSymmetry>>(symmetries);
  }
  const std::vector<NamedOCSymmetry>& oc_symmetries() const {
    return std::get<std::vector<NamedOCSymmetry>>(symmetries);
  }
};

class ProblemNotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The built-in problems with default parameters.
const std::vector<ProblemSpec>& registry();

/// Throws ProblemNotFound for unknown names.
const ProblemSpec& lookup(const std::string& name);

/// Rebuilds a problem with `key=value` overrides; unknown keys or
/// malformed values throw std::invalid_argument.
ProblemSpec with_overrides(const ProblemSpec& spec, const std::vector<std::string>& overrides);
ProblemSpec with_parameters(const ProblemSpec& spec, const Params& params);

struct CheckResult {
  std::string name;
  bool pass = true;
  double max_rel_error = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool pass = true;
};

/// Partial-derivative consistency and generator finiteness at seeded random
/// sample points in the problem's time interval.
ValidationReport validate(const ProblemSpec& spec, std::uint64_t seed = 1, int samples = 32);

}  // namespace fracnoether
