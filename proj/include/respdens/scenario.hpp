#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "respdens/distributions.hpp"

namespace respdens {

//! Declared assumption flags of a scenario: (F) error law, (G) covariate
//! quasi-uniform on [0, 1], (R) regression strictly increasing.
struct AssumptionFlags
{
  bool error_ok = true;
  bool covariate_ok = true;
  bool regression_ok = true;
};

//! Generative triple (g, r, f) for Y = r(X) + eps.
struct Scenario
{
  std::string name;
  std::shared_ptr<const CovariateLaw> covariate;
  std::shared_ptr<const RegressionFunction> regression;
  std::shared_ptr<const ErrorLaw> error;
  AssumptionFlags flags;

  Json to_json() const;
  static Scenario from_json(const Json& j);
};

std::vector<std::string> builtin_scenario_names();

//! uniform-linear, uniform-exp, uniform-logistic, sin-beta. Throws
//! ConfigError listing the available names otherwise.
Scenario builtin_scenario(const std::string& name);

//! Built-in name, or path to a JSON scenario document.
Scenario load_scenario(const std::string& name_or_path);

struct AssumptionCheck
{
  std::string name; // "F", "G" or "R"
  bool passed = false;
  std::optional<double> witness; // offending grid point on failure
  std::string detail;
};

struct ValidationReport
{
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;
  const AssumptionCheck& check(const std::string& name) const;
  Json to_json() const;
};

//! Grid-based verification of (F), (G), (R) plus unit mass of f and g.
//! Never throws on a failed assumption, it is reported instead.
ValidationReport validate(const Scenario& s);

//! Unobservable quantities recorded alongside a simulated sample.
struct HiddenTruth
{
  std::vector<double> errors;
  std::vector<double> regression_values; // r(X_j)
};

struct Dataset
{
  std::vector<double> x;
  std::vector<double> y;
  std::optional<HiddenTruth> hidden;
  std::uint64_t seed = 0;
  std::string scenario;

  std::size_t size() const { return x.size(); }
  bool has_hidden() const { return hidden.has_value(); }
  //! Throws ConfigError unless hidden truth is present.
  const HiddenTruth& require_hidden(const char* who) const;
};

//! Deterministic in (scenario, n, seed); X from stream 0 and errors from
//! stream 1 of the counter generator, both by inverse transform.
Dataset sample(const Scenario& s, std::size_t n, std::uint64_t seed);

} // namespace respdens
