#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "respdens/distributions.hpp"

namespace respdens {

struct InvariantResult
{
  std::string name;
  bool passed = false;
  double value = 0.0;     // measured discrepancy
  double tolerance = 0.0; // passes iff value <= tolerance
  std::string detail;
};

struct CheckOptions
{
  std::uint64_t seed = 20240101;
  //! Name of a check whose input is deliberately broken; see
  //! injectable_faults().
  std::optional<std::string> inject_fault;
};

std::vector<std::string> injectable_faults();

//! Kernel moments, rational coefficients, smoother exactness, path
//! equivalence, unit mass, centering identities, Gamma symmetry and
//! quadrature identities, in that order. Never throws on a failed check;
//! an exception inside a check is reported as its failure.
std::vector<InvariantResult> run_invariant_suite(const CheckOptions& options);

//! Null when everything passed.
std::optional<std::string> first_failure(const std::vector<InvariantResult>& results);

Json to_json(const InvariantResult& r);

} // namespace respdens
