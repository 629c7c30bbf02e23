#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "respdens/quadrature.hpp"
#include "respdens/scenario.hpp"

namespace respdens {

//! Pointwise ground truth of a scenario by quadrature.
//!
//! The response density is always computed as
//! h^{(m)}(y) = int f^{(m)}(y - r(x)) g(x) dx, which does not need r to be
//! invertible. The surrogate density q uses the closed-form inverse of r when
//! one exists and otherwise sums g/|r'| over the preimages found on a grid.
class ScenarioTruth
{
public:
  explicit ScenarioTruth(Scenario s);

  const Scenario& scenario() const { return scenario_; }

  double h(double y, int deriv = 0) const;
  double q(double z) const;
  //! Distribution function of r(X).
  double Q(double z) const;
  //! Solutions x in [0, 1] of r(x) = z.
  std::vector<double> preimages(double z) const;
  //! [min r, max r] over [0, 1].
  std::pair<double, double> surrogate_range() const { return range_; }

  double score(double e) const { return scenario_.error->score(e); }
  //! score / J - e, using the closed-form Fisher information.
  double lambda(double e) const;
  double fisher_information() const { return scenario_.error->fisher_information(); }
  double variance() const { return scenario_.error->variance(); }

  //! d(y) = E[q(y - eps) eps], integrating over the error. Without a
  //! closed-form inverse of r this falls back to d_joint.
  double d(double y) const;
  //! Same quantity through the joint law: E[(y - r(X)) f(y - r(X))].
  double d_joint(double y) const;

  //! int score^2 f and int z^2 f by quadrature.
  double fisher_information_quadrature() const;
  double variance_quadrature() const;

  //! Integrate phi(x) g(x) over [0, 1], split where y - r(x) hits the
  //! error support ends.
  template<class F>
  double expect_covariate(F&& phi, double y_for_kinks = 0.0) const;
  //! Integrate psi(e) f(e) over the error support (or [lo, hi] if given).
  template<class F>
  double expect_error(F&& psi, double lo = -kInf, double hi = kInf) const;

private:
  std::vector<double> covariate_breaks(double y) const;

  Scenario scenario_;
  std::vector<double> r_grid_; // r on a 2001-point grid over [0, 1]
  std::pair<double, double> range_;
};

struct TruthTables
{
  std::vector<double> grid;
  std::vector<double> h;
  std::vector<double> h1;
  std::vector<double> h2;
  std::vector<double> h3;
  std::vector<double> q;
  std::vector<double> Q;
  std::vector<double> score;
  std::vector<double> lambda;
  std::vector<double> d;
  double fisher_information = 0.0; // by quadrature
  double variance = 0.0;           // by quadrature (kInf when not finite)
  std::shared_ptr<const ScenarioTruth> oracle;
};

//! Tabulate h, h', h'', h''', q, Q, score, lambda, d, J and sigma^2 on a
//! strictly increasing grid. Quadrature non-convergence throws
//! NumericalError naming the offending grid point.
TruthTables truth(const Scenario& s, std::span<const double> grid);
TruthTables truth(std::shared_ptr<const ScenarioTruth> oracle, std::span<const double> grid);

//! Equispaced evaluation grid covering the response support up to tail
//! mass 1e-10 on each side: [min r + F^{-1}(1e-10), max r + F^{-1}(1 - 1e-10)].
std::vector<double> default_response_grid(const Scenario& s, std::size_t points = 1024);

std::vector<double> linspace(double lo, double hi, std::size_t points);

// ---------------------------------------------------------------------------

template<class F>
double ScenarioTruth::expect_covariate(F&& phi, double y_for_kinks) const
{
  const auto& g = *scenario_.covariate;
  const auto breaks = covariate_breaks(y_for_kinks);
  return quad::adaptive_split(
    [&](double x) { return phi(x) * g.pdf(x); }, breaks, 1e-10, "covariate expectation");
}

template<class F>
double ScenarioTruth::expect_error(F&& psi, double lo, double hi) const
{
  const auto& f = *scenario_.error;
  auto [slo, shi] = f.support();
  lo = std::max(lo, slo);
  hi = std::min(hi, shi);
  if (!(hi > lo))
    return 0.0;
  auto integrand = [&](double e) { return psi(e) * f.pdf(e); };
  if (std::isfinite(lo) || std::isfinite(hi) || lo > 0.0 || hi < 0.0)
    return quad::adaptive(integrand, lo, hi, 1e-10, "error expectation");
  return quad::adaptive(integrand, lo, 0.0, 5e-11, "error expectation") +
         quad::adaptive(integrand, 0.0, hi, 5e-11, "error expectation");
}

} // namespace respdens
