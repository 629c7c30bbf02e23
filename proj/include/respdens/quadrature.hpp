#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "respdens/error.hpp"

namespace respdens::quad {

inline constexpr std::size_t kGaussPoints = 64;

struct GaussRule
{
  std::array<double, kGaussPoints> nodes;   // on [-1, 1]
  std::array<double, kGaussPoints> weights;
};

//! 64-point Gauss-Legendre rule, computed once by Newton iteration on P_64.
const GaussRule& gauss_legendre_rule();

//! Fixed 64-point Gauss-Legendre on [a, b]; exact for polynomials of degree
//! <= 127.
template<class F>
double gauss_legendre(F&& f, double a, double b)
{
  const auto& rule = gauss_legendre_rule();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussPoints; ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

//! Composite Gauss-Legendre over consecutive breakpoints, with `panels`
//! equal sub-panels between each pair.
template<class F>
double composite_gauss_legendre(F&& f,
                                std::span<const double> breakpoints,
                                int panels = 1)
{
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double w = (breakpoints[i + 1] - a) / panels;
    for (int p = 0; p < panels; ++p)
      sum += gauss_legendre(f, a + p * w, a + (p + 1) * w);
  }
  return sum;
}

struct Result
{
  double value;
  double error;
};

//! Adaptive Gauss-Kronrod (boost) with an absolute error goal. Infinite
//! limits are allowed. Throws NumericalError mentioning `where` if the
//! error estimate exceeds the goal.
template<class F>
double adaptive(F&& f, double a, double b, double abs_tol = 1e-9,
                const std::string& where = "")
{
  if (a == b)
    return 0.0;
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  double l1 = 0.0;
  // boost stops on a relative goal; derive it from the absolute one so that
  // integrands dominated by cancellation do not refine down to rounding noise
  Rule::integrate(f, a, b, 0, 0.0, &err, &l1);
  const double rel = std::max(0.1 * abs_tol / std::max(l1, 1e-300), 1e-13);
  const double value = Rule::integrate(f, a, b, 18, rel, &err, &l1);
  if (!std::isfinite(value) || err > abs_tol) {
    throw NumericalError("quadrature did not converge" +
                         (where.empty() ? std::string() : " at " + where) +
                         " (error estimate " + std::to_string(err) + ")");
  }
  return value;
}

//! Adaptive integration split at the given interior breakpoints.
template<class F>
double adaptive_split(F&& f, std::span<const double> breakpoints,
                      double abs_tol = 1e-9, const std::string& where = "")
{
  double sum = 0.0;
  const double per_piece =
    abs_tol / std::max<std::size_t>(1, breakpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i + 1] > breakpoints[i])
      sum += adaptive(f, breakpoints[i], breakpoints[i + 1], per_piece, where);
  }
  return sum;
}

} // namespace respdens::quad
