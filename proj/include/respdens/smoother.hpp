#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "respdens/scenario.hpp"

namespace respdens {

//! Symmetric weight density on [-1, 1] with analytic derivatives.
class WeightFunction
{
public:
  //! (315 / 256)(1 - u^2)^4.
  WeightFunction();
  //! Polynomial in u with coefficients in increasing powers, zero outside
  //! [-1, 1].
  WeightFunction(std::vector<double> coeffs, std::string name);

  double operator()(double u) const { return derivative(u, 0); }
  double derivative(double u, int d) const;
  const std::string& name() const { return name_; }

private:
  std::vector<std::vector<double>> derivs_;
  std::string name_;
};

struct LocalFit
{
  double x = 0.0;
  Eigen::Vector3d beta_hat = Eigen::Vector3d::Zero(); // (r, c r', c^2 r''/2)
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();     // W-bar(x)
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();      // V-bar(x)
  bool used_pseudo_inverse = false;
  double condition_number = 0.0;
  std::size_t window_size = 0;
};

struct SmootherFit
{
  double bandwidth = 0.0;
  std::vector<double> x;        // sample covariates
  std::vector<double> r_hat;    // at sample points
  std::vector<double> residuals;
  std::vector<double> grid;
  std::vector<double> r_hat_grid;
  std::vector<LocalFit> sample_fits;
  std::vector<LocalFit> grid_fits;

  std::size_t pseudo_inverse_count() const;
  //! Columns x, [r_true,] r_hat, residual, pseudo_inverse_flag; one row per
  //! sample point. r_true is written when `r` is given.
  void write_csv(const std::string& path,
                 const RegressionFunction* r = nullptr) const;
};

inline constexpr double kPseudoInverseCutoff = 1e-10;
inline constexpr double kConditionTrigger = 1e12;

//! Minimum-norm solution of a symmetric positive semidefinite 3x3 system
//! by eigendecomposition, dropping eigenvalues below cutoff * max eigenvalue.
Eigen::Vector3d pseudo_inverse_solve(const Eigen::Matrix3d& m, const Eigen::Vector3d& v,
                                     double cutoff = kPseudoInverseCutoff);

//! Covariates sorted once so that each window is found by binary search.
class SortedDesign
{
public:
  SortedDesign(std::span<const double> x, std::span<const double> y);

  std::size_t size() const { return xs_.size(); }
  //! Index range [first, last) of points with |X - x| <= c.
  std::pair<std::size_t, std::size_t> window(double x, double c) const;
  double x(std::size_t k) const { return xs_[k]; }
  double y(std::size_t k) const { return ys_[k]; }

private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

//! Local quadratic weighted least squares at x with bandwidth c.
//! Throws DegenerateWindow if no design point lies within c of x.
LocalFit fit_at(const SortedDesign& design, double c, const WeightFunction& w, double x);
LocalFit fit_at(const Dataset& data, double c, const WeightFunction& w, double x);

//! Fit at every sample point and every grid point. Degenerate windows are
//! collected and reported together.
SmootherFit fit_all(std::span<const double> x, std::span<const double> y, double c,
                    const WeightFunction& w, std::span<const double> grid = {});
SmootherFit fit_all(const Dataset& data, double c, const WeightFunction& w,
                    std::span<const double> grid = {});

//! Evaluate the fit built from (x, y) at arbitrary points.
std::vector<double> smooth_at(const SortedDesign& design, double c, const WeightFunction& w,
                              std::span<const double> points);

} // namespace respdens
