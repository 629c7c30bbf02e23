#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "respdens/density.hpp"
#include "respdens/efficiency.hpp"
#include "respdens/truth.hpp"

namespace respdens {

// ---------------------------------------------------------------------------
// Empirical expansion terms

struct EmpiricalTerms
{
  std::vector<double> grid;
  std::vector<double> H1; // (1/n) sum f(y - r(X_j)) - h(y)
  std::vector<double> H2; // (1/n) sum q(y - eps_j) - h(y)
  std::vector<double> H3; // (1/n) sum eps_j (f'(y - r(X_j)) - h'(y))
  std::vector<double> C;  // (1/n) sum lambda(eps_j) (f'(y - r(X_j)) - h'(y))
  double error_mean = 0.0;
};

//! Finite sums over an oracle dataset on truth.grid. Throws ConfigError
//! without hidden truth.
EmpiricalTerms empirical_terms(const Dataset& data, const TruthTables& truth);

// ---------------------------------------------------------------------------
// Influence functions

//! h(y), h'(y), d(y) and J for a fixed y.
struct InfluencePoint
{
  double y = 0.0;
  double h = 0.0;
  double h1 = 0.0;
  double d = 0.0;
  double J = 0.0;
};

InfluencePoint influence_point(const ScenarioTruth& truth, double y);

struct InfluenceValue
{
  double I = 0.0;
  double I_star = 0.0;
};

//! I_y and its projection I*_y at (x, eps). Throws NumericalError when J
//! is not finite and positive.
InfluenceValue influence(const ScenarioTruth& truth, const InfluencePoint& p, double x, double eps);

//! E[phi(X, eps)] by nested adaptive quadrature: X outside, eps inside,
//! with eps split where q(y - eps) jumps.
double expect_joint(const ScenarioTruth& truth, double y,
                    const std::function<double(double, double)>& phi);

struct InfluenceMoments
{
  double mean_I = 0.0;
  double mean_I_star = 0.0;
  double var_I = 0.0;
  double var_I_star = 0.0;
  double var_difference = 0.0; // E[(I - I*)^2]
};

InfluenceMoments influence_moments(const ScenarioTruth& truth, double y);

struct OrthogonalityCheck
{
  std::string element;
  double value = 0.0; // E[(I - I*) t]
};

//! Twelve tangent-space elements: centered polynomials alpha(X) (4),
//! beta(eps) with E beta = E[eps beta] = 0 (4), gamma(X) score(eps) (4).
std::vector<OrthogonalityCheck> orthogonality_checks(const ScenarioTruth& truth, double y);

// ---------------------------------------------------------------------------
// Covariances

struct CovarianceReport
{
  std::vector<double> points;
  Eigen::MatrixXd gamma1;
  Eigen::MatrixXd gamma2;
  Eigen::MatrixXd gamma3;
  double variance = 0.0;
  Eigen::MatrixXd gamma; // gamma1 + gamma2 + variance * gamma3
  std::string method = "quadrature";

  Json to_json() const;
};

//! All pairs of `points` by quadrature; only the upper triangle is computed
//! and mirrored.
CovarianceReport gamma(const ScenarioTruth& truth, std::span<const double> points);

struct MonteCarloCovariance
{
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t draws = 0;
};

//! H(y) = f(y - r(X)) + q(y - eps) - eps (f'(y - r(X)) - h'(y)); sample
//! covariance of H(s), H(t) over independent draws with its standard error.
MonteCarloCovariance gamma_monte_carlo(const ScenarioTruth& truth, double s, double t,
                                       std::size_t draws, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Monte Carlo harnesses

struct ExpansionRow
{
  std::size_t n = 0;
  //! sqrt(n) sup |h-hat - h - H1 - H2 + H3|: the H3 sign that matches
  //! H(y) = f(y - r(X)) + q(y - eps) - eps (f'(y - r(X)) - h'(y))
  std::vector<double> plugin;
  //! sqrt(n) sup |h-hat - h - H1 - H2 - H3|, the opposite sign
  std::vector<double> plugin_plus_h3;
  std::vector<double> oracle; // sqrt(n) sup |h-tilde - h - H1 - H2|
  double plugin_median = 0.0;
  double plugin_plus_h3_median = 0.0;
  double oracle_median = 0.0;
};

struct HarnessConfig
{
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  PipelineConfig pipeline;
  std::size_t grid_points = 1024;
};

std::vector<ExpansionRow> expansion_check(const Scenario& s, std::span<const std::size_t> ns,
                                          std::size_t reps, const HarnessConfig& config);

//! W(x) = int g(x + c u) psi(u) psi(u)^T w(u) du over u with x + c u in
//! [0, 1].
Eigen::Matrix3d population_gram(const CovariateLaw& g, const WeightFunction& w, double x, double c);

//! First row of W(x)^{-1}; throws NumericalError if W(x) is numerically
//! singular.
Eigen::RowVector3d linearization_row(const CovariateLaw& g, const WeightFunction& w, double x,
                                     double c);

struct LinearizationRow
{
  std::size_t n = 0;
  double bandwidth = 0.0;
  std::vector<double> sup_remainder; // sqrt(n) sup_x |r-hat - r - rho-hat|
  std::vector<double> scaled_mse;    // n c (1/n) sum (r-hat(X_j) - r(X_j))^2
  std::vector<double> mean_gap;      // sqrt(n) |int (r-hat - r) g - eps-bar|
  double sup_remainder_median = 0.0;
  double scaled_mse_median = 0.0;
  double mean_gap_median = 0.0;
};

struct LinearizationConfig
{
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  BandwidthSchedule smoother{BandwidthRule::Smoother, 1.0, std::nullopt};
  WeightFunction weight;
  std::size_t x_grid_points = 201;
};

std::vector<LinearizationRow> smoother_linearization_check(const Scenario& s,
                                                           std::span<const std::size_t> ns,
                                                           std::size_t reps,
                                                           const LinearizationConfig& config);

//! Pointwise sampling variance of sqrt(n)(h-hat(y) - h(y)) against the
//! quadrature Gamma(y, y).
struct PointVarianceStudy
{
  double y = 0.0;
  std::size_t n = 0;
  std::vector<double> scaled_errors;
  double empirical_variance = 0.0;
  double gamma = 0.0;
  double relative_gap = 0.0; // |empirical / gamma - 1|
};

PointVarianceStudy variance_study(const Scenario& s, std::size_t n, std::size_t reps, double y,
                                  const HarnessConfig& config);

struct EfficiencyStudy
{
  double y = 0.0;
  std::size_t n = 0;
  std::vector<double> plain;     // sqrt(n)(h-hat - h)(y)
  std::vector<double> corrected; // sqrt(n)(h-hat - C-hat - h)(y)
  std::vector<double> J;
  double var_plain = 0.0;
  double var_corrected = 0.0;
  double var_I = 0.0;
  double var_I_star = 0.0;
  double J_median = 0.0;
  double J_true = 0.0;
};

EfficiencyStudy efficiency_study(const Scenario& s, std::size_t n, std::size_t reps, double y,
                                 const HarnessConfig& config, const EfficiencyConfig& eff);

struct CorrectionRow
{
  std::size_t n = 0;
  std::vector<double> sup_C;          // sqrt(n) sup |C-hat|
  std::vector<double> sup_C_vs_truth; // sqrt(n) sup |C-hat - C|
  std::vector<double> J;
  double sup_C_median = 0.0;
  double sup_C_vs_truth_median = 0.0;
  double J_median = 0.0;
};

//! C-hat on the default response grid against the oracle C of
//! empirical_terms, per n.
std::vector<CorrectionRow> correction_check(const Scenario& s, std::span<const std::size_t> ns,
                                            std::size_t reps, const HarnessConfig& config,
                                            const EfficiencyConfig& eff);

double median(std::vector<double> v);
//! Unbiased sample variance.
double sample_variance(std::span<const double> v);

Json to_json(const std::vector<ExpansionRow>& rows);
Json to_json(const std::vector<LinearizationRow>& rows);
Json to_json(const PointVarianceStudy& v);
Json to_json(const EfficiencyStudy& e);
Json to_json(const std::vector<CorrectionRow>& rows);

} // namespace respdens
