#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "respdens/density.hpp"
#include "respdens/kernel.hpp"
#include "respdens/scenario.hpp"
#include "respdens/smoother.hpp"

namespace respdens {

//! m = floor(n / 2); the first half is order[0, m), the second order[m, n).
//! order is the identity unless the split was shuffled.
struct SplitPlan
{
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::size_t> order;

  std::span<const std::size_t> first() const { return {order.data(), m}; }
  std::span<const std::size_t> second() const { return {order.data() + m, n - m}; }
};

SplitPlan make_split(std::size_t n, std::optional<std::uint64_t> shuffle_seed = std::nullopt);

//! Fits on each half and residuals of every observation under both fits.
struct CrossFit
{
  SplitPlan plan;
  double bandwidth = 0.0;
  std::vector<double> r1; // r-hat_1(X_j), fit on the first half, all j
  std::vector<double> r2; // r-hat_2(X_j), fit on the second half
  std::vector<double> e1; // Y_j - r-hat_1(X_j)
  std::vector<double> e2; // Y_j - r-hat_2(X_j)
};

//! Requires n >= 8.
CrossFit crossfit(const Dataset& data, double c, const WeightFunction& w,
                  std::optional<std::uint64_t> shuffle_seed = std::nullopt);

//! sum_j weight * kappa_a(z - p_j) with exact derivative. Terms with
//! |z - p_j| > 40 a are below 1e-17 relative and skipped.
class LogisticMixture
{
public:
  LogisticMixture() = default;
  LogisticMixture(std::vector<double> centers, double weight, double a);
  //! Union of blocks with their own weights.
  LogisticMixture(std::vector<std::pair<std::vector<double>, double>> blocks, double a);

  double value(double z) const;
  double derivative(double z) const;
  double scale() const { return a_; }
  double total_weight() const;

private:
  struct Block
  {
    std::vector<double> sorted;
    double weight;
  };
  std::vector<Block> blocks_;
  double a_ = 1.0;
};

struct ScoreEstimate
{
  int half = 1;
  LogisticMixture density; // f-hat_i
  double a = 0.0;
  double J = 0.0;

  //! -f'/(a + f)
  double score(double z) const;
  double lambda(double z) const { return score(z) / J - z; }
};

struct SplitDensities
{
  LogisticMixture f1;
  LogisticMixture f2;
  LogisticMixture f3;
};

SplitDensities split_density_estimates(const CrossFit& cf, double a);

struct ScorePair
{
  ScoreEstimate s1;
  ScoreEstimate s2;
  double J = 0.0;
};

//! Throws NumericalError if the Fisher information estimate is below 1e-12.
ScorePair score_and_fisher(const SplitDensities& dens, const CrossFit& cf, double a);

//! f-hat_3' tabulated on an equispaced lattice, read back by cubic
//! interpolation.
class DerivativeTable
{
public:
  DerivativeTable(const LogisticMixture& f3, double lo, double hi, std::size_t points);
  double operator()(double z) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

private:
  std::vector<double> values_;
  double lo_;
  double hi_;
  double delta_;
};

struct CorrectionTerm
{
  std::vector<double> grid;
  std::vector<double> C1;
  std::vector<double> C2;
  std::vector<double> C;
  double J = 0.0;
  double a = 0.0;
  double c = 0.0;
  std::size_t first_size = 0;
  std::size_t second_size = 0;
  //! Largest |mean over its half| of the centered factor, relative to the
  //! largest |factor|: zero up to rounding.
  double centering_residual = 0.0;

  void write_csv(const std::string& path) const;
  Json sidecar() const;
};

inline constexpr std::size_t kDefaultDerivativeTable = 4096;

//! C-hat on the grid; f-hat_3' from a tabulated lattice of `table_points`
//! nodes, or evaluated exactly when table_points is 0.
CorrectionTerm correction(std::span<const double> grid, const CrossFit& cf,
                          const LogisticMixture& f3, const ScorePair& scores,
                          std::size_t table_points = kDefaultDerivativeTable);

//! Grids must match exactly.
DensityEstimate efficient_estimate(const DensityEstimate& h_hat, const CorrectionTerm& C);

struct EfficiencyConfig
{
  BandwidthSchedule score{BandwidthRule::Score, 1.0, std::nullopt};
  BandwidthSchedule smoother{BandwidthRule::Smoother, 1.0, std::nullopt};
  WeightFunction weight;
  std::optional<std::uint64_t> shuffle_seed;
  std::size_t table_points = kDefaultDerivativeTable;

  Json to_json() const;
};

struct EfficiencyResult
{
  CrossFit cf;
  SplitDensities densities;
  ScorePair scores;
  CorrectionTerm term;
};

EfficiencyResult efficiency_correction(const Dataset& data, std::span<const double> grid,
                                       const EfficiencyConfig& config = {});

struct NormalityTest
{
  double statistic = 0.0;
  double p_value = 1.0;
  bool near_normal = true; // not rejected at 5%
};

//! Jarque-Bera test; the p-value uses the chi-square(2) limit.
NormalityTest jarque_bera(std::span<const double> values);

} // namespace respdens
