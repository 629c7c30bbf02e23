#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "respdens/efficiency.hpp"
#include "respdens/error.hpp"
#include "respdens/scenario.hpp"
#include "respdens/truth.hpp"

using namespace respdens;

namespace {

Dataset noiseless_quadratic(std::size_t n)
{
  Dataset d;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = (j + 0.5) / static_cast<double>(n);
    d.x.push_back(x);
    d.y.push_back(0.5 + x - 0.25 * x * x);
  }
  return d;
}

} // namespace

TEST(Split, HalvesPartitionTheSample)
{
  for (std::size_t n : {8u, 9u, 101u}) {
    for (auto seed : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{77}}) {
      const auto p = make_split(n, seed);
      EXPECT_EQ(p.m, n / 2);
      EXPECT_EQ(p.first().size() + p.second().size(), n);
      std::set<std::size_t> all(p.order.begin(), p.order.end());
      EXPECT_EQ(all.size(), n);
      EXPECT_EQ(*all.rbegin(), n - 1);
    }
  }
  const auto plain = make_split(9);
  EXPECT_EQ(plain.first()[0], 0u);
  EXPECT_EQ(plain.second()[0], 4u);
  EXPECT_NE(make_split(50, 1).order, make_split(50, 2).order);
  EXPECT_EQ(make_split(50, 1).order, make_split(50, 1).order);
}

TEST(CrossFit, ResidualIdentityAndSize)
{
  const auto d = sample(builtin_scenario("uniform-logistic"), 301, 5);
  const auto cf = crossfit(d, 0.3, WeightFunction());
  ASSERT_EQ(cf.e1.size(), 301u);
  for (std::size_t j = 0; j < d.size(); ++j)
    EXPECT_NEAR((cf.e1[j] - cf.e2[j]) - (cf.r2[j] - cf.r1[j]), 0.0, 1e-12);
  EXPECT_THROW(crossfit(sample(builtin_scenario("uniform-logistic"), 7, 1), 0.3, WeightFunction()),
               ConfigError);
}

TEST(CrossFit, NoiselessQuadraticIsExact)
{
  const auto d = noiseless_quadratic(64);
  // halves are x < 1/2 and x > 1/2, so each fit must reach across
  const auto cf = crossfit(d, 0.6, WeightFunction());
  for (std::size_t j = 0; j < d.size(); ++j) {
    // extrapolating halves are poorly conditioned, hence the looser bound
    EXPECT_NEAR(cf.e1[j], 0.0, 1e-8);
    EXPECT_NEAR(cf.e2[j], 0.0, 1e-8);
  }
}

TEST(LogisticMixture, MassAndDerivative)
{
  const LogisticMixture m({-1.0, 0.0, 2.5}, 1.0 / 3.0, 0.4);
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
    [&](double z) { return m.value(z); }, -40.0, 40.0, 15, 1e-13);
  EXPECT_NEAR(mass, 1.0, 1e-10);
  EXPECT_NEAR(m.total_weight(), 1.0, 1e-15);
  const double h = 1e-5;
  for (double z : {-2.0, -0.1, 0.7, 3.0})
    EXPECT_NEAR(m.derivative(z), (m.value(z + h) - m.value(z - h)) / (2 * h), 1e-7);
  const LogisticKernel kap;
  EXPECT_NEAR(m.value(0.3), (kap.scaled(1.3, 0.4) + kap.scaled(0.3, 0.4) + kap.scaled(-2.2, 0.4)) / 3,
              1e-15);
}

TEST(SplitDensities, PooledEstimateHasUnitMass)
{
  const auto d = sample(builtin_scenario("uniform-logistic"), 200, 3);
  const auto cf = crossfit(d, 0.4, WeightFunction());
  const auto dens = split_density_estimates(cf, 0.5);
  EXPECT_NEAR(dens.f3.total_weight(), 1.0, 1e-14);
  EXPECT_NEAR(dens.f1.total_weight(), 1.0, 1e-14);
  EXPECT_NEAR(dens.f2.total_weight(), 1.0, 1e-14);
}

TEST(Score, SymmetricMixtureVanishesAtZero)
{
  ScoreEstimate s;
  s.density = LogisticMixture({-1.0, -0.2, 0.2, 1.0}, 0.25, 0.3);
  s.a = 0.3;
  s.J = 2.0;
  EXPECT_NEAR(s.score(0.0), 0.0, 1e-15);
  EXPECT_NEAR(s.score(0.6), -s.score(-0.6), 1e-14);
  EXPECT_NEAR(s.lambda(0.6), s.score(0.6) / 2.0 - 0.6, 1e-15);
}

TEST(Score, FisherEstimateThrowsWhenVanishing)
{
  const auto d = noiseless_quadratic(40);
  const auto cf = crossfit(d, 0.6, WeightFunction());
  // all residuals are zero, so the cross-evaluated scores are zero too
  const auto dens = split_density_estimates(cf, 0.5);
  EXPECT_THROW(score_and_fisher(dens, cf, 0.5), NumericalError);
}

TEST(Correction, CenteringAndTablePath)
{
  const auto d = sample(builtin_scenario("uniform-logistic"), 400, 8);
  const auto grid = linspace(-4.0, 5.0, 91);
  EfficiencyConfig cfg;
  const auto res = efficiency_correction(d, grid, cfg);
  EXPECT_LT(res.term.centering_residual, 1e-12);
  EXPECT_GT(res.term.J, 0.0);
  const auto exact = correction(grid, res.cf, res.densities.f3, res.scores, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(res.term.C[i], res.term.C1[i] + res.term.C2[i], 1e-15);
    worst = std::max(worst, std::abs(res.term.C[i] - exact.C[i]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Correction, VanishesForFlatDerivative)
{
  // centered factors of a constant f3' average to zero on each half
  const auto d = sample(builtin_scenario("uniform-logistic"), 100, 2);
  const auto cf = crossfit(d, 0.4, WeightFunction());
  const auto dens = split_density_estimates(cf, 0.5);
  const auto scores = score_and_fisher(dens, cf, 0.5);
  // a wide single-center mixture has f3' nearly constant over the grid
  const LogisticMixture flat({0.0}, 1.0, 1e6);
  const auto grid = linspace(-1.0, 1.0, 5);
  const auto c = correction(grid, cf, flat, scores, 0);
  for (double v : c.C)
    EXPECT_NEAR(v, 0.0, 1e-18);
}

TEST(Correction, EfficientEstimateSubtracts)
{
  const auto d = sample(builtin_scenario("uniform-logistic"), 200, 4);
  const auto grid = linspace(-3.0, 4.0, 15);
  const auto res = efficiency_correction(d, grid);
  DensityEstimate h;
  h.grid = grid;
  h.values.assign(grid.size(), 0.25);
  const auto e = efficient_estimate(h, res.term);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_DOUBLE_EQ(e.values[i], 0.25 - res.term.C[i]);
  EXPECT_EQ(e.method, DensityMethod::EfficientCorrected);
  h.grid[3] += 1e-9;
  EXPECT_THROW(efficient_estimate(h, res.term), ConfigError);
}

TEST(Correction, ShuffledSplitIsDeterministic)
{
  const auto d = sample(builtin_scenario("uniform-logistic"), 120, 6);
  EfficiencyConfig cfg;
  cfg.shuffle_seed = 99;
  const auto grid = linspace(-2.0, 3.0, 11);
  const auto a = efficiency_correction(d, grid, cfg), b = efficiency_correction(d, grid, cfg);
  EXPECT_EQ(a.term.C, b.term.C);
}

TEST(JarqueBera, NormalVersusSkewed)
{
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  std::exponential_distribution<double> ex;
  std::vector<double> a(2000), b(2000);
  for (auto& v : a)
    v = z(gen);
  for (auto& v : b)
    v = ex(gen);
  EXPECT_TRUE(jarque_bera(a).near_normal);
  EXPECT_FALSE(jarque_bera(b).near_normal);
  EXPECT_LT(jarque_bera(b).p_value, 1e-6);
  EXPECT_THROW(jarque_bera(std::vector<double>(3, 1.0)), ConfigError);
}

TEST(SplitDensities, IdenticalResidualsGiveOneLogisticBump)
{
  CrossFit cf;
  cf.plan = make_split(10);
  cf.e1.assign(10, 0.7);
  cf.e2.assign(10, 0.7);
  const double a = 0.3;
  const auto dens = split_density_estimates(cf, a);
  const auto kap = logistic_kernel();
  for (double z : {-2.0, 0.0, 0.7, 1.1, 3.5}) {
    EXPECT_NEAR(dens.f3.value(z), kap.scaled(z - 0.7, a), 1e-15) << z;
    EXPECT_NEAR(dens.f3.derivative(z), kap.scaled_derivative(z - 0.7, a), 1e-14) << z;
  }
}

TEST(Correction, IntegralIsLinear)
{
  const auto d = sample(builtin_scenario("uniform-logistic"), 400, 8);
  const auto grid = linspace(-6.0, 7.0, 801);
  const auto res = efficiency_correction(d, grid);
  DensityEstimate h;
  h.grid = grid;
  for (double y : grid)
    h.values.push_back(std::exp(-0.5 * (y - 0.5) * (y - 0.5)) / std::sqrt(2 * M_PI));
  const auto e = efficient_estimate(h, res.term);
  double intC = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    intC += 0.5 * (grid[i + 1] - grid[i]) * (res.term.C[i] + res.term.C[i + 1]);
  EXPECT_NEAR(e.integral(), h.integral() - intC, 1e-8);
}
