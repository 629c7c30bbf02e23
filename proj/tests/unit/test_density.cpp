#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "respdens/density.hpp"
#include "respdens/error.hpp"
#include "respdens/kernel.hpp"
#include "respdens/scenario.hpp"
#include "respdens/truth.hpp"

using namespace respdens;

namespace {

std::vector<double> normals(std::size_t n, unsigned seed, double sd = 1.0)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(n);
  for (auto& e : v)
    e = z(gen);
  return v;
}

} // namespace

TEST(Kde, SinglePointIsScaledKernel)
{
  const Kernel k = make_third_order_kernel();
  const std::vector<double> p{0.3};
  const auto grid = linspace(-1.0, 1.5, 51);
  const auto e = kde(p, 0.4, k, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(e.values[i], k((grid[i] - 0.3) / 0.4) / 0.4, 1e-14);
  EXPECT_EQ(e.n, 1u);
  EXPECT_DOUBLE_EQ(e.bandwidth, 0.4);
}

TEST(Kde, UnitMassAndSymmetry)
{
  const Kernel k = make_third_order_kernel();
  const auto p = normals(200, 1);
  const auto grid = padded_grid(-5.0, 5.0, 0.5, 4001);
  const auto e = kde(p, 0.5, k, grid);
  EXPECT_NEAR(e.integral(), 1.0, 1e-6);
  std::vector<double> neg(p.size());
  for (std::size_t j = 0; j < p.size(); ++j)
    neg[j] = -p[j];
  const auto sym = linspace(-3.0, 3.0, 61);
  const auto a = kde(p, 0.5, k, sym), b = kde(neg, 0.5, k, sym);
  for (std::size_t i = 0; i < sym.size(); ++i)
    EXPECT_NEAR(a.values[i], b.values[sym.size() - 1 - i], 1e-12);
}

TEST(Kde, ThrowsOnBadInput)
{
  const Kernel k = make_third_order_kernel();
  const std::vector<double> p{0.0};
  const auto grid = linspace(-1.0, 1.0, 5);
  EXPECT_THROW(kde(p, 0.0, k, grid), ConfigError);
  EXPECT_THROW(kde(std::vector<double>{}, 0.5, k, grid), ConfigError);
}

TEST(VonMises, ZeroResidualsGiveScaledConvolutionKernel)
{
  const KernelPair kp = KernelPair::third_order();
  const std::vector<double> e(5, 0.0), s(5, 0.0);
  const auto grid = linspace(-1.0, 1.0, 41);
  const auto est = von_mises_direct(e, s, kp.K, 0.3, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(est.values[i], kp.K(grid[i] / 0.3) / 0.3, 1e-13);
}

TEST(VonMises, DirectEqualsConvolutionOfKdes)
{
  // h-hat = f-hat * q-hat, checked by quadrature of the two kernel estimates
  const KernelPair kp = KernelPair::third_order();
  const Kernel& k = kp.k;
  const auto e = normals(30, 2, 0.5);
  std::vector<double> s(30);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u;
  for (auto& v : s)
    v = u(gen);
  const double b = 0.35;
  const auto grid = linspace(-1.5, 2.5, 9);
  const auto direct = von_mises_direct(e, s, kp.K, b, grid);
  auto fhat = [&](double z) {
    double t = 0.0;
    for (double x : e)
      t += k((z - x) / b) / b;
    return t / e.size();
  };
  auto qhat = [&](double z) {
    double t = 0.0;
    for (double x : s)
      t += k((z - x) / b) / b;
    return t / s.size();
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = grid[i];
    // integrate over z in the support of q-hat, split at every kernel knot
    std::vector<double> knots{-b, 1.0 + b};
    for (double x : s) {
      knots.push_back(x - b);
      knots.push_back(x + b);
    }
    for (double x : e) {
      knots.push_back(y - x - b);
      knots.push_back(y - x + b);
    }
    std::sort(knots.begin(), knots.end());
    double conv = 0.0;
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
      // the integrand is a degree-14 polynomial between knots
      if (knots[j + 1] - knots[j] > 1e-14) {
        conv += boost::math::quadrature::gauss<double, 10>::integrate(
          [&](double z) { return fhat(y - z) * qhat(z); }, knots[j], knots[j + 1]);
      }
    }
    EXPECT_NEAR(direct.values[i], conv, 1e-9) << "y " << y;
    EXPECT_NEAR(direct.evaluate_exact(y), direct.values[i], 1e-13);
  }
}

TEST(Fft, AgreesWithDirectAndConvergesInLattice)
{
  const KernelPair kp = KernelPair::third_order();
  const auto e = normals(400, 3);
  std::vector<double> s(400);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u;
  for (auto& v : s)
    v = u(gen);
  const double b = 0.4;
  const auto grid = linspace(-3.5, 4.5, 161);
  const auto direct = von_mises_direct(e, s, kp.K, b, grid);
  const double top = direct.max_value();
  double prev = kInf;
  for (std::size_t G : {1024u, 2048u, 4096u, 8192u}) {
    const auto fft = convolution_fft(e, s, kp.k, b, grid, G);
    const double gap = sup_distance(fft.values, direct.values) / top;
    EXPECT_LT(gap, prev * 0.6) << G; // second-order binning error
    prev = gap;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Fft, ExactEvaluatorIsDirectSum)
{
  const KernelPair kp = KernelPair::third_order();
  const auto e = normals(50, 6), s = normals(50, 7);
  const auto grid = linspace(-4.0, 4.0, 33);
  const auto fft = convolution_fft(e, s, kp.k, 0.5, grid, 2048);
  const auto direct = von_mises_direct(e, s, kp.K, 0.5, grid);
  ASSERT_TRUE(fft.has_exact());
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(fft.evaluate_exact(grid[i]), direct.values[i], 1e-13);
}

TEST(Fft, DeltaConvolutionShiftsKernel)
{
  const KernelPair kp = KernelPair::third_order();
  const std::vector<double> e{0.2}, s{1.0};
  const auto grid = linspace(0.0, 2.4, 25);
  const auto fft = convolution_fft(e, s, kp.k, 0.3, grid, 8192);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(fft.values[i], kp.K((grid[i] - 1.2) / 0.3) / 0.3, 2e-4);
}

TEST(Pipeline, PathsAgreeAndMassIsOne)
{
  const auto d = sample(builtin_scenario("uniform-exp"), 600, 3);
  PipelineConfig pc;
  pc.path = EstimatorPath::Fft;
  const auto fft = estimate_pipeline(d, pc);
  pc.path = EstimatorPath::Direct;
  pc.grid = fft.h_hat.grid;
  const auto direct = estimate_pipeline(d, pc);
  EXPECT_LT(sup_distance(fft.h_hat.values, direct.h_hat.values) / direct.h_hat.max_value(), 1e-4);
  EXPECT_NEAR(fft.h_hat.integral(), 1.0, 1e-6);
  EXPECT_NEAR(direct.h_hat.integral(), 1.0, 1e-6);
  EXPECT_EQ(fft.smoother.r_hat.size(), 600u);
}

TEST(Pipeline, Deterministic)
{
  const auto d = sample(builtin_scenario("uniform-linear"), 300, 9);
  const auto a = estimate_pipeline(d, PipelineConfig());
  const auto b = estimate_pipeline(d, PipelineConfig());
  EXPECT_EQ(a.h_hat.values, b.h_hat.values);
  EXPECT_EQ(a.f_hat.values, b.f_hat.values);
}

TEST(Pipeline, LocationEquivariance)
{
  auto d = sample(builtin_scenario("uniform-linear"), 300, 10);
  PipelineConfig pc;
  pc.path = EstimatorPath::Direct;
  pc.grid = linspace(-3.0, 4.0, 71);
  const auto a = estimate_pipeline(d, pc);
  for (auto& y : d.y)
    y += 2.0;
  pc.grid = linspace(-1.0, 6.0, 71);
  const auto b = estimate_pipeline(d, pc);
  for (std::size_t i = 0; i < 71; ++i)
    EXPECT_NEAR(a.h_hat.values[i], b.h_hat.values[i], 1e-9);
}

TEST(Pipeline, ClampRenormalizes)
{
  const auto d = sample(builtin_scenario("uniform-logistic"), 200, 1);
  PipelineConfig pc;
  pc.clamp = true;
  const auto est = estimate_pipeline(d, pc);
  for (double v : est.h_hat.values)
    EXPECT_GE(v, 0.0);
  EXPECT_NEAR(est.h_hat.integral(), 1.0, 1e-12);
}

TEST(Oracle, MatchesDirectSumOnTrueComponents)
{
  const auto d = sample(builtin_scenario("uniform-exp"), 200, 2);
  const KernelPair kp = KernelPair::third_order();
  const auto grid = linspace(-2.0, 5.0, 29);
  const auto o = oracle_von_mises(d, kp, 0.4, grid);
  const auto ref = von_mises_direct(d.hidden->errors, d.hidden->regression_values, kp.K, 0.4, grid);
  EXPECT_EQ(o.values, ref.values);
  Dataset bare = d;
  bare.hidden.reset();
  EXPECT_THROW(oracle_von_mises(bare, kp, 0.4, grid), ConfigError);
}

TEST(Interpolation, CubicOnGridIsExactForCubics)
{
  DensityEstimate e;
  e.grid = linspace(0.0, 1.0, 21);
  for (double y : e.grid)
    e.values.push_back(1 + y - 2 * y * y + 0.5 * y * y * y);
  for (double y : {0.013, 0.4, 0.77, 0.99})
    EXPECT_NEAR(e(y), 1 + y - 2 * y * y + 0.5 * y * y * y, 1e-13);
  EXPECT_EQ(e(1.5), 0.0);
}

TEST(VonMises, SingleObservationIsOneKernelBump)
{
  const KernelPair kp = KernelPair::third_order();
  const std::vector<double> e{-0.15}, s{0.62};
  const auto grid = linspace(-0.5, 1.5, 41);
  const auto est = von_mises_direct(e, s, kp.K, 0.25, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(est.values[i], kp.K((grid[i] + 0.15 - 0.62) / 0.25) / 0.25, 1e-14);
}

TEST(Pipeline, SmallSampleCalibration)
{
  const Scenario s = builtin_scenario("uniform-linear");
  const auto d = sample(s, 200, 2024);
  PipelineConfig pc;
  pc.path = EstimatorPath::Direct;
  const auto est = estimate_pipeline(d, pc);
  const auto tab = truth(s, est.h_hat.grid);
  EXPECT_LT(sup_distance(est.h_hat.values, tab.h), 0.1);
}
