#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>

#include "respdens/error.hpp"
#include "respdens/kernel.hpp"

using namespace respdens;
using boost::multiprecision::cpp_rational;

namespace {

double gk(const std::function<double(double)>& f, double a, double b)
{
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-14);
}

//! int u^j (c0 + c2 u^2)(1 - u^2)^3 du over [-1, 1], exactly.
cpp_rational exact_moment(int j, const cpp_rational& c0, const cpp_rational& c2)
{
  // (c0 + c2 u^2)(1 - 3u^2 + 3u^4 - u^6)
  std::vector<cpp_rational> poly(9, cpp_rational(0));
  const int base[4] = {1, -3, 3, -1};
  for (int i = 0; i < 4; ++i) {
    poly[2 * i] += c0 * base[i];
    poly[2 * i + 2] += c2 * base[i];
  }
  cpp_rational s = 0;
  for (int p = 0; p < 9; ++p) {
    if ((p + j) % 2 == 0)
      s += poly[p] * cpp_rational(2, p + j + 1);
  }
  return s;
}

} // namespace

TEST(ThirdOrderKernel, ExactRationalMoments)
{
  const cpp_rational c0(945, 512), c2(-3465, 512);
  EXPECT_EQ(exact_moment(0, c0, c2), cpp_rational(1));
  EXPECT_EQ(exact_moment(1, c0, c2), cpp_rational(0));
  EXPECT_EQ(exact_moment(2, c0, c2), cpp_rational(0));
  EXPECT_NE(exact_moment(4, c0, c2), cpp_rational(0));
}

TEST(ThirdOrderKernel, CoefficientsSolveMomentSystem)
{
  Eigen::Matrix2d A;
  A << 32.0 / 35.0, 32.0 / 315.0, 32.0 / 315.0, 32.0 / 1155.0;
  const Eigen::Vector2d c = A.fullPivLu().solve(Eigen::Vector2d(1.0, 0.0));
  EXPECT_NEAR(c(0), 945.0 / 512.0, 1e-12);
  EXPECT_NEAR(c(1), -3465.0 / 512.0, 1e-12);
  const Kernel k = make_third_order_kernel();
  for (double u : {-0.9, -0.3, 0.0, 0.2, 0.77}) {
    const double w = 1 - u * u;
    EXPECT_NEAR(k(u), (c(0) + c(1) * u * u) * w * w * w, 1e-12);
  }
}

TEST(ThirdOrderKernel, MomentsByQuadrature)
{
  const Kernel k = make_third_order_kernel();
  EXPECT_NEAR(k.moment(0), 1.0, 1e-10);
  EXPECT_NEAR(k.moment(1), 0.0, 1e-10);
  EXPECT_NEAR(k.moment(2), 0.0, 1e-10);
  // independent Gauss-Kronrod route
  EXPECT_NEAR(gk([&](double u) { return k(u); }, -1, 1), 1.0, 1e-12);
  EXPECT_NEAR(gk([&](double u) { return u * u * k(u); }, -1, 1), 0.0, 1e-12);
  EXPECT_EQ(k.order(), 3);
  EXPECT_GE(k.smoothness(), 2);
  EXPECT_DOUBLE_EQ(k.support_radius(), 1.0);
}

TEST(ThirdOrderKernel, VanishesWithDerivativesAtSupportEnds)
{
  const Kernel k = make_third_order_kernel();
  for (double u : {-1.0, 1.0}) {
    EXPECT_NEAR(k(u), 0.0, 1e-14);
    EXPECT_NEAR(k.derivative(u, 1), 0.0, 1e-12);
    EXPECT_NEAR(k.derivative(u, 2), 0.0, 1e-11);
  }
  for (double u : {-3.0, -1.0001, 1.0001, 7.0})
    EXPECT_EQ(k(u), 0.0);
}

TEST(SelfConvolution, MomentsSupportAndOrder)
{
  const Kernel k = make_third_order_kernel();
  const Kernel K = self_convolve(k);
  EXPECT_DOUBLE_EQ(K.support_radius(), 2.0);
  EXPECT_NEAR(K.moment(0), 1.0, 1e-10);
  EXPECT_NEAR(K.moment(1), 0.0, 1e-10);
  EXPECT_NEAR(K.moment(2), 0.0, 1e-10);
  EXPECT_EQ(K.order(), k.order());
  // moment of a convolution is the convolution of moments
  const double m4 = gk([&](double u) { return std::pow(u, 4) * K(u); }, -2, 2);
  EXPECT_NEAR(m4, 2 * k.moment(4) + 6 * k.moment(2) * k.moment(2), 1e-10);
}

TEST(SelfConvolution, CenterEqualsIntegralOfSquare)
{
  const Kernel k = make_third_order_kernel();
  const Kernel K = self_convolve(k);
  EXPECT_NEAR(K(0.0), gk([&](double u) { return k(u) * k(u); }, -1, 1), 1e-12);
}

TEST(SelfConvolution, BoxGivesTriangle)
{
  const Kernel box = make_box_kernel(0.5);
  const Kernel tri = self_convolve(box);
  EXPECT_DOUBLE_EQ(tri.support_radius(), 1.0);
  for (double t = -1.5; t <= 1.5; t += 0.01)
    EXPECT_NEAR(tri(t), std::max(0.0, 1.0 - std::abs(t)), 1e-12) << t;
}

TEST(SelfConvolution, MatchesNumericalConvolutionOn4096Grid)
{
  const Kernel k = make_third_order_kernel();
  const Kernel K = self_convolve(k);
  // (k*k)(t) = int k(u) k(t - u) du; on the overlap both factors are single
  // polynomials, so composite Simpson with 4096 panels is accurate to rounding.
  const int G = 4096;
  double worst = 0.0;
  for (int i = 0; i < G; ++i) {
    const double t = -2.0 + 4.0 * i / (G - 1);
    const double lo = std::max(-1.0, t - 1.0), hi = std::min(1.0, t + 1.0);
    double num = 0.0;
    if (hi > lo) {
      const int m = 256;
      const double h = (hi - lo) / m;
      for (int j = 0; j <= m; ++j) {
        const double u = lo + j * h;
        const double wgt = (j == 0 || j == m) ? 1 : (j % 2 ? 4 : 2);
        num += wgt * k(u) * k(t - u);
      }
      num *= h / 3;
    }
    worst = std::max(worst, std::abs(num - K(t)));
  }
  EXPECT_LT(worst, 1e-8);
}

//! d-th derivative of one piece's polynomial, ignoring its interval.
double piece_derivative(const KernelPiece& p, double u, int d)
{
  double v = 0.0;
  for (std::size_t i = d; i < p.coeffs.size(); ++i) {
    double f = 1.0;
    for (int j = 0; j < d; ++j)
      f *= static_cast<double>(i - j);
    v += f * p.coeffs[i] * std::pow(u - p.center, static_cast<double>(i - d));
  }
  return v;
}

TEST(SelfConvolution, DerivativesContinuousAtKnots)
{
  const Kernel K = self_convolve(make_third_order_kernel());
  const auto pieces = K.pieces();
  ASSERT_GE(pieces.size(), 2u);
  for (int d = 0; d <= K.smoothness(); ++d) {
    EXPECT_NEAR(piece_derivative(pieces.front(), pieces.front().lo, d), 0.0, 1e-9) << d;
    EXPECT_NEAR(piece_derivative(pieces.back(), pieces.back().hi, d), 0.0, 1e-9) << d;
    for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
      const double knot = pieces[p].hi;
      EXPECT_NEAR(piece_derivative(pieces[p], knot, d), piece_derivative(pieces[p + 1], knot, d),
                  1e-9)
        << "knot " << knot << " derivative " << d;
    }
  }
}

TEST(EvalScaled, Basics)
{
  const Kernel K = self_convolve(make_third_order_kernel());
  for (double t : {-1.9, -0.4, 0.0, 0.3, 1.2})
    EXPECT_DOUBLE_EQ(eval_scaled(K, 1.0, t), K(t));
  const double b = 0.3;
  EXPECT_EQ(eval_scaled(K, b, 2 * b + 1e-9), 0.0);
  EXPECT_EQ(eval_scaled(K, b, -2 * b - 1e-9), 0.0);
  EXPECT_NEAR(gk([&](double t) { return eval_scaled(K, b, t); }, -2 * b, 2 * b), 1.0, 1e-12);
}

TEST(EvalScaled, DerivativeMatchesFiniteDifferences)
{
  const Kernel K = self_convolve(make_third_order_kernel());
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ub(0.05, 1.0), ut(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double b = ub(gen);
    const double t = 2 * b * ut(gen);
    const double h = 1e-5 * b;
    for (int d = 1; d <= 2; ++d) {
      const double fd = (eval_scaled(K, b, t + h, d - 1) - eval_scaled(K, b, t - h, d - 1)) / (2 * h);
      const double an = eval_scaled(K, b, t, d);
      const double scale = std::abs(eval_scaled(K, b, 0.0, 0)) / std::pow(b, d);
      EXPECT_NEAR(fd, an, 1e-6 * std::max(std::abs(an), scale)) << "b " << b << " t " << t;
    }
  }
}

TEST(EvalScaled, RoughKernelRejectsDerivative)
{
  const Kernel box = make_box_kernel();
  EXPECT_THROW(eval_scaled(box, 0.5, 0.1, 1), ConfigError);
  const Kernel k = make_third_order_kernel();
  EXPECT_THROW(eval_scaled(k, 0.5, 0.1, 3), ConfigError);
  EXPECT_THROW(eval_scaled(k, 0.0, 0.1, 0), ConfigError);
}

TEST(Bandwidth, Schedules)
{
  EXPECT_NEAR(bandwidth(10000, {BandwidthRule::Smoother, 1.0, std::nullopt}), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(default_exponent(BandwidthRule::KdeBaseline), -1.0 / 7.0);
  EXPECT_DOUBLE_EQ(default_exponent(BandwidthRule::Convolution), -1.0 / 5.0);
  EXPECT_DOUBLE_EQ(default_exponent(BandwidthRule::Smoother), -1.0 / 4.0);
  EXPECT_DOUBLE_EQ(default_exponent(BandwidthRule::Score), -1.0 / 9.0);
  for (auto rule : {BandwidthRule::KdeBaseline, BandwidthRule::Convolution, BandwidthRule::Smoother,
                    BandwidthRule::Score}) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n = 2; n < 1000000; n *= 3) {
      const double b = bandwidth(n, {rule, 2.5, std::nullopt});
      EXPECT_GT(b, 0.0);
      EXPECT_LT(b, prev);
      prev = b;
    }
  }
}

TEST(Bandwidth, ConvolutionAndScoreRateConditions)
{
  // n b^6 = n^{-1/5} -> 0 and a^8 n = n^{1/9} -> infinity
  const double n1 = 1e3, n2 = 1e6;
  auto b = [](double n) { return bandwidth(static_cast<std::size_t>(n), {BandwidthRule::Convolution, 1.0, std::nullopt}); };
  auto a = [](double n) { return bandwidth(static_cast<std::size_t>(n), {BandwidthRule::Score, 1.0, std::nullopt}); };
  EXPECT_NEAR(n1 * std::pow(b(n1), 6), std::pow(n1, -0.2), 1e-12);
  EXPECT_LT(n2 * std::pow(b(n2), 6), n1 * std::pow(b(n1), 6));
  EXPECT_NEAR(std::pow(a(n2), 8) * n2, std::pow(n2, 1.0 / 9.0), 1e-9);
  EXPECT_GT(std::pow(a(n2), 8) * n2, std::pow(a(n1), 8) * n1);
}

TEST(Bandwidth, InvalidSettings)
{
  EXPECT_THROW(bandwidth(100, {BandwidthRule::Smoother, 0.0, std::nullopt}), ConfigError);
  EXPECT_THROW(bandwidth(100, {BandwidthRule::Smoother, -1.0, std::nullopt}), ConfigError);
  EXPECT_THROW(bandwidth(100, {BandwidthRule::Convolution, 1.0, -0.3}), ConfigError);
  EXPECT_THROW(bandwidth(100, {BandwidthRule::Convolution, 1.0, -1.0 / 6.0}), ConfigError);
  EXPECT_THROW(bandwidth(100, {BandwidthRule::Score, 1.0, -0.125}), ConfigError);
  EXPECT_THROW(bandwidth(100, {BandwidthRule::Score, 1.0, 0.0}), ConfigError);
  EXPECT_NO_THROW(bandwidth(100, {BandwidthRule::Convolution, 1.0, -0.22}));
  EXPECT_NO_THROW(bandwidth(100, {BandwidthRule::Score, 1.0, -0.1}));
  EXPECT_THROW(bandwidth_rule_from_string("wide"), ConfigError);
  EXPECT_EQ(bandwidth_rule_from_string(to_string(BandwidthRule::Score)), BandwidthRule::Score);
}

TEST(LogisticKernel, ClosedFormValues)
{
  const auto kappa = logistic_kernel();
  EXPECT_DOUBLE_EQ(kappa(0.0), 0.25);
  EXPECT_NEAR(kappa.derivative(0.0), 0.0, 1e-16);
  EXPECT_NEAR(gk([&](double x) { return kappa(x); }, -60, 60), 1.0, 1e-12);
  for (double x : {-30.0, -3.0, 0.7, 5.0, 700.0, -800.0}) {
    EXPECT_GE(kappa(x), 0.0);
    EXPECT_DOUBLE_EQ(kappa(x), kappa(-x));
  }
  EXPECT_GT(kappa(30.0), 0.0);
  for (double x : {-4.0, -1.0, 0.3, 2.0}) {
    const double h = 1e-6;
    EXPECT_NEAR(kappa.derivative(x), (kappa(x + h) - kappa(x - h)) / (2 * h), 1e-8);
  }
  EXPECT_NEAR(kappa.scaled(0.2, 0.5), kappa(0.4) / 0.5, 1e-15);
  EXPECT_NEAR(kappa.scaled_derivative(0.2, 0.5), kappa.derivative(0.4) / 0.25, 1e-15);
}
