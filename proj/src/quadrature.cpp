#include "respdens/quadrature.hpp"

#include <numbers>

namespace respdens::quad {

namespace {

GaussRule compute_rule()
{
  GaussRule rule{};
  constexpr int n = static_cast<int>(kGaussPoints);
  for (int i = 0; i < n / 2; ++i) {
    // Tricomi initial guess for the i-th root, refined by Newton steps.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

} // namespace

const GaussRule& gauss_legendre_rule()
{
  static const GaussRule rule = compute_rule();
  return rule;
}

} // namespace respdens::quad
