#include "respdens/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "respdens/error.hpp"
#include "respdens/report_io.hpp"

namespace respdens {

namespace {

std::vector<double> differentiate(const std::vector<double>& c)
{
  if (c.size() <= 1)
    return {0.0};
  std::vector<double> out(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i)
    out[i - 1] = c[i] * static_cast<double>(i);
  return out;
}

double horner(const std::vector<double>& c, double u)
{
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it)
    v = v * u + *it;
  return v;
}

std::vector<double> default_weight_coeffs()
{
  // (1 - u^2)^4 = 1 - 4u^2 + 6u^4 - 4u^6 + u^8
  const double s = 315.0 / 256.0;
  return {s, 0.0, -4.0 * s, 0.0, 6.0 * s, 0.0, -4.0 * s, 0.0, s};
}

} // namespace

WeightFunction::WeightFunction()
  : WeightFunction(default_weight_coeffs(), "quartic-biweight")
{}

WeightFunction::WeightFunction(std::vector<double> coeffs, std::string name)
  : name_(std::move(name))
{
  derivs_.push_back(std::move(coeffs));
  for (int d = 1; d <= 4; ++d)
    derivs_.push_back(differentiate(derivs_.back()));
}

double WeightFunction::derivative(double u, int d) const
{
  if (u < -1.0 || u > 1.0 || d < 0 || d >= static_cast<int>(derivs_.size()))
    return 0.0;
  return horner(derivs_[d], u);
}

std::size_t SmootherFit::pseudo_inverse_count() const
{
  std::size_t n = 0;
  for (const auto& f : sample_fits)
    n += f.used_pseudo_inverse ? 1 : 0;
  for (const auto& f : grid_fits)
    n += f.used_pseudo_inverse ? 1 : 0;
  return n;
}

void SmootherFit::write_csv(const std::string& path, const RegressionFunction* r) const
{
  std::vector<double> truth;
  std::vector<double> flag(sample_fits.size());
  for (std::size_t j = 0; j < sample_fits.size(); ++j)
    flag[j] = sample_fits[j].used_pseudo_inverse ? 1.0 : 0.0;
  std::vector<io::Column> cols{{"x", x}};
  if (r != nullptr) {
    truth.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      truth[j] = r->value(x[j]);
    cols.push_back({"r_true", truth});
  }
  cols.push_back({"r_hat", r_hat});
  cols.push_back({"residual", residuals});
  cols.push_back({"pseudo_inverse_flag", flag});
  io::write_csv(path, cols);
}

Eigen::Vector3d pseudo_inverse_solve(const Eigen::Matrix3d& m, const Eigen::Vector3d& v,
                                     double cutoff)
{
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m);
  const auto& vals = eig.eigenvalues();
  const double top = vals.cwiseAbs().maxCoeff();
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  if (!(top > 0.0))
    return out;
  for (int k = 0; k < 3; ++k) {
    if (vals[k] > cutoff * top) {
      const Eigen::Vector3d e = eig.eigenvectors().col(k);
      out += e * (e.dot(v) / vals[k]);
    }
  }
  return out;
}

SortedDesign::SortedDesign(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size())
    throw ConfigError("smoother design: x and y differ in length");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  xs_.reserve(x.size());
  ys_.reserve(x.size());
  for (auto k : order) {
    xs_.push_back(x[k]);
    ys_.push_back(y[k]);
  }
}

std::pair<std::size_t, std::size_t> SortedDesign::window(double x, double c) const
{
  auto lo = std::lower_bound(xs_.begin(), xs_.end(), x - c);
  auto hi = std::upper_bound(lo, xs_.end(), x + c);
  return {static_cast<std::size_t>(lo - xs_.begin()),
          static_cast<std::size_t>(hi - xs_.begin())};
}

LocalFit fit_at(const SortedDesign& design, double c, const WeightFunction& w, double x)
{
  if (!(c > 0.0))
    throw ConfigError("smoother bandwidth must be positive");
  const auto [first, last] = design.window(x, c);
  // power sums of u weighted by w, and by w * Y
  double s[5] = {0, 0, 0, 0, 0};
  double t[3] = {0, 0, 0};
  std::size_t used = 0;
  for (std::size_t k = first; k < last; ++k) {
    const double u = (design.x(k) - x) / c;
    const double wk = w(u);
    if (wk <= 0.0)
      continue;
    ++used;
    const double u2 = u * u;
    s[0] += wk;
    s[1] += wk * u;
    s[2] += wk * u2;
    s[3] += wk * u2 * u;
    s[4] += wk * u2 * u2;
    const double wy = wk * design.y(k);
    t[0] += wy;
    t[1] += wy * u;
    t[2] += wy * u2;
  }
  if (used == 0)
    throw DegenerateWindow(x);
  const double scale = 1.0 / (static_cast<double>(design.size()) * c);
  LocalFit fit;
  fit.x = x;
  fit.window_size = used;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j)
      fit.gram(i, j) = s[i + j] * scale;
    fit.rhs[i] = t[i] * scale;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(fit.gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  fit.condition_number = lmin > 0.0 ? lmax / lmin : kInf;
  if (!(fit.condition_number <= kConditionTrigger)) {
    fit.used_pseudo_inverse = true;
    fit.beta_hat = pseudo_inverse_solve(fit.gram, fit.rhs);
  } else {
    fit.beta_hat = fit.gram.ldlt().solve(fit.rhs);
  }
  return fit;
}

LocalFit fit_at(const Dataset& data, double c, const WeightFunction& w, double x)
{
  return fit_at(SortedDesign(data.x, data.y), c, w, x);
}

std::vector<double> smooth_at(const SortedDesign& design, double c, const WeightFunction& w,
                              std::span<const double> points)
{
  std::vector<double> out(points.size());
  std::vector<double> failed;
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      out[i] = fit_at(design, c, w, points[i]).beta_hat[0];
    } catch (const DegenerateWindow&) {
      failed.push_back(points[i]);
    }
  }
  if (!failed.empty())
    throw DegenerateWindow(std::move(failed));
  return out;
}

SmootherFit fit_all(std::span<const double> x, std::span<const double> y, double c,
                    const WeightFunction& w, std::span<const double> grid)
{
  const SortedDesign design(x, y);
  SmootherFit fit;
  fit.bandwidth = c;
  fit.x.assign(x.begin(), x.end());
  fit.grid.assign(grid.begin(), grid.end());
  fit.r_hat.resize(x.size());
  fit.residuals.resize(x.size());
  fit.sample_fits.reserve(x.size());
  fit.grid_fits.reserve(grid.size());
  std::vector<double> failed;
  for (std::size_t j = 0; j < x.size(); ++j) {
    try {
      fit.sample_fits.push_back(fit_at(design, c, w, x[j]));
      fit.r_hat[j] = fit.sample_fits.back().beta_hat[0];
      fit.residuals[j] = y[j] - fit.r_hat[j];
    } catch (const DegenerateWindow&) {
      // cannot happen for a sample point with w(0) > 0, kept for custom w
      failed.push_back(x[j]);
    }
  }
  for (double g : grid) {
    try {
      fit.grid_fits.push_back(fit_at(design, c, w, g));
      fit.r_hat_grid.push_back(fit.grid_fits.back().beta_hat[0]);
    } catch (const DegenerateWindow&) {
      failed.push_back(g);
    }
  }
  if (!failed.empty())
    throw DegenerateWindow(std::move(failed));
  return fit;
}

SmootherFit fit_all(const Dataset& data, double c, const WeightFunction& w,
                    std::span<const double> grid)
{
  return fit_all(data.x, data.y, c, w, grid);
}

} // namespace respdens
