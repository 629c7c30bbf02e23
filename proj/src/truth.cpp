#include "respdens/truth.hpp"

#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "respdens/error.hpp"

namespace respdens {

namespace {

constexpr int kScanGrid = 2001;

double grid_x(int i)
{
  return static_cast<double>(i) / (kScanGrid - 1);
}

double refine_root(const RegressionFunction& r, double z, double a, double b)
{
  auto fn = [&](double x) { return r.value(x) - z; };
  std::uintmax_t iters = 100;
  auto [lo, hi] = boost::math::tools::toms748_solve(
    fn, a, b, fn(a), fn(b), boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (lo + hi);
}

std::string at_point(const char* what, double y)
{
  std::ostringstream os;
  os.precision(17);
  os << what << " at grid point y = " << y;
  return os.str();
}

} // namespace

ScenarioTruth::ScenarioTruth(Scenario s)
  : scenario_(std::move(s))
{
  r_grid_.resize(kScanGrid);
  double lo = kInf;
  double hi = -kInf;
  for (int i = 0; i < kScanGrid; ++i) {
    r_grid_[i] = scenario_.regression->value(grid_x(i));
    lo = std::min(lo, r_grid_[i]);
    hi = std::max(hi, r_grid_[i]);
  }
  // refine interior extrema, where the grid may miss the true peak
  for (int i = 1; i + 1 < kScanGrid; ++i) {
    const double d0 = scenario_.regression->d1(grid_x(i - 1));
    const double d1 = scenario_.regression->d1(grid_x(i + 1));
    if ((d0 > 0.0) != (d1 > 0.0)) {
      auto fn = [&](double x) { return scenario_.regression->d1(x); };
      std::uintmax_t iters = 100;
      auto [a, b] = boost::math::tools::toms748_solve(
        fn, grid_x(i - 1), grid_x(i + 1), d0, d1,
        boost::math::tools::eps_tolerance<double>(52), iters);
      const double v = scenario_.regression->value(0.5 * (a + b));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  range_ = {lo, hi};
}

std::vector<double> ScenarioTruth::preimages(double z) const
{
  const auto& r = *scenario_.regression;
  std::vector<double> out;
  if (auto inv = r.inverse(z)) {
    if (*inv >= 0.0 && *inv <= 1.0)
      out.push_back(*inv);
    return out;
  }
  for (int i = 0; i + 1 < kScanGrid; ++i) {
    const double a = r_grid_[i] - z;
    const double b = r_grid_[i + 1] - z;
    if (a == 0.0) {
      out.push_back(grid_x(i));
    } else if ((a < 0.0) != (b < 0.0) && b != 0.0) {
      out.push_back(refine_root(r, z, grid_x(i), grid_x(i + 1)));
    }
  }
  if (r_grid_.back() == z)
    out.push_back(1.0);
  return out;
}

double ScenarioTruth::q(double z) const
{
  const auto& r = *scenario_.regression;
  const auto& g = *scenario_.covariate;
  if (auto inv = r.inverse(z)) {
    if (!(*inv >= 0.0 && *inv <= 1.0))
      return 0.0;
    return g.pdf(*inv) / std::abs(r.d1(*inv));
  }
  double sum = 0.0;
  for (double x : preimages(z))
    sum += g.pdf(x) / std::abs(r.d1(x));
  return sum;
}

double ScenarioTruth::Q(double z) const
{
  const auto& r = *scenario_.regression;
  const auto& g = *scenario_.covariate;
  if (z < range_.first)
    return 0.0;
  if (z >= range_.second)
    return 1.0;
  std::vector<double> pts{0.0};
  for (double x : preimages(z))
    pts.push_back(x);
  pts.push_back(1.0);
  std::sort(pts.begin(), pts.end());
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] <= pts[i])
      continue;
    if (r.value(0.5 * (pts[i] + pts[i + 1])) <= z)
      mass += g.cdf(pts[i + 1]) - g.cdf(pts[i]);
  }
  return std::clamp(mass, 0.0, 1.0);
}

double ScenarioTruth::lambda(double e) const
{
  return score(e) / fisher_information() - e;
}

std::vector<double> ScenarioTruth::covariate_breaks(double y) const
{
  std::vector<double> breaks{0.0, 1.0};
  auto [lo, hi] = scenario_.error->support();
  for (double edge : {lo, hi}) {
    if (!std::isfinite(edge))
      continue;
    for (double x : preimages(y - edge)) {
      if (x > 0.0 && x < 1.0)
        breaks.push_back(x);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

double ScenarioTruth::h(double y, int deriv) const
{
  const auto& f = *scenario_.error;
  const auto& r = *scenario_.regression;
  if (deriv == 0)
    return expect_covariate([&](double x) { return f.pdf(y - r.value(x)); }, y);
  return expect_covariate(
    [&](double x) { return f.pdf_derivative(y - r.value(x), deriv); }, y);
}

double ScenarioTruth::d(double y) const
{
  const auto& r = *scenario_.regression;
  if (!r.inverse(0.5 * (range_.first + range_.second)))
    return d_joint(y);
  // q(y - e) is supported on e in [y - max r, y - min r] and may jump at
  // both ends
  auto [slo, shi] = scenario_.error->support();
  const double a = std::max(y - range_.second, slo);
  const double b = std::min(y - range_.first, shi);
  if (!(b > a))
    return 0.0;
  return expect_error([&](double e) { return q(y - e) * e; }, a, b);
}

double ScenarioTruth::d_joint(double y) const
{
  const auto& f = *scenario_.error;
  const auto& r = *scenario_.regression;
  return expect_covariate(
    [&](double x) {
      const double e = y - r.value(x);
      return e * f.pdf(e);
    },
    y);
}

double ScenarioTruth::fisher_information_quadrature() const
{
  return expect_error([&](double e) {
    const double l = score(e);
    return std::isfinite(l) ? l * l : 0.0;
  });
}

double ScenarioTruth::variance_quadrature() const
{
  if (!std::isfinite(variance()))
    return kInf;
  return expect_error([](double e) { return e * e; });
}

std::vector<double> linspace(double lo, double hi, std::size_t points)
{
  if (points < 2 || !(hi > lo))
    throw ConfigError("linspace needs at least two points and hi > lo");
  std::vector<double> out(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<double> default_response_grid(const Scenario& s, std::size_t points)
{
  ScenarioTruth t(s);
  auto [lo, hi] = t.surrogate_range();
  return linspace(lo + s.error->quantile(1e-10), hi + s.error->quantile(1.0 - 1e-10), points);
}

TruthTables truth(const Scenario& s, std::span<const double> grid)
{
  return truth(std::make_shared<const ScenarioTruth>(s), grid);
}

TruthTables truth(std::shared_ptr<const ScenarioTruth> oracle, std::span<const double> grid)
{
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("truth grid must be strictly increasing");
  }
  TruthTables t;
  t.grid.assign(grid.begin(), grid.end());
  const std::size_t n = grid.size();
  t.h.resize(n);
  t.h1.resize(n);
  t.h2.resize(n);
  t.h3.resize(n);
  t.q.resize(n);
  t.Q.resize(n);
  t.score.resize(n);
  t.lambda.resize(n);
  t.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = grid[i];
    try {
      t.h[i] = oracle->h(y, 0);
      t.h1[i] = oracle->h(y, 1);
      t.h2[i] = oracle->h(y, 2);
      t.h3[i] = oracle->h(y, 3);
      t.d[i] = oracle->d(y);
    } catch (const NumericalError& e) {
      throw NumericalError(at_point("truth tables", y) + ": " + e.what());
    }
    t.q[i] = oracle->q(y);
    t.Q[i] = oracle->Q(y);
    t.score[i] = oracle->score(y);
    t.lambda[i] = oracle->lambda(y);
  }
  t.fisher_information = oracle->fisher_information_quadrature();
  t.variance = oracle->variance_quadrature();
  t.oracle = std::move(oracle);
  return t;
}

} // namespace respdens
