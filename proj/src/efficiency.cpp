#include "respdens/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "respdens/error.hpp"
#include "respdens/report_io.hpp"
#include "respdens/rng.hpp"

namespace respdens {

namespace {

constexpr double kTailCut = 40.0;
constexpr std::uint64_t kShuffleStream = 7;

} // namespace

SplitPlan make_split(std::size_t n, std::optional<std::uint64_t> shuffle_seed)
{
  SplitPlan plan;
  plan.n = n;
  plan.m = n / 2;
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), 0);
  if (shuffle_seed) {
    CounterRng rng(*shuffle_seed, 0, kShuffleStream);
    // Fisher-Yates with the counter generator, independent of the standard
    // library's distribution implementations
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
      std::swap(plan.order[i - 1], plan.order[std::min(j, i - 1)]);
    }
  }
  return plan;
}

CrossFit crossfit(const Dataset& data, double c, const WeightFunction& w,
                  std::optional<std::uint64_t> shuffle_seed)
{
  const std::size_t n = data.size();
  if (n < 8)
    throw ConfigError("crossfit needs n >= 8, got " + std::to_string(n));
  CrossFit cf;
  cf.plan = make_split(n, shuffle_seed);
  cf.bandwidth = c;
  auto half = [&](std::span<const std::size_t> idx) {
    std::vector<double> x, y;
    for (auto j : idx) {
      x.push_back(data.x[j]);
      y.push_back(data.y[j]);
    }
    return SortedDesign(x, y);
  };
  const SortedDesign d1 = half(cf.plan.first());
  const SortedDesign d2 = half(cf.plan.second());
  cf.r1 = smooth_at(d1, c, w, data.x);
  cf.r2 = smooth_at(d2, c, w, data.x);
  cf.e1.resize(n);
  cf.e2.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    cf.e1[j] = data.y[j] - cf.r1[j];
    cf.e2[j] = data.y[j] - cf.r2[j];
  }
  return cf;
}

LogisticMixture::LogisticMixture(std::vector<double> centers, double weight, double a)
  : LogisticMixture(std::vector<std::pair<std::vector<double>, double>>{{std::move(centers), weight}}, a)
{}

LogisticMixture::LogisticMixture(std::vector<std::pair<std::vector<double>, double>> blocks,
                                 double a)
  : a_(a)
{
  if (!(a > 0.0))
    throw ConfigError("logistic mixture scale must be positive");
  for (auto& [pts, w] : blocks) {
    std::sort(pts.begin(), pts.end());
    blocks_.push_back({std::move(pts), w});
  }
}

double LogisticMixture::value(double z) const
{
  const LogisticKernel kappa;
  double total = 0.0;
  for (const auto& b : blocks_) {
    auto lo = std::lower_bound(b.sorted.begin(), b.sorted.end(), z - kTailCut * a_);
    auto hi = std::upper_bound(lo, b.sorted.end(), z + kTailCut * a_);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it)
      s += kappa((z - *it) / a_);
    total += b.weight * s / a_;
  }
  return total;
}

double LogisticMixture::derivative(double z) const
{
  const LogisticKernel kappa;
  double total = 0.0;
  for (const auto& b : blocks_) {
    auto lo = std::lower_bound(b.sorted.begin(), b.sorted.end(), z - kTailCut * a_);
    auto hi = std::upper_bound(lo, b.sorted.end(), z + kTailCut * a_);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it)
      s += kappa.derivative((z - *it) / a_);
    total += b.weight * s / (a_ * a_);
  }
  return total;
}

double LogisticMixture::total_weight() const
{
  double w = 0.0;
  for (const auto& b : blocks_)
    w += b.weight * static_cast<double>(b.sorted.size());
  return w;
}

double ScoreEstimate::score(double z) const
{
  return -density.derivative(z) / (a + density.value(z));
}

SplitDensities split_density_estimates(const CrossFit& cf, double a)
{
  const auto& plan = cf.plan;
  const double n = static_cast<double>(plan.n);
  std::vector<double> p1, p2, p3a, p3b;
  for (auto j : plan.first()) {
    p1.push_back(cf.e1[j]);
    p3a.push_back(cf.e2[j]);
  }
  for (auto j : plan.second()) {
    p2.push_back(cf.e2[j]);
    p3b.push_back(cf.e1[j]);
  }
  SplitDensities d;
  d.f1 = LogisticMixture(std::move(p1), 1.0 / static_cast<double>(plan.m), a);
  d.f2 = LogisticMixture(std::move(p2), 1.0 / static_cast<double>(plan.n - plan.m), a);
  d.f3 = LogisticMixture({{std::move(p3a), 1.0 / n}, {std::move(p3b), 1.0 / n}}, a);
  return d;
}

ScorePair score_and_fisher(const SplitDensities& dens, const CrossFit& cf, double a)
{
  ScorePair out;
  out.s1 = {1, dens.f1, a, 0.0};
  out.s2 = {2, dens.f2, a, 0.0};
  double sum = 0.0;
  for (auto j : cf.plan.first()) {
    const double l = out.s2.score(cf.e1[j]);
    sum += l * l;
  }
  for (auto j : cf.plan.second()) {
    const double l = out.s1.score(cf.e2[j]);
    sum += l * l;
  }
  out.J = sum / static_cast<double>(cf.plan.n);
  if (!(out.J >= 1e-12)) {
    throw NumericalError("Fisher information estimate " + io::format_double(out.J) +
                         " is below 1e-12; efficiency correction undefined");
  }
  out.s1.J = out.J;
  out.s2.J = out.J;
  return out;
}

DerivativeTable::DerivativeTable(const LogisticMixture& f3, double lo, double hi,
                                 std::size_t points)
  : lo_(lo)
  , hi_(hi)
{
  if (points < 4 || !(hi > lo))
    throw ConfigError("derivative table needs >= 4 points over a nonempty range");
  delta_ = (hi - lo) / static_cast<double>(points - 1);
  values_.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    values_[i] = f3.derivative(lo + delta_ * static_cast<double>(i));
}

double DerivativeTable::operator()(double z) const
{
  const double pos = (z - lo_) / delta_;
  const auto size = static_cast<long>(values_.size());
  if (pos < 0.0 || pos > static_cast<double>(size - 1))
    throw NumericalError("derivative table queried outside its range");
  long m = std::clamp(static_cast<long>(std::floor(pos)), 1L, size - 3);
  const double t = pos - static_cast<double>(m);
  const double p0 = values_[m - 1], p1 = values_[m], p2 = values_[m + 1], p3 = values_[m + 2];
  return p0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + p1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
         p2 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + p3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

void CorrectionTerm::write_csv(const std::string& path) const
{
  const io::Column cols[] = {{"y", grid}, {"C1", C1}, {"C2", C2}, {"C", C}};
  io::write_csv(path, cols);
}

Json CorrectionTerm::sidecar() const
{
  return {{"fisher_information_hat", J},
          {"score_bandwidth", a},
          {"smoother_bandwidth", c},
          {"first_half_size", first_size},
          {"second_half_size", second_size},
          {"centering_residual", centering_residual}};
}

namespace {

//! (1/n) sum_{j in half} (v_j - mean_half v) * w_j, also tracking the
//! centering residual.
double centered_average(const std::vector<double>& v, const std::vector<double>& w, double n,
                        double& residual)
{
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sum = 0.0;
  double check = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double centered = v[j] - mean;
    sum += centered * w[j];
    check += centered;
    scale = std::max(scale, std::abs(v[j]));
  }
  if (scale > 0.0)
    residual = std::max(residual, std::abs(check / static_cast<double>(v.size())) / scale);
  return sum / n;
}

} // namespace

CorrectionTerm correction(std::span<const double> grid, const CrossFit& cf,
                          const LogisticMixture& f3, const ScorePair& scores,
                          std::size_t table_points)
{
  const auto first = cf.plan.first();
  const auto second = cf.plan.second();
  const double n = static_cast<double>(cf.plan.n);

  std::vector<double> lam2(first.size()), lam1(second.size());
  for (std::size_t k = 0; k < first.size(); ++k)
    lam2[k] = scores.s2.lambda(cf.e1[first[k]]);
  for (std::size_t k = 0; k < second.size(); ++k)
    lam1[k] = scores.s1.lambda(cf.e2[second[k]]);

  std::optional<DerivativeTable> table;
  if (table_points > 0 && !grid.empty()) {
    double smin = kInf, smax = -kInf;
    for (auto j : first) {
      smin = std::min(smin, cf.r2[j]);
      smax = std::max(smax, cf.r2[j]);
    }
    for (auto j : second) {
      smin = std::min(smin, cf.r1[j]);
      smax = std::max(smax, cf.r1[j]);
    }
    const double lo = grid.front() - smax;
    const double hi = grid.back() - smin;
    const double pad = 0.01 * (hi - lo) + 1e-9;
    table.emplace(f3, lo - pad, hi + pad, table_points);
  }
  auto deriv = [&](double z) { return table ? (*table)(z) : f3.derivative(z); };

  CorrectionTerm out;
  out.grid.assign(grid.begin(), grid.end());
  out.C1.resize(grid.size());
  out.C2.resize(grid.size());
  out.C.resize(grid.size());
  out.J = scores.J;
  out.a = scores.s1.a;
  out.c = cf.bandwidth;
  out.first_size = first.size();
  out.second_size = second.size();
  std::vector<double> v1(first.size()), v2(second.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = grid[i];
    for (std::size_t k = 0; k < first.size(); ++k)
      v1[k] = deriv(y - cf.r2[first[k]]);
    for (std::size_t k = 0; k < second.size(); ++k)
      v2[k] = deriv(y - cf.r1[second[k]]);
    out.C1[i] = centered_average(v1, lam2, n, out.centering_residual);
    out.C2[i] = centered_average(v2, lam1, n, out.centering_residual);
    out.C[i] = out.C1[i] + out.C2[i];
  }
  return out;
}

DensityEstimate efficient_estimate(const DensityEstimate& h_hat, const CorrectionTerm& C)
{
  if (h_hat.grid != C.grid)
    throw ConfigError("efficient_estimate: estimate and correction grids differ");
  DensityEstimate out = h_hat;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] -= C.C[i];
  out.method = DensityMethod::EfficientCorrected;
  out.metadata["base_method"] = to_string(h_hat.method);
  out.metadata["correction"] = C.sidecar();
  out.exact = nullptr;
  return out;
}

Json EfficiencyConfig::to_json() const
{
  Json j = {{"score_bandwidth", {{"constant", score.constant}, {"exponent", score.exponent()}}},
            {"smoother_bandwidth", {{"constant", smoother.constant}, {"exponent", smoother.exponent()}}},
            {"weight", weight.name()},
            {"derivative_table_points", table_points}};
  j["shuffle_seed"] = shuffle_seed ? Json(*shuffle_seed) : Json(nullptr);
  return j;
}

EfficiencyResult efficiency_correction(const Dataset& data, std::span<const double> grid,
                                       const EfficiencyConfig& config)
{
  const std::size_t n = data.size();
  // each half is fit with the full-sample smoother bandwidth
  const double c = bandwidth(n, config.smoother);
  const double a = bandwidth(n, config.score);
  EfficiencyResult res;
  res.cf = crossfit(data, c, config.weight, config.shuffle_seed);
  res.densities = split_density_estimates(res.cf, a);
  res.scores = score_and_fisher(res.densities, res.cf, a);
  res.term = correction(grid, res.cf, res.densities.f3, res.scores, config.table_points);
  return res;
}

NormalityTest jarque_bera(std::span<const double> values)
{
  const double n = static_cast<double>(values.size());
  if (values.size() < 8)
    throw ConfigError("jarque_bera needs at least 8 values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  NormalityTest t;
  t.statistic = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  t.p_value = std::exp(-0.5 * t.statistic);
  t.near_normal = t.p_value >= 0.05;
  return t;
}

} // namespace respdens
