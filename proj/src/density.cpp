#include "respdens/density.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "respdens/error.hpp"
#include "respdens/report_io.hpp"
#include "respdens/truth.hpp"

namespace respdens {

namespace {

void require_grid(std::span<const double> grid)
{
  if (grid.empty())
    throw ConfigError("evaluation grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("evaluation grid must be strictly increasing");
  }
}

std::shared_ptr<const std::vector<double>> sorted_copy(std::span<const double> v)
{
  auto out = std::make_shared<std::vector<double>>(v.begin(), v.end());
  std::sort(out->begin(), out->end());
  return out;
}

//! (1/n) sum_j k_b(y - p_j) over sorted points.
double kde_sum(const std::vector<double>& sorted, const Kernel& k, double b, double y)
{
  const double reach = k.support_radius() * b;
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), y - reach);
  auto hi = std::upper_bound(lo, sorted.end(), y + reach);
  double sum = 0.0;
  for (auto it = lo; it != hi; ++it)
    sum += k((y - *it) / b);
  return sum / (b * static_cast<double>(sorted.size()));
}

//! (1/n^2) sum_i sum_j K_b(y - e_i - s_j) with s sorted.
double von_mises_sum(const std::vector<double>& e, const std::vector<double>& s_sorted,
                     const Kernel& K, double b, double y)
{
  const double reach = K.support_radius() * b;
  double sum = 0.0;
  for (double ei : e) {
    const double t = y - ei;
    auto lo = std::lower_bound(s_sorted.begin(), s_sorted.end(), t - reach);
    auto hi = std::upper_bound(lo, s_sorted.end(), t + reach);
    for (auto it = lo; it != hi; ++it)
      sum += K((t - *it) / b);
  }
  const double n2 = static_cast<double>(e.size()) * static_cast<double>(s_sorted.size());
  return sum / (b * n2);
}

double lagrange4(const double* xs, const double* ys, double x)
{
  double out = 0.0;
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j != i)
        w *= (x - xs[j]) / (xs[i] - xs[j]);
    }
    out += w * ys[i];
  }
  return out;
}

//! Cubic interpolation on a uniform lattice lo + m delta, zero beyond it.
double lattice_cubic(const std::vector<double>& v, double lo, double delta, double y)
{
  const double pos = (y - lo) / delta;
  const auto size = static_cast<long>(v.size());
  if (pos < 0.0 || pos > static_cast<double>(size - 1))
    return 0.0;
  const long m = std::min(static_cast<long>(std::floor(pos)), size - 2);
  const double t = pos - static_cast<double>(m);
  auto at = [&](long i) { return (i < 0 || i >= size) ? 0.0 : v[static_cast<std::size_t>(i)]; };
  const double p0 = at(m - 1), p1 = at(m), p2 = at(m + 1), p3 = at(m + 2);
  // Lagrange basis on nodes -1, 0, 1, 2
  return p0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + p1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
         p2 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + p3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

bool is_power_of_two(std::size_t g)
{
  return g != 0 && (g & (g - 1)) == 0;
}

std::size_t next_power_of_two(std::size_t n)
{
  std::size_t p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

void linear_bin(std::span<const double> values, double lo, double delta, std::vector<double>& bins)
{
  const double w = 1.0 / static_cast<double>(values.size());
  for (double v : values) {
    const double pos = (v - lo) / delta;
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    bins.at(i) += (1.0 - frac) * w;
    bins.at(i + 1) += frac * w;
  }
}

} // namespace

std::string to_string(DensityMethod m)
{
  switch (m) {
    case DensityMethod::BaselineKde: return "baseline-kde";
    case DensityMethod::ResidualKde: return "residual-kde";
    case DensityMethod::SurrogateKde: return "surrogate-kde";
    case DensityMethod::VonMisesDirect: return "von-mises-direct";
    case DensityMethod::ConvolutionFft: return "convolution-fft";
    case DensityMethod::OracleVonMises: return "oracle-von-mises";
    case DensityMethod::EfficientCorrected: return "efficient-corrected";
  }
  return "unknown";
}

double DensityEstimate::operator()(double y) const
{
  const std::size_t size = grid.size();
  if (size == 0 || y < grid.front() || y > grid.back())
    return 0.0;
  if (size < 4) {
    // linear between neighbours
    auto it = std::upper_bound(grid.begin(), grid.end(), y);
    if (it == grid.end())
      return values.back();
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    if (i == 0)
      return values.front();
    const double t = (y - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1.0 - t) * values[i - 1] + t * values[i];
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), y);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  // nodes i-2 .. i+1 bracket y in the middle interval when possible
  std::size_t start = i >= 2 ? i - 2 : 0;
  start = std::min(start, size - 4);
  return lagrange4(&grid[start], &values[start], y);
}

double DensityEstimate::evaluate_exact(double y) const
{
  if (!exact)
    throw ConfigError("estimate '" + to_string(method) + "' carries no exact evaluator");
  return exact(y);
}

double DensityEstimate::integral() const
{
  double sum = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    sum += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  return sum;
}

double DensityEstimate::max_value() const
{
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

void DensityEstimate::write_csv(const std::string& path) const
{
  const io::Column cols[] = {{"y", grid}, {"value", values}};
  io::write_csv(path, cols);
}

Json DensityEstimate::to_json() const
{
  return {{"method", to_string(method)},
          {"bandwidth", bandwidth},
          {"n", n},
          {"integral", integral()},
          {"metadata", metadata},
          {"grid", grid},
          {"values", values}};
}

double sup_distance(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size())
    throw ConfigError("sup_distance: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

DensityEstimate kde(std::span<const double> points, double b, const Kernel& k,
                    std::span<const double> grid, DensityMethod tag)
{
  if (points.empty())
    throw ConfigError("kde: no data points");
  if (!(b > 0.0))
    throw ConfigError("kde: bandwidth must be positive");
  require_grid(grid);
  auto sorted = sorted_copy(points);
  DensityEstimate e;
  e.grid.assign(grid.begin(), grid.end());
  e.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    e.values[i] = kde_sum(*sorted, k, b, grid[i]);
  e.bandwidth = b;
  e.method = tag;
  e.n = points.size();
  e.metadata = {{"kernel", k.name()}};
  e.exact = [sorted, k, b](double y) { return kde_sum(*sorted, k, b, y); };
  return e;
}

DensityEstimate von_mises_direct(std::span<const double> residuals,
                                 std::span<const double> surrogates, const Kernel& K, double b,
                                 std::span<const double> grid)
{
  if (residuals.size() != surrogates.size())
    throw ConfigError("von_mises_direct: residuals and surrogates differ in length");
  if (residuals.empty())
    throw ConfigError("von_mises_direct: no data");
  if (!(b > 0.0))
    throw ConfigError("von_mises_direct: bandwidth must be positive");
  require_grid(grid);
  auto e_vals = std::make_shared<const std::vector<double>>(residuals.begin(), residuals.end());
  auto s_sorted = sorted_copy(surrogates);
  DensityEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.values[i] = von_mises_sum(*e_vals, *s_sorted, K, b, grid[i]);
  out.bandwidth = b;
  out.method = DensityMethod::VonMisesDirect;
  out.n = residuals.size();
  out.metadata = {{"kernel", K.name()}};
  out.exact = [e_vals, s_sorted, K, b](double y) { return von_mises_sum(*e_vals, *s_sorted, K, b, y); };
  return out;
}

FftRange default_fft_range(std::span<const double> residuals, std::span<const double> surrogates,
                           const Kernel& k, double b)
{
  const auto [emin, emax] = std::minmax_element(residuals.begin(), residuals.end());
  const auto [smin, smax] = std::minmax_element(surrogates.begin(), surrogates.end());
  const double lo = *emin + *smin - 2.0 * k.support_radius() * b;
  const double hi = *emax + *smax + 2.0 * k.support_radius() * b;
  const double margin = 0.01 * (hi - lo);
  return {lo - margin, hi + margin};
}

DensityEstimate convolution_fft(std::span<const double> residuals,
                                std::span<const double> surrogates, const Kernel& k, double b,
                                std::span<const double> grid, std::size_t grid_size,
                                std::optional<FftRange> range)
{
  if (residuals.size() != surrogates.size())
    throw ConfigError("convolution_fft: residuals and surrogates differ in length");
  if (residuals.empty())
    throw ConfigError("convolution_fft: no data");
  if (!(b > 0.0))
    throw ConfigError("convolution_fft: bandwidth must be positive");
  if (!is_power_of_two(grid_size) || grid_size < 1024)
    throw ConfigError("convolution_fft: grid size must be a power of two >= 1024, got " +
                      std::to_string(grid_size));
  require_grid(grid);

  const FftRange r = range ? *range : default_fft_range(residuals, surrogates, k, b);
  if (!(r.hi > r.lo))
    throw ConfigError("convolution_fft: empty range");
  const double delta = (r.hi - r.lo) / static_cast<double>(grid_size - 1);
  const auto [emin, emax] = std::minmax_element(residuals.begin(), residuals.end());
  const auto [smin, smax] = std::minmax_element(surrogates.begin(), surrogates.end());
  const long mk = static_cast<long>(std::ceil(k.support_radius() * b / delta));
  const double reach = static_cast<double>(2 * mk + 2) * delta;
  const double need_lo = *emin + *smin - reach;
  const double need_hi = *emax + *smax + reach;
  if (r.lo > need_lo || r.hi < need_hi) {
    std::ostringstream os;
    os.precision(6);
    os << "convolution_fft: range [" << r.lo << ", " << r.hi
       << "] does not cover data plus kernel support [" << need_lo << ", " << need_hi
       << "]; short by " << std::max(0.0, r.lo - need_lo) << " below and "
       << std::max(0.0, need_hi - r.hi) << " above";
    throw ConfigError(os.str());
  }

  // lattices: residuals from e_lo, surrogates from s_lo, aligned so that
  // index m of the product sits at r.lo + m delta
  const double e_lo = *emin - delta;
  const double s_lo = r.lo - e_lo + static_cast<double>(2 * mk) * delta;
  const auto ne = static_cast<std::size_t>(std::floor((*emax - e_lo) / delta)) + 2;
  const auto ns = static_cast<std::size_t>(std::floor((*smax - s_lo) / delta)) + 2;
  const std::size_t nk = static_cast<std::size_t>(2 * mk + 1);
  const std::size_t total = ne + ns + 2 * nk;
  const std::size_t p = next_power_of_two(std::max(total, grid_size));

  std::vector<double> ce(p, 0.0), cs(p, 0.0), kb(p, 0.0);
  linear_bin(residuals, e_lo, delta, ce);
  linear_bin(surrogates, s_lo, delta, cs);
  for (std::size_t m = 0; m < nk; ++m)
    kb[m] = k((static_cast<double>(m) - static_cast<double>(mk)) * delta / b) / b;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fe, fs, fk;
  fft.fwd(fe, ce);
  fft.fwd(fs, cs);
  fft.fwd(fk, kb);
  std::vector<std::complex<double>> prod(p);
  // f-hat(lattice) = ce * kb, q-hat(lattice) = cs * kb, h = delta f * q
  for (std::size_t i = 0; i < p; ++i)
    prod[i] = delta * fe[i] * fk[i] * fs[i] * fk[i];
  std::vector<double> lattice;
  fft.inv(lattice, prod);
  lattice.resize(grid_size);

  DensityEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.values[i] = lattice_cubic(lattice, r.lo, delta, grid[i]);
  out.bandwidth = b;
  out.method = DensityMethod::ConvolutionFft;
  out.n = residuals.size();
  out.metadata = {{"kernel", k.name()},
                  {"fft_grid_size", grid_size},
                  {"fft_transform_size", p},
                  {"range", {r.lo, r.hi}},
                  {"lattice_spacing", delta}};
  auto e_vals = std::make_shared<const std::vector<double>>(residuals.begin(), residuals.end());
  auto s_sorted = sorted_copy(surrogates);
  Kernel K = self_convolve(k);
  out.exact = [e_vals, s_sorted, K, b](double y) { return von_mises_sum(*e_vals, *s_sorted, K, b, y); };
  return out;
}

std::string to_string(EstimatorPath p)
{
  return p == EstimatorPath::Direct ? "direct" : "fft";
}

EstimatorPath estimator_path_from_string(const std::string& s)
{
  if (s == "direct")
    return EstimatorPath::Direct;
  if (s == "fft")
    return EstimatorPath::Fft;
  throw ConfigError("unknown estimator path '" + s + "' (expected direct or fft)");
}

KernelPair::KernelPair(Kernel base)
  : k(std::move(base))
  , K(self_convolve(k))
{}

KernelPair KernelPair::third_order()
{
  static const KernelPair pair(make_third_order_kernel());
  return pair;
}

DensityEstimate convolution_estimate(std::span<const double> residuals,
                                     std::span<const double> surrogates,
                                     const KernelPair& kernels, double b,
                                     std::span<const double> grid, EstimatorPath path,
                                     std::size_t grid_size)
{
  if (path == EstimatorPath::Direct)
    return von_mises_direct(residuals, surrogates, kernels.K, b, grid);
  return convolution_fft(residuals, surrogates, kernels.k, b, grid, grid_size);
}

DensityEstimate oracle_von_mises(const Dataset& data, const KernelPair& kernels, double b,
                                 std::span<const double> grid, EstimatorPath path,
                                 std::size_t grid_size)
{
  const auto& hidden = data.require_hidden("oracle_von_mises");
  DensityEstimate out = convolution_estimate(hidden.errors, hidden.regression_values, kernels, b,
                                             grid, path, grid_size);
  out.metadata["path"] = to_string(path);
  out.method = DensityMethod::OracleVonMises;
  return out;
}

std::vector<double> padded_grid(double lo, double hi, double b, std::size_t points)
{
  return linspace(lo - 3.0 * b, hi + 3.0 * b, points);
}

DensityEstimate clamp_and_renormalize(const DensityEstimate& e)
{
  DensityEstimate out = e;
  for (auto& v : out.values)
    v = std::max(v, 0.0);
  const double mass = out.integral();
  if (!(mass > 0.0))
    throw NumericalError("clamp_and_renormalize: estimate has no positive mass");
  for (auto& v : out.values)
    v /= mass;
  out.metadata["clamped"] = true;
  out.exact = nullptr;
  return out;
}

Json PipelineConfig::to_json() const
{
  auto schedule = [](const BandwidthSchedule& s) {
    return Json{{"rule", to_string(s.rule)}, {"constant", s.constant}, {"exponent", s.exponent()}};
  };
  return {{"kernel", kernels.k.name()},
          {"convolution_bandwidth", schedule(convolution)},
          {"smoother_bandwidth", schedule(smoother)},
          {"weight", weight.name()},
          {"path", to_string(path)},
          {"fft_size", fft_size},
          {"grid_points", grid_points},
          {"clamp", clamp}};
}

PipelineResult estimate_pipeline(const Dataset& data, const PipelineConfig& config)
{
  const std::size_t n = data.size();
  if (n < 2)
    throw ConfigError("estimate_pipeline: need at least two observations");
  const double c = bandwidth(n, config.smoother);
  const double b = bandwidth(n, config.convolution);
  PipelineResult res{fit_all(data, c, config.weight), {}, {}, {}, {}};
  const auto& eps = res.smoother.residuals;
  const auto& sur = res.smoother.r_hat;
  const auto [emin, emax] = std::minmax_element(eps.begin(), eps.end());
  const auto [smin, smax] = std::minmax_element(sur.begin(), sur.end());
  const double R = config.kernels.k.support_radius();

  const auto f_grid = padded_grid(*emin, *emax, R * b, config.grid_points);
  const auto q_grid = padded_grid(*smin, *smax, R * b, config.grid_points);
  const auto h_grid = config.grid ? *config.grid
                                  : padded_grid(*emin + *smin, *emax + *smax, R * b,
                                                config.grid_points);
  res.f_hat = kde(eps, b, config.kernels.k, f_grid, DensityMethod::ResidualKde);
  res.q_hat = kde(sur, b, config.kernels.k, q_grid, DensityMethod::SurrogateKde);
  res.h_hat = convolution_estimate(eps, sur, config.kernels, b, h_grid, config.path,
                                   config.fft_size);
  if (config.clamp)
    res.h_hat = clamp_and_renormalize(res.h_hat);
  res.provenance = {{"seed", data.seed},
                    {"scenario", data.scenario},
                    {"n", n},
                    {"smoother_bandwidth", c},
                    {"convolution_bandwidth", b},
                    {"pseudo_inverse_fits", res.smoother.pseudo_inverse_count()},
                    {"config", config.to_json()}};
  res.h_hat.metadata["provenance"] = res.provenance;
  return res;
}

} // namespace respdens
