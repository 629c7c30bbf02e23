#include "respdens/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "respdens/asymptotics.hpp"
#include "respdens/density.hpp"
#include "respdens/efficiency.hpp"
#include "respdens/error.hpp"
#include "respdens/kernel.hpp"
#include "respdens/rng.hpp"
#include "respdens/scenario.hpp"
#include "respdens/smoother.hpp"
#include "respdens/truth.hpp"

namespace respdens {

namespace {

using boost::multiprecision::cpp_rational;

const char* const kFaultKernelMoment2 = "kernel.order3.moment2";

//! Triweight (35/32)(1 - u^2)^3: unit mass, odd moments zero, second
//! moment 1/9. Stands in for a third-order kernel with a broken moment.
Kernel broken_kernel()
{
  const double c = 35.0 / 32.0;
  return Kernel({{-1.0, 1.0, 0.0, {c, 0.0, -3.0 * c, 0.0, 3.0 * c, 0.0, -c}}}, "triweight-fault");
}

struct Suite
{
  std::vector<InvariantResult> results;

  void add(const std::string& name, double tolerance, const std::function<double(std::string&)>& fn)
  {
    InvariantResult r;
    r.name = name;
    r.tolerance = tolerance;
    try {
      r.value = fn(r.detail);
      r.passed = std::isfinite(r.value) && r.value <= tolerance;
    } catch (const std::exception& e) {
      r.passed = false;
      r.value = std::numeric_limits<double>::infinity();
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
};

std::string fmt(double v)
{
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace

std::vector<std::string> injectable_faults()
{
  return {kFaultKernelMoment2};
}

std::vector<InvariantResult> run_invariant_suite(const CheckOptions& options)
{
  if (options.inject_fault) {
    const auto faults = injectable_faults();
    if (std::find(faults.begin(), faults.end(), *options.inject_fault) == faults.end()) {
      std::string known;
      for (const auto& f : faults)
        known += (known.empty() ? "" : ", ") + f;
      throw ConfigError("unknown fault '" + *options.inject_fault + "'; injectable: " + known);
    }
  }
  const bool break_kernel = options.inject_fault == kFaultKernelMoment2;
  const Kernel k = break_kernel ? broken_kernel() : make_third_order_kernel();
  Suite suite;

  suite.add("kernel.order3.mass", 1e-10, [&](std::string& d) {
    d = "int k = " + fmt(k.moment(0));
    return std::abs(k.moment(0) - 1.0);
  });
  suite.add("kernel.order3.moment1", 1e-10, [&](std::string& d) {
    d = "int u k = " + fmt(k.moment(1));
    return std::abs(k.moment(1));
  });
  suite.add("kernel.order3.moment2", 1e-10, [&](std::string& d) {
    d = "int u^2 k = " + fmt(k.moment(2));
    return std::abs(k.moment(2));
  });

  suite.add("kernel.order3.coefficients", 1e-13, [&](std::string& d) {
    // mu_j = int u^j (1 - u^2)^3 over [-1, 1] in exact arithmetic
    const int poly[7] = {1, 0, -3, 0, 3, 0, -1};
    auto mu = [&](int j) {
      cpp_rational s = 0;
      for (int p = 0; p < 7; ++p) {
        if (poly[p] != 0 && (p + j) % 2 == 0)
          s += cpp_rational(2 * poly[p], p + j + 1);
      }
      return s;
    };
    // c0 mu0 + c2 mu2 = 1, c0 mu2 + c2 mu4 = 0
    const cpp_rational det = mu(0) * mu(4) - mu(2) * mu(2);
    const cpp_rational c0 = mu(4) / det;
    const cpp_rational c2 = -mu(2) / det;
    if (c0 != cpp_rational(945, 512) || c2 != cpp_rational(-3465, 512)) {
      d = "rational solution differs from 945/512, -3465/512";
      return 1.0;
    }
    double worst = 0.0;
    const double c0d = static_cast<double>(c0), c2d = static_cast<double>(c2);
    for (int i = 0; i <= 200; ++i) {
      const double u = -1.0 + i / 100.0;
      const double w = 1.0 - u * u;
      worst = std::max(worst, std::abs(k(u) - (c0d + c2d * u * u) * w * w * w));
    }
    d = "c0 = 945/512, c2 = -3465/512 exactly; max |k - closed form| = " + fmt(worst);
    return worst;
  });

  const Kernel K = self_convolve(k);
  suite.add("kernel.convolution.mass", 1e-10, [&](std::string&) { return std::abs(K.moment(0) - 1.0); });
  suite.add("kernel.convolution.moment1", 1e-10, [&](std::string&) { return std::abs(K.moment(1)); });
  suite.add("kernel.convolution.moment2", 1e-10, [&](std::string&) { return std::abs(K.moment(2)); });

  suite.add("smoother.quadratic_exactness", 1e-8, [&](std::string& d) {
    const std::size_t n = 200;
    const double c = bandwidth(n, {BandwidthRule::Smoother, 1.0, std::nullopt});
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 50; ++t) {
      CounterRng rng(options.seed, t, 11);
      const double a0 = 4 * rng.uniform01() - 2, a1 = 4 * rng.uniform01() - 2,
                   a2 = 4 * rng.uniform01() - 2;
      std::vector<double> x(n), y(n);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = rng.uniform01();
        y[j] = a0 + a1 * x[j] + a2 * x[j] * x[j];
      }
      const auto fit = fit_all(x, y, c, WeightFunction());
      for (std::size_t j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(fit.r_hat[j] - y[j]));
    }
    d = "50 random quadratics, n = 200, c = " + fmt(c);
    return worst;
  });

  const Scenario ul = builtin_scenario("uniform-linear");
  const Dataset data = sample(ul, 500, options.seed);
  PipelineConfig pc;
  pc.kernels = KernelPair(k);
  suite.add("density.path_equivalence", 1e-4, [&](std::string& d) {
    pc.path = EstimatorPath::Fft;
    const auto fft = estimate_pipeline(data, pc);
    pc.path = EstimatorPath::Direct;
    pc.grid = fft.h_hat.grid;
    const auto direct = estimate_pipeline(data, pc);
    pc.grid.reset();
    const double rel = sup_distance(fft.h_hat.values, direct.h_hat.values) / direct.h_hat.max_value();
    d = "sup |fft - direct| / max h-hat, uniform-linear n = 500, G = 8192";
    return rel;
  });
  suite.add("density.unit_mass", 1e-6, [&](std::string& d) {
    pc.path = EstimatorPath::Fft;
    const auto est = estimate_pipeline(data, pc);
    d = "int h-hat = " + fmt(est.h_hat.integral());
    return std::abs(est.h_hat.integral() - 1.0);
  });

  const Scenario logi = builtin_scenario("uniform-logistic");
  const Dataset ldata = sample(logi, 400, options.seed + 1);
  suite.add("efficiency.centering", 1e-12, [&](std::string& d) {
    const auto grid = linspace(-3.0, 4.0, 64);
    const auto res = efficiency_correction(ldata, grid);
    d = "J-hat = " + fmt(res.term.J);
    return res.term.centering_residual;
  });
  suite.add("efficiency.residual_identity", 1e-12, [&](std::string&) {
    const auto cf = crossfit(ldata, bandwidth(400, {BandwidthRule::Smoother, 1.0, std::nullopt}),
                             WeightFunction());
    double worst = 0.0;
    for (std::size_t j = 0; j < ldata.size(); ++j)
      worst = std::max(worst, std::abs((cf.e1[j] - cf.e2[j]) - (cf.r2[j] - cf.r1[j])));
    return worst;
  });

  const ScenarioTruth ul_truth(ul);
  suite.add("asymptotics.gamma_symmetry", 1e-10, [&](std::string& d) {
    const std::vector<double> a{0.3, 0.8}, b{0.8, 0.3};
    const auto ga = gamma(ul_truth, a);
    const auto gb = gamma(ul_truth, b);
    const double scale = std::max(std::abs(ga.gamma(0, 1)), 1e-300);
    double asym = std::abs(ga.gamma(0, 1) - gb.gamma(0, 1)) / scale;
    asym = std::max(asym, std::abs(ga.gamma(0, 1) - ga.gamma(1, 0)) / scale);
    const double min_diag = std::min({ga.gamma1(0, 0), ga.gamma2(0, 0), ga.gamma3(0, 0),
                                      ga.gamma1(1, 1), ga.gamma2(1, 1), ga.gamma3(1, 1)});
    d = "Gamma(0.3, 0.8) = " + fmt(ga.gamma(0, 1)) + ", smallest diagonal term " + fmt(min_diag);
    return min_diag < 0.0 ? std::numeric_limits<double>::infinity() : asym;
  });

  suite.add("quadrature.h_mass", 1e-6, [&](std::string&) {
    const auto grid = default_response_grid(ul, 1024);
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      mass += 0.5 * (grid[i + 1] - grid[i]) * (ul_truth.h(grid[i]) + ul_truth.h(grid[i + 1]));
    return std::abs(mass - 1.0);
  });
  suite.add("quadrature.h2_summand_mean", 1e-8, [&](std::string& d) {
    // E q(y - eps) through the error law against h(y) through the covariate
    const double y = 0.0;
    auto [rlo, rhi] = ul_truth.surrogate_range();
    auto psi = [&](double e) { return ul_truth.q(y - e); };
    const double e = ul_truth.expect_error(psi, -kInf, y - rhi) +
                     ul_truth.expect_error(psi, y - rhi, y - rlo) +
                     ul_truth.expect_error(psi, y - rlo, kInf);
    d = "E q(-eps) - h(0) on uniform-linear";
    return std::abs(e - ul_truth.h(y));
  });
  suite.add("quadrature.d_two_routes", 1e-8, [&](std::string&) {
    return std::abs(ul_truth.d(0.8) - ul_truth.d_joint(0.8));
  });
  suite.add("quadrature.influence_mean", 1e-6, [&](std::string& d) {
    const ScenarioTruth lt(logi);
    const auto m = influence_moments(lt, 0.8);
    d = "E I = " + fmt(m.mean_I) + ", E I* = " + fmt(m.mean_I_star);
    return std::max(std::abs(m.mean_I), std::abs(m.mean_I_star));
  });
  return suite.results;
}

std::optional<std::string> first_failure(const std::vector<InvariantResult>& results)
{
  for (const auto& r : results) {
    if (!r.passed)
      return r.name;
  }
  return std::nullopt;
}

Json to_json(const InvariantResult& r)
{
  Json j = {{"name", r.name}, {"passed", r.passed}, {"tolerance", r.tolerance}, {"detail", r.detail}};
  if (std::isfinite(r.value))
    j["value"] = r.value;
  else
    j["value"] = nullptr;
  return j;
}

} // namespace respdens
