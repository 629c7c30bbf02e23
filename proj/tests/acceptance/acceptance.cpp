//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. `--only 1,2,3` restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "respdens/asymptotics.hpp"
#include "respdens/density.hpp"
#include "respdens/efficiency.hpp"
#include "respdens/kernel.hpp"
#include "respdens/parallel.hpp"
#include "respdens/rates.hpp"
#include "respdens/rng.hpp"
#include "respdens/scenario.hpp"
#include "respdens/smoother.hpp"
#include "respdens/truth.hpp"

using namespace respdens;
using boost::multiprecision::cpp_rational;

namespace {

using Clock = std::chrono::steady_clock;

struct Context
{
  std::uint64_t seed = 20240601;
  std::size_t workers = 1;
  //! criterion 4's uniform-linear convolution slope, reused by criterion 9
  std::optional<double> ul_convolution_slope;
  Json report = Json::object();
};

struct Outcome
{
  bool pass = false;
  std::string summary;
  Json detail = Json::object();
};

std::string num(double v, int prec = 4)
{
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool strictly_decreasing(const std::vector<double>& v)
{
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1]))
      return false;
  }
  return true;
}

std::string join(const std::vector<double>& v)
{
  std::string s;
  for (double x : v)
    s += (s.empty() ? "" : " > ") + num(x);
  return s;
}

HarnessConfig harness(const Context& ctx)
{
  HarnessConfig hc;
  hc.seed = ctx.seed;
  hc.workers = ctx.workers;
  hc.pipeline.path = EstimatorPath::Fft;
  return hc;
}

const std::vector<std::size_t> kRateLadder{500, 1000, 2000, 4000, 8000};
const std::vector<std::size_t> kLadder{1000, 2000, 4000, 8000};

// ---------------------------------------------------------------------------

Outcome kernel_correctness(Context&)
{
  const auto t0 = Clock::now();
  const Kernel k = make_third_order_kernel();
  const Kernel K = self_convolve(k);
  double worst = 0.0;
  for (const Kernel* ker : {&k, &K}) {
    worst = std::max(worst, std::abs(ker->moment(0) - 1.0));
    worst = std::max(worst, std::abs(ker->moment(1)));
    worst = std::max(worst, std::abs(ker->moment(2)));
  }
  // c0 m0 + c2 m2 = 1 and c0 m2 + c2 m4 = 0, m_j = int u^j (1 - u^2)^3
  auto m = [](int j) {
    const int poly[7] = {1, 0, -3, 0, 3, 0, -1};
    cpp_rational s = 0;
    for (int p = 0; p < 7; ++p)
      if (poly[p] != 0 && (p + j) % 2 == 0)
        s += cpp_rational(2 * poly[p], p + j + 1);
    return s;
  };
  const cpp_rational det = m(0) * m(4) - m(2) * m(2);
  const cpp_rational c0 = m(4) / det, c2 = -m(2) / det;
  const bool exact = c0 == cpp_rational(945, 512) && c2 == cpp_rational(-3465, 512);
  double eval = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double u = -1.0 + i / 100.0, w = 1.0 - u * u;
    eval = std::max(eval, std::abs(k(u) - (945.0 / 512.0 - 3465.0 / 512.0 * u * u) * w * w * w));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-10 && exact && eval <= 1e-13 && secs < 1.0;
  o.summary = "max moment defect " + num(worst) + " (tol 1e-10), coefficients " +
              (exact ? "945/512, -3465/512 exactly" : "MISMATCH") + ", " + num(secs, 3) + " s (< 1 s)";
  o.detail = {{"max_moment_defect", worst}, {"exact_coefficients", exact},
              {"evaluation_defect", eval}, {"seconds", secs}};
  return o;
}

Outcome smoother_exactness(Context& ctx)
{
  const auto t0 = Clock::now();
  const std::size_t n = 200;
  const double c = bandwidth(n, {BandwidthRule::Smoother, 1.0, std::nullopt});
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    CounterRng rng(ctx.seed, t, 21);
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
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-8 && secs < 5.0;
  o.summary = "sup error " + num(worst) + " over 50 quadratics (tol 1e-8), " + num(secs, 3) + " s (< 5 s)";
  o.detail = {{"sup_error", worst}, {"bandwidth", c}, {"seconds", secs}};
  return o;
}

Outcome path_equivalence(Context& ctx)
{
  const auto t0 = Clock::now();
  const Scenario s = builtin_scenario("uniform-linear");
  double worst = 0.0;
  std::vector<double> per_seed;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Dataset d = sample(s, 500, replication_seed(ctx.seed + 3, k));
    PipelineConfig pc;
    pc.path = EstimatorPath::Fft;
    pc.fft_size = 8192;
    const auto fft = estimate_pipeline(d, pc);
    pc.path = EstimatorPath::Direct;
    pc.grid = fft.h_hat.grid;
    const auto direct = estimate_pipeline(d, pc);
    const double rel = sup_distance(fft.h_hat.values, direct.h_hat.values) / direct.h_hat.max_value();
    per_seed.push_back(rel);
    worst = std::max(worst, rel);
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst < 1e-4 && secs < 30.0;
  o.summary = "worst relative sup gap " + num(worst) + " over 10 seeds (tol 1e-4), " + num(secs, 3) +
              " s (< 30 s)";
  o.detail = {{"relative_gaps", per_seed}, {"seconds", secs}};
  return o;
}

Outcome rate_separation(Context& ctx)
{
  const auto t0 = Clock::now();
  RateStudyConfig cfg;
  cfg.seed = ctx.seed;
  cfg.workers = ctx.workers;
  cfg.pipeline.path = EstimatorPath::Fft;
  cfg.estimators = {RateEstimator::BaselineKde, RateEstimator::Convolution};
  const auto reports = rate_study(builtin_scenario("uniform-linear"), kRateLadder, 100, cfg);
  const double kde = reports.at(0).slope, conv = reports.at(1).slope;
  ctx.ul_convolution_slope = conv;
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = kde >= -0.57 && kde <= -0.29 && conv >= -0.62 && conv <= -0.38 && conv < kde;
  o.summary = "KDE slope " + num(kde) + " in [-0.57, -0.29], convolution slope " + num(conv) +
              " in [-0.62, -0.38], " + num(secs, 4) + " s";
  o.detail = {{"reports", {reports[0].to_json(), reports[1].to_json()}}, {"seconds", secs}};
  for (auto& r : o.detail["reports"])
    for (auto& p : r["points"])
      p.erase("errors");
  return o;
}

Outcome variance_limit(Context& ctx)
{
  const auto t0 = Clock::now();
  const auto v = variance_study(builtin_scenario("uniform-linear"), 5000, 500, 0.5, harness(ctx));
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = v.relative_gap <= 0.15;
  o.summary = "empirical variance " + num(v.empirical_variance) + " vs Gamma(0.5, 0.5) " +
              num(v.gamma) + ", gap " + num(100 * v.relative_gap, 3) + "% (tol 15%), " +
              num(secs, 4) + " s";
  o.detail = to_json(v);
  o.detail.erase("scaled_errors");
  o.detail["seconds"] = secs;
  return o;
}

Outcome expansion(Context& ctx)
{
  const auto t0 = Clock::now();
  const auto rows = expansion_check(builtin_scenario("uniform-linear"), kLadder, 100, harness(ctx));
  std::vector<double> plugin, literal, oracle;
  for (const auto& r : rows) {
    plugin.push_back(r.plugin_median);
    literal.push_back(r.plugin_plus_h3_median);
    oracle.push_back(r.oracle_median);
  }
  const bool p = strictly_decreasing(plugin), q = strictly_decreasing(oracle);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = p && q;
  o.summary = "plug-in medians " + join(plugin) + (p ? "" : " (not decreasing)") +
              "; oracle medians " + join(oracle) + (q ? "" : " (not decreasing)") +
              "; opposite H3 sign (info) " + join(literal) +
              (strictly_decreasing(literal) ? "" : " (not decreasing)") + ", " + num(secs, 4) + " s";
  o.detail = {{"plugin_medians", plugin}, {"opposite_sign_medians", literal},
              {"oracle_medians", oracle}, {"seconds", secs}};
  return o;
}

Outcome efficiency(Context& ctx)
{
  const auto t0 = Clock::now();
  const auto e = efficiency_study(builtin_scenario("uniform-logistic"), 4000, 400, 0.8, harness(ctx),
                                  EfficiencyConfig());
  const double gap_plain = std::abs(e.var_plain / e.var_I - 1.0);
  const double gap_corr = std::abs(e.var_corrected / e.var_I_star - 1.0);
  const double gap_J = std::abs(e.J_median / e.J_true - 1.0);
  const auto rows = correction_check(builtin_scenario("uniform-linear"), kLadder, 100, harness(ctx),
                                     EfficiencyConfig());
  std::vector<double> collapse;
  for (const auto& r : rows)
    collapse.push_back(r.sup_C_median);
  const bool below = e.var_corrected < e.var_plain;
  const bool falls = strictly_decreasing(collapse);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = below && gap_plain <= 0.25 && gap_corr <= 0.25 && gap_J <= 0.20 && falls;
  o.summary = "Var corrected " + num(e.var_corrected) + (below ? " < " : " >= ") + "Var plain " +
              num(e.var_plain) + "; plain vs Var I " + num(e.var_I) + " gap " +
              num(100 * gap_plain, 3) + "%, corrected vs Var I* " + num(e.var_I_star) + " gap " +
              num(100 * gap_corr, 3) + "% (tol 25%); median J-hat " + num(e.J_median) + " vs " +
              num(e.J_true) + " gap " + num(100 * gap_J, 3) + "% (tol 20%); sqrt(n) sup|C-hat| medians " +
              join(collapse) + (falls ? "" : " (not decreasing)") + ", " + num(secs, 4) + " s";
  o.detail = to_json(e);
  o.detail.erase("plain");
  o.detail.erase("corrected");
  o.detail.erase("J");
  o.detail["collapse_medians"] = collapse;
  o.detail["seconds"] = secs;
  return o;
}

Outcome linearization(Context& ctx)
{
  const auto t0 = Clock::now();
  LinearizationConfig cfg;
  cfg.seed = ctx.seed;
  cfg.workers = ctx.workers;
  const auto rows = smoother_linearization_check(builtin_scenario("uniform-exp"), kLadder, 100, cfg);
  std::vector<double> sup, gap, mse;
  for (const auto& r : rows) {
    sup.push_back(r.sup_remainder_median);
    gap.push_back(r.mean_gap_median);
    mse.push_back(r.scaled_mse_median);
  }
  const double ratio = std::max(mse.back() / mse.front(), mse.front() / mse.back());
  const bool a = strictly_decreasing(sup), b = strictly_decreasing(gap);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = a && b && ratio <= 3.0;
  o.summary = "remainder medians " + join(sup) + (a ? "" : " (not decreasing)") + "; mean-gap medians " +
              join(gap) + (b ? "" : " (not decreasing)") + "; scaled MSE ratio " + num(ratio) +
              " (<= 3), " + num(secs, 4) + " s";
  o.detail = {{"sup_remainder_medians", sup}, {"mean_gap_medians", gap},
              {"scaled_mse_medians", mse}, {"seconds", secs}};
  return o;
}

Outcome negative_control(Context& ctx)
{
  const auto t0 = Clock::now();
  RateStudyConfig cfg;
  cfg.seed = ctx.seed;
  cfg.workers = ctx.workers;
  cfg.pipeline.path = EstimatorPath::Fft;
  cfg.estimators = {RateEstimator::Convolution};
  if (!ctx.ul_convolution_slope) {
    ctx.ul_convolution_slope =
      rate_study(builtin_scenario("uniform-linear"), kRateLadder, 100, cfg).at(0).slope;
  }
  const auto sb = rate_study(builtin_scenario("sin-beta"), kRateLadder, 100, cfg).at(0);
  const double diff = sb.slope - *ctx.ul_convolution_slope;
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = diff >= 0.05;
  o.summary = "sin-beta slope " + num(sb.slope) + " minus uniform-linear slope " +
              num(*ctx.ul_convolution_slope) + " = " + num(diff) + " (>= 0.05), " + num(secs, 4) + " s";
  o.detail = {{"sin_beta_slope", sb.slope}, {"uniform_linear_slope", *ctx.ul_convolution_slope},
              {"seconds", secs}};
  return o;
}

Outcome orthogonality(Context&)
{
  const auto t0 = Clock::now();
  const ScenarioTruth logi(builtin_scenario("uniform-logistic"));
  double worst_mean = 0.0, worst_orth = 0.0;
  for (double y : {0.0, 0.8, 2.0}) {
    const auto m = influence_moments(logi, y);
    worst_mean = std::max({worst_mean, std::abs(m.mean_I), std::abs(m.mean_I_star)});
    for (const auto& c : orthogonality_checks(logi, y))
      worst_orth = std::max(worst_orth, std::abs(c.value));
  }
  const ScenarioTruth ul(builtin_scenario("uniform-linear"));
  double worst_diff = 0.0;
  for (double y : {-1.0, 0.5, 2.0}) {
    const auto p = influence_point(ul, y);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        const double x = (i + 0.5) / 10.0, e = -3.0 + 6.0 * j / 9.0;
        const auto v = influence(ul, p, x, e);
        worst_diff = std::max(worst_diff, std::abs(v.I - v.I_star));
      }
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_mean <= 1e-6 && worst_orth <= 1e-6 && worst_diff <= 1e-10;
  o.summary = "max |E I|, |E I*| " + num(worst_mean) + ", max tangent product " + num(worst_orth) +
              " (tol 1e-6); normal errors max |I - I*| " + num(worst_diff) + " (tol 1e-10), " +
              num(secs, 3) + " s";
  o.detail = {{"max_mean", worst_mean}, {"max_orthogonality", worst_orth},
              {"max_projection_gap", worst_diff}, {"seconds", secs}};
  return o;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Acceptance criteria 1-10"};
  std::vector<int> only;
  std::string json_out;
  Context ctx;
  ctx.workers = default_workers(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--seed", ctx.seed, "master seed");
  app.add_option("--workers", ctx.workers, "worker threads");
  app.add_option("--json", json_out, "write a JSON summary here");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Outcome(Context&)>>> criteria{
    {1, kernel_correctness}, {2, smoother_exactness}, {3, path_equivalence},
    {4, rate_separation},    {5, variance_limit},     {6, expansion},
    {7, efficiency},         {8, linearization},      {9, negative_control},
    {10, orthogonality}};
  const std::set<int> selected(only.begin(), only.end());
  std::cout << "acceptance: seed " << ctx.seed << ", workers " << ctx.workers << std::endl;
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id))
      continue;
    Outcome o;
    try {
      o = fn(ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.summary
              << std::endl;
    o.detail["pass"] = o.pass;
    o.detail["summary"] = o.summary;
    ctx.report[std::to_string(id)] = o.detail;
  }
  if (!json_out.empty())
    std::ofstream(json_out) << ctx.report.dump(2) << "\n";
  std::cout << "acceptance: " << failures << " failing" << std::endl;
  return failures == 0 ? 0 : 1;
}
