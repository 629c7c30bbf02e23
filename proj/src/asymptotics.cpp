#include "respdens/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "respdens/error.hpp"
#include "respdens/parallel.hpp"
#include "respdens/quadrature.hpp"
#include "respdens/rng.hpp"

namespace respdens {

namespace {

//! Integrate psi(e) f(e) over the error support, split at `breaks`.
template<class F>
double error_integral(const ScenarioTruth& truth, F&& psi, std::vector<double> breaks)
{
  auto [lo, hi] = truth.scenario().error->support();
  std::vector<double> pts{lo};
  for (double b : breaks) {
    if (b > lo && b < hi)
      pts.push_back(b);
  }
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += truth.expect_error(psi, pts[i], pts[i + 1]);
  return total;
}

//! Points where q(y - e) may jump, as e values.
std::vector<double> q_breaks(const ScenarioTruth& truth, double y)
{
  auto [rlo, rhi] = truth.surrogate_range();
  return {y - rhi, y - rlo};
}

std::uint64_t study_seed(std::uint64_t master, std::size_t n, std::size_t rep)
{
  return replication_seed(replication_seed(master, n), rep);
}

} // namespace

double median(std::vector<double> v)
{
  if (v.empty())
    throw ConfigError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

EmpiricalTerms empirical_terms(const Dataset& data, const TruthTables& truth)
{
  const auto& hidden = data.require_hidden("empirical_terms");
  const auto& oracle = *truth.oracle;
  const auto& f = *oracle.scenario().error;
  const std::size_t n = data.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double J = oracle.fisher_information();
  const bool lambda_zero = f.is_normal();

  std::vector<double> lam(n);
  for (std::size_t j = 0; j < n; ++j)
    lam[j] = lambda_zero ? 0.0 : oracle.score(hidden.errors[j]) / J - hidden.errors[j];

  EmpiricalTerms out;
  out.grid = truth.grid;
  const std::size_t G = truth.grid.size();
  out.H1.resize(G);
  out.H2.resize(G);
  out.H3.resize(G);
  out.C.resize(G);
  out.error_mean = std::accumulate(hidden.errors.begin(), hidden.errors.end(), 0.0) * inv_n;
  for (std::size_t i = 0; i < G; ++i) {
    const double y = truth.grid[i];
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double z = y - hidden.regression_values[j];
      s1 += f.pdf(z);
      s2 += oracle.q(y - hidden.errors[j]);
      const double centered = f.pdf_derivative(z, 1) - truth.h1[i];
      s3 += hidden.errors[j] * centered;
      s4 += lam[j] * centered;
    }
    out.H1[i] = s1 * inv_n - truth.h[i];
    out.H2[i] = s2 * inv_n - truth.h[i];
    out.H3[i] = s3 * inv_n;
    out.C[i] = s4 * inv_n;
  }
  return out;
}

InfluencePoint influence_point(const ScenarioTruth& truth, double y)
{
  return {y, truth.h(y, 0), truth.h(y, 1), truth.d(y), truth.fisher_information()};
}

InfluenceValue influence(const ScenarioTruth& truth, const InfluencePoint& p, double x, double eps)
{
  if (!(std::isfinite(p.J) && p.J > 0.0))
    throw NumericalError("projected influence function needs finite positive Fisher information");
  const auto& f = *truth.scenario().error;
  const double rx = truth.scenario().regression->value(x);
  const double fz = f.pdf(p.y - rx);
  const double centered = f.pdf_derivative(p.y - rx, 1) - p.h1;
  const double qz = truth.q(p.y - eps);
  const double l = truth.score(eps);
  InfluenceValue v;
  v.I = (qz - p.h) + (fz - p.h) - eps * centered;
  v.I_star = (fz - p.h) + (qz - p.h - p.d * l) + (p.d - centered / p.J) * l;
  return v;
}

double expect_joint(const ScenarioTruth& truth, double y,
                    const std::function<double(double, double)>& phi)
{
  const auto breaks = q_breaks(truth, y);
  return truth.expect_covariate(
    [&](double x) {
      return error_integral(truth, [&](double e) { return phi(x, e); }, breaks);
    },
    y);
}

InfluenceMoments influence_moments(const ScenarioTruth& truth, double y)
{
  const auto p = influence_point(truth, y);
  InfluenceMoments m;
  m.mean_I = expect_joint(truth, y, [&](double x, double e) { return influence(truth, p, x, e).I; });
  m.mean_I_star =
    expect_joint(truth, y, [&](double x, double e) { return influence(truth, p, x, e).I_star; });
  const double second_I = expect_joint(truth, y, [&](double x, double e) {
    const double v = influence(truth, p, x, e).I;
    return v * v;
  });
  const double second_star = expect_joint(truth, y, [&](double x, double e) {
    const double v = influence(truth, p, x, e).I_star;
    return v * v;
  });
  m.var_difference = expect_joint(truth, y, [&](double x, double e) {
    const auto v = influence(truth, p, x, e);
    return (v.I - v.I_star) * (v.I - v.I_star);
  });
  m.var_I = second_I - m.mean_I * m.mean_I;
  m.var_I_star = second_star - m.mean_I_star * m.mean_I_star;
  return m;
}

std::vector<OrthogonalityCheck> orthogonality_checks(const ScenarioTruth& truth, double y)
{
  const auto p = influence_point(truth, y);
  auto cov_moment = [&](int k) {
    return truth.expect_covariate([k](double x) { return std::pow(x, k); });
  };
  auto err_moment = [&](int k) {
    return truth.expect_error([k](double e) { return std::pow(e, k); });
  };
  const double sigma2 = err_moment(2);

  std::vector<std::pair<std::string, std::function<double(double, double)>>> basis;
  for (int k = 1; k <= 4; ++k) {
    const double mk = cov_moment(k);
    basis.emplace_back("alpha(X) = X^" + std::to_string(k) + " - E X^" + std::to_string(k),
                       [k, mk](double x, double) { return std::pow(x, k) - mk; });
  }
  for (int k = 2; k <= 5; ++k) {
    const double a = err_moment(k);
    const double b = err_moment(k + 1) / sigma2;
    basis.emplace_back("beta(eps) = eps^" + std::to_string(k) + " centered, eps-orthogonal",
                       [k, a, b](double, double e) { return std::pow(e, k) - a - b * e; });
  }
  for (int k = 0; k <= 3; ++k) {
    basis.emplace_back("gamma(X) score(eps), gamma = X^" + std::to_string(k),
                       [k, &truth](double x, double e) { return std::pow(x, k) * truth.score(e); });
  }
  std::vector<OrthogonalityCheck> out;
  for (const auto& [name, t] : basis) {
    const double v = expect_joint(truth, y, [&](double x, double e) {
      const auto iv = influence(truth, p, x, e);
      return (iv.I - iv.I_star) * t(x, e);
    });
    out.push_back({name, v});
  }
  return out;
}

Json CovarianceReport::to_json() const
{
  auto mat = [](const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  return {{"points", points},   {"method", method},        {"variance", variance},
          {"gamma1", mat(gamma1)}, {"gamma2", mat(gamma2)}, {"gamma3", mat(gamma3)},
          {"gamma", mat(gamma)}};
}

CovarianceReport gamma(const ScenarioTruth& truth, std::span<const double> points)
{
  const auto& f = *truth.scenario().error;
  const auto& r = *truth.scenario().regression;
  const auto k = static_cast<Eigen::Index>(points.size());
  CovarianceReport rep;
  rep.points.assign(points.begin(), points.end());
  rep.gamma1 = Eigen::MatrixXd::Zero(k, k);
  rep.gamma2 = Eigen::MatrixXd::Zero(k, k);
  rep.gamma3 = Eigen::MatrixXd::Zero(k, k);
  rep.variance = truth.variance_quadrature();
  std::vector<double> h(points.size()), h1(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    h[i] = truth.h(points[i], 0);
    h1[i] = truth.h(points[i], 1);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double s = points[static_cast<std::size_t>(i)];
      const double t = points[static_cast<std::size_t>(j)];
      const double hs = h[static_cast<std::size_t>(i)], ht = h[static_cast<std::size_t>(j)];
      const double h1s = h1[static_cast<std::size_t>(i)], h1t = h1[static_cast<std::size_t>(j)];
      try {
        const double g1 =
          truth.expect_covariate([&](double x) { return f.pdf(s - r.value(x)) * f.pdf(t - r.value(x)); }, s) -
          hs * ht;
        auto breaks = q_breaks(truth, s);
        const auto bt = q_breaks(truth, t);
        breaks.insert(breaks.end(), bt.begin(), bt.end());
        const double g2 =
          error_integral(truth, [&](double e) { return truth.q(s - e) * truth.q(t - e); }, breaks) -
          hs * ht;
        const double g3 = truth.expect_covariate([&](double x) {
                            return f.pdf_derivative(s - r.value(x), 1) *
                                   f.pdf_derivative(t - r.value(x), 1);
                          }, s) -
                          h1s * h1t;
        rep.gamma1(i, j) = rep.gamma1(j, i) = g1;
        rep.gamma2(i, j) = rep.gamma2(j, i) = g2;
        rep.gamma3(i, j) = rep.gamma3(j, i) = g3;
      } catch (const NumericalError& e) {
        throw NumericalError("covariance quadrature failed at (s, t) = (" + std::to_string(s) +
                             ", " + std::to_string(t) + "): " + e.what());
      }
    }
  }
  rep.gamma = rep.gamma1 + rep.gamma2 + rep.variance * rep.gamma3;
  return rep;
}

MonteCarloCovariance gamma_monte_carlo(const ScenarioTruth& truth, double s, double t,
                                       std::size_t draws, std::uint64_t seed)
{
  if (draws < 2)
    throw ConfigError("Monte Carlo covariance needs at least two draws");
  const auto& sc = truth.scenario();
  const double h1s = truth.h(s, 1);
  const double h1t = truth.h(t, 1);
  CounterRng xs(seed, 0, 2);
  CounterRng es(seed, 0, 3);
  std::vector<double> a(draws), b(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const double x = sc.covariate->quantile(xs.uniform01());
    const double e = sc.error->quantile(es.uniform01());
    const double rx = sc.regression->value(x);
    a[i] = sc.error->pdf(s - rx) + truth.q(s - e) - e * (sc.error->pdf_derivative(s - rx, 1) - h1s);
    b[i] = sc.error->pdf(t - rx) + truth.q(t - e) - e * (sc.error->pdf_derivative(t - rx, 1) - h1t);
  }
  const double N = static_cast<double>(draws);
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / N;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / N;
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double p = (a[i] - ma) * (b[i] - mb);
    mean += p;
    sq += p * p;
  }
  mean /= N;
  const double var_p = (sq / N - mean * mean) * N / (N - 1.0);
  return {mean * N / (N - 1.0), std::sqrt(var_p / N), draws};
}

std::vector<ExpansionRow> expansion_check(const Scenario& s, std::span<const std::size_t> ns,
                                          std::size_t reps, const HarnessConfig& config)
{
  if (reps < 1)
    throw ConfigError("expansion_check needs reps >= 1");
  const auto grid = default_response_grid(s, config.grid_points);
  const TruthTables tables = truth(s, grid);
  PipelineConfig pipeline = config.pipeline;
  pipeline.grid = grid;
  std::vector<ExpansionRow> rows;
  for (std::size_t n : ns) {
    struct Rep
    {
      double plugin, plugin_plus, oracle;
    };
    const double root_n = std::sqrt(static_cast<double>(n));
    auto results = run_replications<Rep>(reps, config.workers, [&](std::size_t rep) {
      const Dataset data = sample(s, n, study_seed(config.seed, n, rep));
      const auto est = estimate_pipeline(data, pipeline);
      const double b = bandwidth(n, pipeline.convolution);
      const auto tilde = oracle_von_mises(data, pipeline.kernels, b, grid, pipeline.path,
                                          pipeline.fft_size);
      const auto terms = empirical_terms(data, tables);
      Rep r{0, 0, 0};
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double base = est.h_hat.values[i] - tables.h[i] - terms.H1[i] - terms.H2[i];
        r.plugin = std::max(r.plugin, std::abs(base + terms.H3[i]));
        r.plugin_plus = std::max(r.plugin_plus, std::abs(base - terms.H3[i]));
        r.oracle = std::max(r.oracle, std::abs(tilde.values[i] - tables.h[i] - terms.H1[i] -
                                               terms.H2[i]));
      }
      r.plugin *= root_n;
      r.plugin_plus *= root_n;
      r.oracle *= root_n;
      return r;
    });
    ExpansionRow row;
    row.n = n;
    for (const auto& r : results) {
      row.plugin.push_back(r.plugin);
      row.plugin_plus_h3.push_back(r.plugin_plus);
      row.oracle.push_back(r.oracle);
    }
    row.plugin_median = median(row.plugin);
    row.plugin_plus_h3_median = median(row.plugin_plus_h3);
    row.oracle_median = median(row.oracle);
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::Matrix3d population_gram(const CovariateLaw& g, const WeightFunction& w, double x, double c)
{
  const double lo = std::max(-1.0, -x / c);
  const double hi = std::min(1.0, (1.0 - x) / c);
  Eigen::Matrix3d W = Eigen::Matrix3d::Zero();
  if (!(hi > lo))
    return W;
  // entries depend on the power sums int u^k g(x + c u) w(u) du, k <= 4
  double m[5];
  for (int k = 0; k < 5; ++k) {
    m[k] = quad::composite_gauss_legendre(
      [&](double u) { return std::pow(u, k) * g.pdf(x + c * u) * w(u); },
      std::vector<double>{lo, hi}, 4);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j)
      W(i, j) = m[i + j];
  }
  return W;
}

Eigen::RowVector3d linearization_row(const CovariateLaw& g, const WeightFunction& w, double x,
                                     double c)
{
  const Eigen::Matrix3d W = population_gram(g, w, x, c);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(W, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kConditionTrigger) {
    throw NumericalError("population Gram matrix W(x) is numerically singular at x = " +
                         std::to_string(x) + " (eigenvalue bounds violated)");
  }
  const Eigen::Vector3d col = W.ldlt().solve(Eigen::Vector3d::UnitX());
  return col.transpose();
}

std::vector<LinearizationRow> smoother_linearization_check(const Scenario& s,
                                                           std::span<const std::size_t> ns,
                                                           std::size_t reps,
                                                           const LinearizationConfig& config)
{
  const auto& g = *s.covariate;
  const auto& r = *s.regression;
  const auto xgrid = linspace(0.0, 1.0, config.x_grid_points);
  // Gauss-Legendre nodes for int (r-hat - r) g over [0, 1]
  const auto& rule = quad::gauss_legendre_rule();
  constexpr int panels = 4;
  std::vector<double> qnodes, qweights;
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    const double half = 0.5 / panels;
    for (std::size_t i = 0; i < quad::kGaussPoints; ++i) {
      const double x = a + half + half * rule.nodes[i];
      qnodes.push_back(x);
      qweights.push_back(half * rule.weights[i] * g.pdf(x));
    }
  }

  std::vector<LinearizationRow> rows;
  for (std::size_t n : ns) {
    const double c = bandwidth(n, config.smoother);
    std::vector<Eigen::RowVector3d> D(xgrid.size());
    for (std::size_t i = 0; i < xgrid.size(); ++i)
      D[i] = linearization_row(g, config.weight, xgrid[i], c);
    const double root_n = std::sqrt(static_cast<double>(n));

    struct Rep
    {
      double sup, mse, gap;
    };
    auto results = run_replications<Rep>(reps, config.workers, [&](std::size_t rep) {
      const Dataset data = sample(s, n, study_seed(config.seed, n, rep));
      const auto& hidden = data.require_hidden("smoother_linearization_check");
      const SortedDesign design(data.x, data.y);
      const SortedDesign noise(data.x, hidden.errors);
      Rep out{0, 0, 0};
      for (std::size_t i = 0; i < xgrid.size(); ++i) {
        const double x = xgrid[i];
        const double rhat = fit_at(design, c, config.weight, x).beta_hat[0];
        const Eigen::Vector3d A = fit_at(noise, c, config.weight, x).rhs;
        const double rho = D[i] * A;
        out.sup = std::max(out.sup, std::abs(rhat - r.value(x) - rho));
      }
      out.sup *= root_n;
      const auto at_samples = smooth_at(design, c, config.weight, data.x);
      double ss = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = at_samples[j] - hidden.regression_values[j];
        ss += d * d;
      }
      out.mse = c * ss; // n c (1/n) sum
      const auto at_nodes = smooth_at(design, c, config.weight, qnodes);
      double integral = 0.0;
      for (std::size_t i = 0; i < qnodes.size(); ++i)
        integral += qweights[i] * (at_nodes[i] - r.value(qnodes[i]));
      const double ebar =
        std::accumulate(hidden.errors.begin(), hidden.errors.end(), 0.0) / static_cast<double>(n);
      out.gap = root_n * std::abs(integral - ebar);
      return out;
    });
    LinearizationRow row;
    row.n = n;
    row.bandwidth = c;
    for (const auto& x : results) {
      row.sup_remainder.push_back(x.sup);
      row.scaled_mse.push_back(x.mse);
      row.mean_gap.push_back(x.gap);
    }
    row.sup_remainder_median = median(row.sup_remainder);
    row.scaled_mse_median = median(row.scaled_mse);
    row.mean_gap_median = median(row.mean_gap);
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const std::vector<ExpansionRow>& rows)
{
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"n", r.n},
                   {"plugin_median", r.plugin_median},
                   {"plugin_plus_h3_median", r.plugin_plus_h3_median},
                   {"oracle_median", r.oracle_median},
                   {"plugin", r.plugin},
                   {"plugin_plus_h3", r.plugin_plus_h3},
                   {"oracle", r.oracle}});
  }
  return out;
}

Json to_json(const std::vector<LinearizationRow>& rows)
{
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"n", r.n},
                   {"bandwidth", r.bandwidth},
                   {"sup_remainder_median", r.sup_remainder_median},
                   {"scaled_mse_median", r.scaled_mse_median},
                   {"mean_gap_median", r.mean_gap_median},
                   {"sup_remainder", r.sup_remainder},
                   {"scaled_mse", r.scaled_mse},
                   {"mean_gap", r.mean_gap}});
  }
  return out;
}

double sample_variance(std::span<const double> v)
{
  if (v.size() < 2)
    throw ConfigError("sample_variance needs at least two values");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

PointVarianceStudy variance_study(const Scenario& s, std::size_t n, std::size_t reps, double y,
                                  const HarnessConfig& config)
{
  if (reps < 2)
    throw ConfigError("variance_study needs reps >= 2");
  const ScenarioTruth oracle(s);
  const double h_y = oracle.h(y, 0);
  PipelineConfig pipeline = config.pipeline;
  pipeline.grid = std::vector<double>{y};
  const double root_n = std::sqrt(static_cast<double>(n));
  PointVarianceStudy out;
  out.y = y;
  out.n = n;
  out.scaled_errors = run_replications<double>(reps, config.workers, [&](std::size_t rep) {
    const Dataset data = sample(s, n, study_seed(config.seed, n, rep));
    return root_n * (estimate_pipeline(data, pipeline).h_hat.values[0] - h_y);
  });
  out.empirical_variance = sample_variance(out.scaled_errors);
  const std::vector<double> pt{y};
  out.gamma = gamma(oracle, pt).gamma(0, 0);
  out.relative_gap = std::abs(out.empirical_variance / out.gamma - 1.0);
  return out;
}

EfficiencyStudy efficiency_study(const Scenario& s, std::size_t n, std::size_t reps, double y,
                                 const HarnessConfig& config, const EfficiencyConfig& eff)
{
  if (reps < 2)
    throw ConfigError("efficiency_study needs reps >= 2");
  const ScenarioTruth oracle(s);
  const double h_y = oracle.h(y, 0);
  PipelineConfig pipeline = config.pipeline;
  const std::vector<double> pt{y};
  pipeline.grid = pt;
  const double root_n = std::sqrt(static_cast<double>(n));
  struct Rep
  {
    double plain, corrected, J;
  };
  const auto results = run_replications<Rep>(reps, config.workers, [&](std::size_t rep) {
    const Dataset data = sample(s, n, study_seed(config.seed, n, rep));
    const double hh = estimate_pipeline(data, pipeline).h_hat.values[0];
    const auto corr = efficiency_correction(data, pt, eff);
    return Rep{root_n * (hh - h_y), root_n * (hh - corr.term.C[0] - h_y), corr.term.J};
  });
  EfficiencyStudy out;
  out.y = y;
  out.n = n;
  for (const auto& r : results) {
    out.plain.push_back(r.plain);
    out.corrected.push_back(r.corrected);
    out.J.push_back(r.J);
  }
  out.var_plain = sample_variance(out.plain);
  out.var_corrected = sample_variance(out.corrected);
  const auto mom = influence_moments(oracle, y);
  out.var_I = mom.var_I;
  out.var_I_star = mom.var_I_star;
  out.J_median = median(out.J);
  out.J_true = oracle.fisher_information();
  return out;
}

std::vector<CorrectionRow> correction_check(const Scenario& s, std::span<const std::size_t> ns,
                                            std::size_t reps, const HarnessConfig& config,
                                            const EfficiencyConfig& eff)
{
  if (reps < 1)
    throw ConfigError("correction_check needs reps >= 1");
  const auto grid = default_response_grid(s, config.grid_points);
  const TruthTables tables = truth(s, grid);
  std::vector<CorrectionRow> rows;
  for (std::size_t n : ns) {
    struct Rep
    {
      double sup_C, sup_diff, J;
    };
    const double root_n = std::sqrt(static_cast<double>(n));
    const auto results = run_replications<Rep>(reps, config.workers, [&](std::size_t rep) {
      const Dataset data = sample(s, n, study_seed(config.seed, n, rep));
      const auto corr = efficiency_correction(data, grid, eff);
      const auto terms = empirical_terms(data, tables);
      Rep r{0, 0, corr.term.J};
      for (std::size_t i = 0; i < grid.size(); ++i) {
        r.sup_C = std::max(r.sup_C, std::abs(corr.term.C[i]));
        r.sup_diff = std::max(r.sup_diff, std::abs(corr.term.C[i] - terms.C[i]));
      }
      r.sup_C *= root_n;
      r.sup_diff *= root_n;
      return r;
    });
    CorrectionRow row;
    row.n = n;
    for (const auto& r : results) {
      row.sup_C.push_back(r.sup_C);
      row.sup_C_vs_truth.push_back(r.sup_diff);
      row.J.push_back(r.J);
    }
    row.sup_C_median = median(row.sup_C);
    row.sup_C_vs_truth_median = median(row.sup_C_vs_truth);
    row.J_median = median(row.J);
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const PointVarianceStudy& v)
{
  return {{"y", v.y},
          {"n", v.n},
          {"reps", v.scaled_errors.size()},
          {"empirical_variance", v.empirical_variance},
          {"gamma", v.gamma},
          {"relative_gap", v.relative_gap}};
}

Json to_json(const EfficiencyStudy& e)
{
  return {{"y", e.y},
          {"n", e.n},
          {"reps", e.plain.size()},
          {"var_plain", e.var_plain},
          {"var_corrected", e.var_corrected},
          {"var_I", e.var_I},
          {"var_I_star", e.var_I_star},
          {"J_median", e.J_median},
          {"J_true", e.J_true}};
}

Json to_json(const std::vector<CorrectionRow>& rows)
{
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"n", r.n},
                   {"reps", r.sup_C.size()},
                   {"sqrt_n_sup_C_median", r.sup_C_median},
                   {"sqrt_n_sup_C_minus_C_median", r.sup_C_vs_truth_median},
                   {"J_median", r.J_median}});
  }
  return out;
}

} // namespace respdens
