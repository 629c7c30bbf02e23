#include "respdens/rates.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "respdens/asymptotics.hpp"
#include "respdens/error.hpp"
#include "respdens/parallel.hpp"
#include "respdens/rng.hpp"
#include "respdens/truth.hpp"

namespace respdens {

double quantile(std::vector<double> v, double p)
{
  if (v.empty())
    throw ConfigError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Json RateReport::to_json() const
{
  Json pts = Json::array();
  for (const auto& p : points) {
    pts.push_back({{"n", p.n},
                   {"median", p.median},
                   {"q1", p.q1},
                   {"q3", p.q3},
                   {"log_n", std::log(static_cast<double>(p.n))},
                   {"log_median", std::log(p.median)},
                   {"errors", p.errors}});
  }
  return {{"estimator", estimator},
          {"slope", slope},
          {"slope_se", slope_se},
          {"intercept", intercept},
          {"points", pts}};
}

RateReport rate_fit(const std::vector<std::pair<std::size_t, std::vector<double>>>& table,
                    const std::string& estimator, std::size_t min_reps)
{
  std::set<std::size_t> distinct;
  for (const auto& [n, errs] : table)
    distinct.insert(n);
  if (distinct.size() < 4) {
    throw ConfigError("rate_fit needs at least 4 distinct sample sizes, got " +
                      std::to_string(distinct.size()));
  }
  RateReport rep;
  rep.estimator = estimator;
  std::vector<double> lx, ly;
  for (const auto& [n, errs] : table) {
    if (errs.size() < min_reps) {
      throw ConfigError("rate_fit needs at least " + std::to_string(min_reps) +
                        " replications per sample size; n = " + std::to_string(n) + " has " +
                        std::to_string(errs.size()));
    }
    RatePoint p;
    p.n = n;
    p.errors = errs;
    p.median = median(errs);
    p.q1 = quantile(errs, 0.25);
    p.q3 = quantile(errs, 0.75);
    if (!(p.median > 0.0))
      throw NumericalError("rate_fit: nonpositive median error at n = " + std::to_string(n));
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(p.median));
    rep.points.push_back(std::move(p));
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - rep.intercept - rep.slope * lx[i];
    rss += e * e;
  }
  rep.slope_se = std::sqrt(rss / (k - 2.0) / sxx);
  return rep;
}

std::string to_string(RateEstimator e)
{
  switch (e) {
    case RateEstimator::BaselineKde: return "baseline-kde";
    case RateEstimator::Convolution: return "convolution";
    case RateEstimator::Oracle: return "oracle";
    case RateEstimator::Efficient: return "efficient";
  }
  return "unknown";
}

RateEstimator rate_estimator_from_string(const std::string& s)
{
  for (auto e : {RateEstimator::BaselineKde, RateEstimator::Convolution, RateEstimator::Oracle,
                 RateEstimator::Efficient}) {
    if (to_string(e) == s)
      return e;
  }
  throw ConfigError("unknown estimator '" + s +
                    "' (expected baseline-kde, convolution, oracle or efficient)");
}

Json RateStudyConfig::to_json() const
{
  Json names = Json::array();
  for (auto e : estimators)
    names.push_back(to_string(e));
  return {{"seed", seed},
          {"pipeline", pipeline.to_json()},
          {"kde_bandwidth", {{"constant", kde.constant}, {"exponent", kde.exponent()}}},
          {"efficiency", efficiency.to_json()},
          {"estimators", names},
          {"grid_points", grid_points}};
}

std::vector<RateReport> rate_study(const Scenario& s, std::span<const std::size_t> ns,
                                   std::size_t reps, const RateStudyConfig& config)
{
  if (config.estimators.empty())
    throw ConfigError("rate_study: no estimators selected");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (!(ns[i] > ns[i - 1]))
      throw ConfigError("rate_study: n-list must be strictly increasing");
  }
  const auto grid = default_response_grid(s, config.grid_points);
  const TruthTables tables = truth(s, grid);
  PipelineConfig pipeline = config.pipeline;
  pipeline.grid = grid;
  const std::size_t E = config.estimators.size();
  std::vector<std::vector<std::pair<std::size_t, std::vector<double>>>> per(E);

  for (std::size_t n : ns) {
    auto results = run_replications<std::vector<double>>(reps, config.workers, [&](std::size_t rep) {
      const Dataset data = sample(s, n, replication_seed(replication_seed(config.seed, n), rep));
      std::vector<double> errs(E, 0.0);
      std::optional<PipelineResult> est;
      auto pipeline_result = [&]() -> const PipelineResult& {
        if (!est)
          est = estimate_pipeline(data, pipeline);
        return *est;
      };
      for (std::size_t k = 0; k < E; ++k) {
        switch (config.estimators[k]) {
          case RateEstimator::BaselineKde: {
            const double b = bandwidth(n, config.kde);
            errs[k] = sup_distance(kde(data.y, b, pipeline.kernels.k, grid).values, tables.h);
            break;
          }
          case RateEstimator::Convolution:
            errs[k] = sup_distance(pipeline_result().h_hat.values, tables.h);
            break;
          case RateEstimator::Oracle: {
            const double b = bandwidth(n, pipeline.convolution);
            errs[k] = sup_distance(oracle_von_mises(data, pipeline.kernels, b, grid, pipeline.path,
                                                    pipeline.fft_size)
                                     .values,
                                   tables.h);
            break;
          }
          case RateEstimator::Efficient: {
            const auto eff = efficiency_correction(data, grid, config.efficiency);
            errs[k] = sup_distance(efficient_estimate(pipeline_result().h_hat, eff.term).values,
                                   tables.h);
            break;
          }
        }
      }
      return errs;
    });
    for (std::size_t k = 0; k < E; ++k) {
      std::vector<double> col(reps);
      for (std::size_t r = 0; r < reps; ++r)
        col[r] = results[r][k];
      per[k].emplace_back(n, std::move(col));
    }
  }
  std::vector<RateReport> out;
  for (std::size_t k = 0; k < E; ++k)
    out.push_back(rate_fit(per[k], to_string(config.estimators[k]), config.min_reps));
  return out;
}

} // namespace respdens
