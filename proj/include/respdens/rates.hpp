#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "respdens/density.hpp"
#include "respdens/efficiency.hpp"

namespace respdens {

struct RatePoint
{
  std::size_t n = 0;
  std::vector<double> errors;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct RateReport
{
  std::string estimator;
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;

  Json to_json() const;
};

//! OLS of log median error on log n. Requires >= 4 distinct n and at least
//! `min_reps` errors per n.
RateReport rate_fit(const std::vector<std::pair<std::size_t, std::vector<double>>>& table,
                    const std::string& estimator = "", std::size_t min_reps = 30);

//! Linear-interpolation quantile (type 7).
double quantile(std::vector<double> v, double p);

enum class RateEstimator
{
  BaselineKde,
  Convolution,
  Oracle,
  Efficient,
};

std::string to_string(RateEstimator e);
RateEstimator rate_estimator_from_string(const std::string& s);

struct RateStudyConfig
{
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  PipelineConfig pipeline;
  BandwidthSchedule kde{BandwidthRule::KdeBaseline, 1.0, std::nullopt};
  EfficiencyConfig efficiency;
  std::vector<RateEstimator> estimators{RateEstimator::BaselineKde, RateEstimator::Convolution};
  std::size_t grid_points = 1024;
  std::size_t min_reps = 30;

  Json to_json() const;
};

//! Grid sup-norm errors against the quadrature truth for each estimator,
//! then one rate fit per estimator. Deterministic in the seed for any
//! worker count.
std::vector<RateReport> rate_study(const Scenario& s, std::span<const std::size_t> ns,
                                   std::size_t reps, const RateStudyConfig& config);

} // namespace respdens
