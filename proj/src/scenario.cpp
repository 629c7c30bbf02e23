#include "respdens/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "respdens/error.hpp"
#include "respdens/quadrature.hpp"
#include "respdens/rng.hpp"

namespace respdens {

namespace {

constexpr int kValidationGrid = 2001;

std::string join_names()
{
  std::string out;
  for (const auto& n : builtin_scenario_names())
    out += (out.empty() ? "" : ", ") + n;
  return out;
}

double integrate_error(const ErrorLaw& f, auto&& integrand)
{
  auto [lo, hi] = f.support();
  if (std::isfinite(lo) && std::isfinite(hi))
    return quad::adaptive(integrand, lo, hi, 1e-10, "error law");
  // split at zero so both halves are semi-infinite
  return quad::adaptive(integrand, -kInf, 0.0, 1e-10, "error law") +
         quad::adaptive(integrand, 0.0, kInf, 1e-10, "error law");
}

} // namespace

Json Scenario::to_json() const
{
  return {{"name", name},
          {"g", covariate->to_json()},
          {"r", regression->to_json()},
          {"f", error->to_json()},
          {"flags",
           {{"F", flags.error_ok}, {"G", flags.covariate_ok}, {"R", flags.regression_ok}}}};
}

Scenario Scenario::from_json(const Json& j)
{
  if (!j.is_object())
    throw ConfigError("scenario document must be a JSON object");
  for (const char* key : {"g", "r", "f"}) {
    if (!j.contains(key))
      throw ConfigError(std::string("scenario document lacks field '") + key + "'");
  }
  Scenario s;
  s.name = j.value("name", std::string("custom"));
  s.covariate = covariate_from_json(j.at("g"));
  s.regression = regression_from_json(j.at("r"));
  s.error = error_from_json(j.at("f"));
  if (j.contains("flags")) {
    const auto& fl = j.at("flags");
    s.flags.error_ok = fl.value("F", true);
    s.flags.covariate_ok = fl.value("G", true);
    s.flags.regression_ok = fl.value("R", true);
  }
  return s;
}

std::vector<std::string> builtin_scenario_names()
{
  return {"uniform-linear", "uniform-exp", "uniform-logistic", "sin-beta"};
}

Scenario builtin_scenario(const std::string& name)
{
  Scenario s;
  s.name = name;
  if (name == "uniform-linear") {
    s.covariate = std::make_shared<UniformCovariate>();
    s.regression = std::make_shared<LinearRegression>(0.0, 1.0);
    s.error = std::make_shared<NormalError>(1.0);
  } else if (name == "uniform-exp") {
    s.covariate = std::make_shared<UniformCovariate>();
    s.regression = std::make_shared<ExponentialRegression>();
    s.error = std::make_shared<NormalError>(1.0);
  } else if (name == "uniform-logistic") {
    s.covariate = std::make_shared<UniformCovariate>();
    s.regression = std::make_shared<QuadraticRegression>(0.0, 1.0, 0.5);
    s.error = std::make_shared<LogisticError>(1.0);
  } else if (name == "sin-beta") {
    s.covariate = std::make_shared<BetaCovariate>(2.0, 2.0);
    s.regression = std::make_shared<SineRegression>(1.0, 1.0);
    s.error = std::make_shared<NormalError>(1.0);
    s.flags.regression_ok = false;
    s.flags.covariate_ok = false;
  } else {
    throw ConfigError("unknown scenario '" + name + "'; available: " + join_names());
  }
  return s;
}

Scenario load_scenario(const std::string& name_or_path)
{
  for (const auto& n : builtin_scenario_names()) {
    if (n == name_or_path)
      return builtin_scenario(n);
  }
  if (!std::filesystem::is_regular_file(name_or_path)) {
    throw ConfigError("unknown scenario '" + name_or_path +
                      "' (not a built-in and no such file); available: " + join_names());
  }
  std::ifstream in(name_or_path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse scenario file '" + name_or_path + "': " + e.what());
  }
  return Scenario::from_json(j);
}

bool ValidationReport::all_passed() const
{
  for (const auto& c : checks) {
    if (!c.passed)
      return false;
  }
  return true;
}

const AssumptionCheck& ValidationReport::check(const std::string& name) const
{
  for (const auto& c : checks) {
    if (c.name == name)
      return c;
  }
  throw ConfigError("no assumption check named '" + name + "'");
}

Json ValidationReport::to_json() const
{
  Json out = Json::array();
  for (const auto& c : checks) {
    Json entry = {{"assumption", c.name}, {"passed", c.passed}, {"detail", c.detail}};
    if (c.witness)
      entry["witness"] = *c.witness;
    out.push_back(entry);
  }
  return out;
}

ValidationReport validate(const Scenario& s)
{
  ValidationReport report;
  const auto& f = *s.error;
  const auto& g = *s.covariate;
  const auto& r = *s.regression;

  {
    AssumptionCheck c{"F", true, std::nullopt, ""};
    std::ostringstream detail;
    double mass = 1.0;
    double mean = 0.0;
    try {
      mass = integrate_error(f, [&](double z) { return f.pdf(z); });
      mean = integrate_error(f, [&](double z) { return z * f.pdf(z); });
    } catch (const NumericalError& e) {
      // heavy tails can defeat the mean quadrature; that is itself a failed (F)
      c.passed = false;
      detail << "moment quadrature did not converge (" << e.what() << "); ";
    }
    if (std::abs(mass - 1.0) > 1e-8) {
      c.passed = false;
      detail << "error density mass " << mass << " != 1; ";
    }
    if (std::abs(mean) > 1e-8) {
      c.passed = false;
      detail << "error mean " << mean << " != 0; ";
    }
    if (!(f.moment_order() > 8.0 / 3.0)) {
      c.passed = false;
      detail << "moments of order > 8/3 do not exist (finite only below order "
             << f.moment_order() << "); ";
    }
    c.detail = c.passed ? "mean zero, unit mass, moment of order > 8/3" : detail.str();
    report.checks.push_back(c);
  }

  {
    AssumptionCheck c{"G", true, std::nullopt, ""};
    double gmin = kInf;
    double gmax = 0.0;
    for (int i = 0; i < kValidationGrid; ++i) {
      const double x = static_cast<double>(i) / (kValidationGrid - 1);
      const double v = g.pdf(x);
      if (!(v > 0.0 && std::isfinite(v)) && c.passed) {
        c.passed = false;
        c.witness = x;
      }
      gmin = std::min(gmin, v);
      gmax = std::max(gmax, v);
    }
    const double mass =
      quad::adaptive([&](double x) { return g.pdf(x); }, 0.0, 1.0, 1e-10, "covariate");
    if (std::abs(mass - 1.0) > 1e-8)
      c.passed = false;
    std::ostringstream detail;
    detail << "g in [" << gmin << ", " << gmax << "] on the 2001-point grid, mass " << mass;
    if (c.witness)
      detail << "; not bounded away from zero at x = " << *c.witness;
    c.detail = detail.str();
    report.checks.push_back(c);
  }

  {
    AssumptionCheck c{"R", true, std::nullopt, ""};
    double dmin = kInf;
    for (int i = 0; i < kValidationGrid; ++i) {
      const double x = static_cast<double>(i) / (kValidationGrid - 1);
      const double d = r.d1(x);
      if (!(d > 0.0) && c.passed) {
        c.passed = false;
        c.witness = x;
      }
      dmin = std::min(dmin, d);
    }
    std::ostringstream detail;
    detail << "min r' on the grid " << dmin;
    if (c.witness)
      detail << "; r' <= 0 first at x = " << *c.witness;
    c.detail = detail.str();
    report.checks.push_back(c);
  }
  return report;
}

const HiddenTruth& Dataset::require_hidden(const char* who) const
{
  if (!hidden)
    throw ConfigError(std::string(who) + " requires a dataset with hidden truth (oracle mode)");
  return *hidden;
}

Dataset sample(const Scenario& s, std::size_t n, std::uint64_t seed)
{
  if (n < 1)
    throw ConfigError("sample size must be at least 1");
  Dataset d;
  d.seed = seed;
  d.scenario = s.name;
  d.x.resize(n);
  d.y.resize(n);
  HiddenTruth hidden;
  hidden.errors.resize(n);
  hidden.regression_values.resize(n);
  CounterRng covariate_stream(seed, 0, 0);
  CounterRng error_stream(seed, 0, 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = s.covariate->quantile(covariate_stream.uniform01());
    const double e = s.error->quantile(error_stream.uniform01());
    const double rx = s.regression->value(x);
    d.x[j] = x;
    hidden.errors[j] = e;
    hidden.regression_values[j] = rx;
    d.y[j] = rx + e;
  }
  d.hidden = std::move(hidden);
  return d;
}

} // namespace respdens
