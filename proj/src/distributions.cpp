#include "respdens/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "respdens/error.hpp"

namespace respdens {

namespace {

void require_positive(double v, const char* what)
{
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(what) + " must be positive and finite");
}

double get_number(const Json& j, const char* key, double fallback)
{
  if (!j.contains(key))
    return fallback;
  if (!j.at(key).is_number())
    throw ConfigError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string family_of(const Json& j, const char* what)
{
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw ConfigError(std::string(what) + " definition needs a string 'family' field");
  return j.at("family").get<std::string>();
}

// sech^2(x / 2), accurate in the tails
double sech2_half(double x)
{
  const double e = std::exp(-std::abs(x));
  const double d = 1.0 + e;
  return 4.0 * e / (d * d);
}

} // namespace

// -- covariates --------------------------------------------------------------

double UniformCovariate::cdf(double x) const
{
  return std::clamp(x, 0.0, 1.0);
}

BetaCovariate::BetaCovariate(double alpha, double beta)
  : alpha_(alpha)
  , beta_(beta)
{
  require_positive(alpha, "beta covariate alpha");
  require_positive(beta, "beta covariate beta");
}

double BetaCovariate::pdf(double x) const
{
  if (x < 0.0 || x > 1.0)
    return 0.0;
  return boost::math::pdf(boost::math::beta_distribution<>(alpha_, beta_), x);
}

double BetaCovariate::cdf(double x) const
{
  if (x <= 0.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  return boost::math::ibeta(alpha_, beta_, x);
}

double BetaCovariate::quantile(double u) const
{
  return boost::math::ibeta_inv(alpha_, beta_, u);
}

Json BetaCovariate::to_json() const
{
  return {{"family", "beta"}, {"alpha", alpha_}, {"beta", beta_}};
}

// -- regression functions ----------------------------------------------------

LinearRegression::LinearRegression(double intercept, double slope)
  : intercept_(intercept)
  , slope_(slope)
{}

std::optional<double> LinearRegression::inverse(double z) const
{
  if (!(slope_ > 0.0))
    return std::nullopt;
  return (z - intercept_) / slope_;
}

Json LinearRegression::to_json() const
{
  return {{"family", "linear"}, {"intercept", intercept_}, {"slope", slope_}};
}

double ExponentialRegression::value(double x) const
{
  return std::exp(x);
}

std::optional<double> ExponentialRegression::inverse(double z) const
{
  if (!(z > 0.0))
    return -kInf;
  return std::log(z);
}

QuadraticRegression::QuadraticRegression(double a, double b, double c)
  : a_(a)
  , b_(b)
  , c_(c)
{}

std::optional<double> QuadraticRegression::inverse(double z) const
{
  // increasing on [0, 1] iff r'(0) > 0 and r'(1) > 0
  if (!(d1(0.0) > 0.0 && d1(1.0) > 0.0))
    return std::nullopt;
  if (c_ == 0.0)
    return (z - a_) / b_;
  const double disc = b_ * b_ + 4.0 * c_ * (z - a_);
  if (disc < 0.0)
    return c_ > 0.0 ? -kInf : kInf;
  // numerically stable root of c x^2 + b x + (a - z) = 0 with r' > 0
  const double s = std::sqrt(disc);
  return 2.0 * (z - a_) / (b_ + s);
}

Json QuadraticRegression::to_json() const
{
  return {{"family", "quadratic"}, {"a", a_}, {"b", b_}, {"c", c_}};
}

SineRegression::SineRegression(double amplitude, double frequency)
  : amplitude_(amplitude)
  , frequency_(frequency)
{}

double SineRegression::value(double x) const
{
  return amplitude_ * std::sin(2.0 * std::numbers::pi * frequency_ * x);
}

double SineRegression::d1(double x) const
{
  const double w = 2.0 * std::numbers::pi * frequency_;
  return amplitude_ * w * std::cos(w * x);
}

double SineRegression::d2(double x) const
{
  const double w = 2.0 * std::numbers::pi * frequency_;
  return -amplitude_ * w * w * std::sin(w * x);
}

Json SineRegression::to_json() const
{
  return {{"family", "sine"}, {"amplitude", amplitude_}, {"frequency", frequency_}};
}

// -- error laws --------------------------------------------------------------

NormalError::NormalError(double sd)
  : sd_(sd)
{
  require_positive(sd, "normal error sd");
}

double NormalError::pdf(double z) const
{
  const double x = z / sd_;
  return std::exp(-0.5 * x * x) / (sd_ * std::sqrt(2.0 * std::numbers::pi));
}

double NormalError::pdf_derivative(double z, int order) const
{
  const double v = sd_ * sd_;
  const double f = pdf(z);
  switch (order) {
    case 1:
      return -z / v * f;
    case 2:
      return (z * z / (v * v) - 1.0 / v) * f;
    case 3:
      return (3.0 * z / (v * v) - z * z * z / (v * v * v)) * f;
    default:
      return order == 0 ? f : throw ConfigError("pdf derivative order must be 0..3");
  }
}

double NormalError::cdf(double z) const
{
  return 0.5 * std::erfc(-z / (sd_ * std::numbers::sqrt2));
}

double NormalError::quantile(double u) const
{
  return boost::math::quantile(boost::math::normal_distribution<>(0.0, sd_), u);
}

LogisticError::LogisticError(double scale)
  : scale_(scale)
{
  require_positive(scale, "logistic error scale");
}

double LogisticError::pdf(double z) const
{
  return sech2_half(z / scale_) / (4.0 * scale_);
}

double LogisticError::pdf_derivative(double z, int order) const
{
  const double x = z / scale_;
  const double t = std::tanh(0.5 * x);
  const double sh = sech2_half(x); // 1 - t^2
  const double s = scale_;
  switch (order) {
    case 0:
      return sh / (4.0 * s);
    case 1:
      return -t * sh / (4.0 * s * s);
    case 2:
      return -(1.0 - 3.0 * t * t) * sh / (8.0 * s * s * s);
    case 3:
      return t * (2.0 - 3.0 * t * t) * sh / (4.0 * s * s * s * s);
    default:
      throw ConfigError("pdf derivative order must be 0..3");
  }
}

double LogisticError::cdf(double z) const
{
  return 1.0 / (1.0 + std::exp(-z / scale_));
}

double LogisticError::quantile(double u) const
{
  return scale_ * std::log(u / (1.0 - u));
}

double LogisticError::score(double z) const
{
  return std::tanh(0.5 * z / scale_) / scale_;
}

double LogisticError::variance() const
{
  return std::numbers::pi * std::numbers::pi * scale_ * scale_ / 3.0;
}

StudentTError::StudentTError(double dof)
  : dof_(dof)
{
  require_positive(dof, "student-t degrees of freedom");
  norm_ = std::exp(std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof)) /
          std::sqrt(dof * std::numbers::pi);
}

double StudentTError::pdf(double z) const
{
  return norm_ * std::pow(1.0 + z * z / dof_, -0.5 * (dof_ + 1.0));
}

double StudentTError::pdf_derivative(double z, int order) const
{
  // f' = -l f, f'' = (l^2 - l') f, f''' = (-l^3 + 3 l l' - l'') f
  const double nu = dof_;
  const double s = nu + z * z;
  const double l = (nu + 1.0) * z / s;
  const double l1 = (nu + 1.0) * (nu - z * z) / (s * s);
  const double l2 = 2.0 * (nu + 1.0) * z * (z * z - 3.0 * nu) / (s * s * s);
  const double f = pdf(z);
  switch (order) {
    case 0:
      return f;
    case 1:
      return -l * f;
    case 2:
      return (l * l - l1) * f;
    case 3:
      return (-l * l * l + 3.0 * l * l1 - l2) * f;
    default:
      throw ConfigError("pdf derivative order must be 0..3");
  }
}

double StudentTError::cdf(double z) const
{
  return boost::math::cdf(boost::math::students_t_distribution<>(dof_), z);
}

double StudentTError::quantile(double u) const
{
  return boost::math::quantile(boost::math::students_t_distribution<>(dof_), u);
}

double StudentTError::score(double z) const
{
  return (dof_ + 1.0) * z / (dof_ + z * z);
}

double StudentTError::variance() const
{
  return dof_ > 2.0 ? dof_ / (dof_ - 2.0) : kInf;
}

double StudentTError::fisher_information() const
{
  return (dof_ + 1.0) / (dof_ + 3.0);
}

BiweightError::BiweightError(double half_width)
  : s_(half_width)
{
  require_positive(half_width, "biweight half width");
}

double BiweightError::pdf(double z) const
{
  return pdf_derivative(z, 0);
}

double BiweightError::pdf_derivative(double z, int order) const
{
  const double x = z / s_;
  if (!(std::abs(x) < 1.0))
    return 0.0;
  const double c = 15.0 / 16.0;
  const double w = 1.0 - x * x;
  switch (order) {
    case 0:
      return c * w * w / s_;
    case 1:
      return -4.0 * c * x * w / (s_ * s_);
    case 2:
      return c * (12.0 * x * x - 4.0) / (s_ * s_ * s_);
    case 3:
      return 24.0 * c * x / (s_ * s_ * s_ * s_);
    default:
      throw ConfigError("pdf derivative order must be 0..3");
  }
}

double BiweightError::cdf(double z) const
{
  const double x = z / s_;
  if (x <= -1.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  const double x3 = x * x * x;
  return 0.5 + (15.0 / 16.0) * (x - 2.0 * x3 / 3.0 + x3 * x * x / 5.0);
}

double BiweightError::quantile(double u) const
{
  return s_ * (2.0 * boost::math::ibeta_inv(3.0, 3.0, u) - 1.0);
}

double BiweightError::score(double z) const
{
  const double x = z / s_;
  if (!(std::abs(x) < 1.0))
    return std::copysign(kInf, x);
  return 4.0 * x / (s_ * (1.0 - x * x));
}

// -- JSON factories ----------------------------------------------------------

std::shared_ptr<const CovariateLaw> covariate_from_json(const Json& j)
{
  const auto family = family_of(j, "covariate");
  if (family == "uniform")
    return std::make_shared<UniformCovariate>();
  if (family == "beta")
    return std::make_shared<BetaCovariate>(get_number(j, "alpha", 2.0),
                                           get_number(j, "beta", 2.0));
  throw ConfigError("unknown covariate family '" + family + "' (uniform, beta)");
}

std::shared_ptr<const RegressionFunction> regression_from_json(const Json& j)
{
  const auto family = family_of(j, "regression");
  if (family == "linear")
    return std::make_shared<LinearRegression>(get_number(j, "intercept", 0.0),
                                              get_number(j, "slope", 1.0));
  if (family == "exp")
    return std::make_shared<ExponentialRegression>();
  if (family == "quadratic")
    return std::make_shared<QuadraticRegression>(
      get_number(j, "a", 0.0), get_number(j, "b", 1.0), get_number(j, "c", 0.0));
  if (family == "sine")
    return std::make_shared<SineRegression>(get_number(j, "amplitude", 1.0),
                                            get_number(j, "frequency", 1.0));
  throw ConfigError("unknown regression family '" + family +
                    "' (linear, exp, quadratic, sine)");
}

std::shared_ptr<const ErrorLaw> error_from_json(const Json& j)
{
  const auto family = family_of(j, "error");
  if (family == "normal")
    return std::make_shared<NormalError>(get_number(j, "sd", 1.0));
  if (family == "logistic")
    return std::make_shared<LogisticError>(get_number(j, "scale", 1.0));
  if (family == "student-t")
    return std::make_shared<StudentTError>(get_number(j, "dof", 3.0));
  if (family == "biweight")
    return std::make_shared<BiweightError>(get_number(j, "half_width", 1.0));
  throw ConfigError("unknown error family '" + family +
                    "' (normal, logistic, student-t, biweight)");
}

} // namespace respdens
