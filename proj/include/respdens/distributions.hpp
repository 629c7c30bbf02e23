#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

namespace respdens {

using Json = nlohmann::json;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Covariate densities on [0, 1]

class CovariateLaw
{
public:
  virtual ~CovariateLaw() = default;
  virtual double pdf(double x) const = 0;
  virtual double cdf(double x) const = 0;
  virtual double quantile(double u) const = 0;
  virtual Json to_json() const = 0;
};

class UniformCovariate final : public CovariateLaw
{
public:
  double pdf(double x) const override { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; }
  double cdf(double x) const override;
  double quantile(double u) const override { return u; }
  Json to_json() const override { return {{"family", "uniform"}}; }
};

class BetaCovariate final : public CovariateLaw
{
public:
  BetaCovariate(double alpha, double beta);
  double pdf(double x) const override;
  double cdf(double x) const override;
  double quantile(double u) const override;
  Json to_json() const override;

private:
  double alpha_;
  double beta_;
};

// ---------------------------------------------------------------------------
// Regression functions on [0, 1]

class RegressionFunction
{
public:
  virtual ~RegressionFunction() = default;
  virtual double value(double x) const = 0;
  virtual double d1(double x) const = 0;
  virtual double d2(double x) const = 0;
  //! Closed-form inverse on [r(0), r(1)] when r is strictly increasing on
  //! [0, 1]; nullopt otherwise.
  virtual std::optional<double> inverse(double z) const = 0;
  virtual Json to_json() const = 0;
};

class LinearRegression final : public RegressionFunction
{
public:
  LinearRegression(double intercept, double slope);
  double value(double x) const override { return intercept_ + slope_ * x; }
  double d1(double) const override { return slope_; }
  double d2(double) const override { return 0.0; }
  std::optional<double> inverse(double z) const override;
  Json to_json() const override;

private:
  double intercept_;
  double slope_;
};

//! r(x) = exp(x).
class ExponentialRegression final : public RegressionFunction
{
public:
  double value(double x) const override;
  double d1(double x) const override { return value(x); }
  double d2(double x) const override { return value(x); }
  std::optional<double> inverse(double z) const override;
  Json to_json() const override { return {{"family", "exp"}}; }
};

//! r(x) = a + b x + c x^2.
class QuadraticRegression final : public RegressionFunction
{
public:
  QuadraticRegression(double a, double b, double c);
  double value(double x) const override { return a_ + x * (b_ + c_ * x); }
  double d1(double x) const override { return b_ + 2.0 * c_ * x; }
  double d2(double) const override { return 2.0 * c_; }
  std::optional<double> inverse(double z) const override;
  Json to_json() const override;

private:
  double a_;
  double b_;
  double c_;
};

//! r(x) = amplitude * sin(2 pi frequency x).
class SineRegression final : public RegressionFunction
{
public:
  SineRegression(double amplitude, double frequency);
  double value(double x) const override;
  double d1(double x) const override;
  double d2(double x) const override;
  std::optional<double> inverse(double) const override { return std::nullopt; }
  Json to_json() const override;

private:
  double amplitude_;
  double frequency_;
};

// ---------------------------------------------------------------------------
// Error densities

class ErrorLaw
{
public:
  virtual ~ErrorLaw() = default;
  virtual double pdf(double z) const = 0;
  //! order in 1..3
  virtual double pdf_derivative(double z, int order) const = 0;
  virtual double cdf(double z) const = 0;
  virtual double quantile(double u) const = 0;
  //! Location score -f'/f.
  virtual double score(double z) const = 0;
  virtual double variance() const = 0;
  //! Integral of score^2 f; kInf when not finite.
  virtual double fisher_information() const = 0;
  //! Supremum of the orders r with E|eps|^r finite (kInf for all moments).
  virtual double moment_order() const = 0;
  virtual bool is_normal() const { return false; }
  //! Support [lo, hi]; infinite for unbounded laws.
  virtual std::pair<double, double> support() const { return {-kInf, kInf}; }
  virtual Json to_json() const = 0;
};

class NormalError final : public ErrorLaw
{
public:
  explicit NormalError(double sd = 1.0);
  double pdf(double z) const override;
  double pdf_derivative(double z, int order) const override;
  double cdf(double z) const override;
  double quantile(double u) const override;
  double score(double z) const override { return z / (sd_ * sd_); }
  double variance() const override { return sd_ * sd_; }
  double fisher_information() const override { return 1.0 / (sd_ * sd_); }
  double moment_order() const override { return kInf; }
  bool is_normal() const override { return true; }
  Json to_json() const override { return {{"family", "normal"}, {"sd", sd_}}; }

private:
  double sd_;
};

class LogisticError final : public ErrorLaw
{
public:
  explicit LogisticError(double scale = 1.0);
  double pdf(double z) const override;
  double pdf_derivative(double z, int order) const override;
  double cdf(double z) const override;
  double quantile(double u) const override;
  double score(double z) const override;
  double variance() const override;
  double fisher_information() const override { return 1.0 / (3.0 * scale_ * scale_); }
  double moment_order() const override { return kInf; }
  Json to_json() const override { return {{"family", "logistic"}, {"scale", scale_}}; }

private:
  double scale_;
};

class StudentTError final : public ErrorLaw
{
public:
  explicit StudentTError(double dof);
  double pdf(double z) const override;
  double pdf_derivative(double z, int order) const override;
  double cdf(double z) const override;
  double quantile(double u) const override;
  double score(double z) const override;
  double variance() const override;
  double fisher_information() const override;
  double moment_order() const override { return dof_; }
  Json to_json() const override { return {{"family", "student-t"}, {"dof", dof_}}; }

private:
  double dof_;
  double norm_;
};

//! (15 / 16 s)(1 - (z/s)^2)^2 on [-s, s]; its second derivative jumps at
//! the support ends.
class BiweightError final : public ErrorLaw
{
public:
  explicit BiweightError(double half_width = 1.0);
  double pdf(double z) const override;
  double pdf_derivative(double z, int order) const override;
  double cdf(double z) const override;
  double quantile(double u) const override;
  double score(double z) const override;
  double variance() const override { return s_ * s_ / 7.0; }
  double fisher_information() const override { return 10.0 / (s_ * s_); }
  double moment_order() const override { return kInf; }
  std::pair<double, double> support() const override { return {-s_, s_}; }
  Json to_json() const override { return {{"family", "biweight"}, {"half_width", s_}}; }

private:
  double s_;
};

std::shared_ptr<const CovariateLaw> covariate_from_json(const Json& j);
std::shared_ptr<const RegressionFunction> regression_from_json(const Json& j);
std::shared_ptr<const ErrorLaw> error_from_json(const Json& j);

} // namespace respdens
