#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace respdens {

//! Configuration or argument problems the caller can fix (CLI exit code 2).
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Numerical failures: quadrature non-convergence, degenerate smoother
//! windows, vanishing Fisher information estimates (CLI exit code 3).
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A local smoothing window contained no design points.
class DegenerateWindow : public NumericalError
{
public:
  explicit DegenerateWindow(double x)
    : DegenerateWindow(std::vector<double>{x})
  {}
  explicit DegenerateWindow(std::vector<double> xs)
    : NumericalError(message(xs))
    , xs_(std::move(xs))
  {}
  double x() const { return xs_.front(); }
  const std::vector<double>& points() const { return xs_; }

private:
  static std::string message(const std::vector<double>& xs)
  {
    std::ostringstream os;
    os.precision(10);
    os << "degenerate smoother window: no design points within bandwidth of x = ";
    for (std::size_t i = 0; i < xs.size() && i < 10; ++i)
      os << (i ? ", " : "") << xs[i];
    if (xs.size() > 10)
      os << " (and " << xs.size() - 10 << " more)";
    return os.str();
  }

  std::vector<double> xs_;
};

//! A check of the invariant suite failed (CLI exit code 4).
class InvariantFailure : public std::runtime_error
{
public:
  InvariantFailure(std::string name, const std::string& detail)
    : std::runtime_error(name + ": " + detail)
    , name_(std::move(name))
  {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

} // namespace respdens
