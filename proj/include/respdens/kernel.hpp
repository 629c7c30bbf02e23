#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace respdens {

//! One polynomial piece of a kernel, stored in powers of (u - center) for
//! numerical stability on short intervals.
struct KernelPiece
{
  double lo;
  double hi;
  double center;
  std::vector<double> coeffs; // coeffs[i] multiplies (u - center)^i
};

//! Compactly supported piecewise-polynomial kernel.
//!
//! Pieces must be contiguous and sorted; the kernel is zero outside the
//! union of the pieces. Smoothness (number of continuous derivatives,
//! -1 when the kernel itself jumps) and order are computed from the pieces
//! at construction. Immutable, so safe to share between threads.
class Kernel
{
public:
  Kernel(std::vector<KernelPiece> pieces, std::string name);

  double operator()(double u) const { return derivative(u, 0); }
  //! d-th derivative; uses the piece containing u (right-continuous at
  //! interior knots).
  double derivative(double u, int d) const;

  //! Integral of u^m k(u) by 64-point Gauss-Legendre per piece.
  double moment(int m) const;

  std::span<const KernelPiece> pieces() const { return pieces_; }
  double support_radius() const { return support_radius_; }
  int smoothness() const { return smoothness_; }
  //! Order in the "moments 1..order-1 vanish" sense, capped at 3. A kernel
  //! with unit mass and vanishing first and second moments reports 3.
  int order() const { return order_; }
  int degree() const { return degree_; }
  const std::string& name() const { return name_; }

private:
  const KernelPiece* find_piece(double u) const;

  std::vector<KernelPiece> pieces_;
  // derivative coefficient tables: derivs_[p][d] = coefficients of d-th
  // derivative of piece p
  std::vector<std::vector<std::vector<double>>> derivs_;
  std::string name_;
  double support_radius_ = 0.0;
  int smoothness_ = -1;
  int order_ = 0;
  int degree_ = 0;
};

//! (c0 + c2 u^2)(1 - u^2)^3 on [-1, 1] with c0 = 945/512, c2 = -3465/512:
//! unit mass, vanishing first and second moments, twice continuously
//! differentiable.
Kernel make_third_order_kernel();

//! Normalized box 1/(2 h) on [-h, h].
Kernel make_box_kernel(double half_width = 0.5);

//! Exact piecewise-polynomial self-convolution k * k, computed in rational
//! arithmetic and rounded once to double.
Kernel self_convolve(const Kernel& k);

//! k^{(d)}(t / b) / b^{1 + d}. Throws ConfigError if d exceeds the kernel's
//! smoothness or b <= 0.
double eval_scaled(const Kernel& k, double bandwidth, double t, int deriv_order = 0);

enum class BandwidthRule
{
  KdeBaseline,
  Convolution,
  Smoother,
  Score,
};

std::string to_string(BandwidthRule rule);
BandwidthRule bandwidth_rule_from_string(const std::string& name);

//! constant * n^exponent. Exponents default to -1/7, -1/5, -1/4, -1/9; the
//! convolution and score exponents may be overridden inside their
//! admissible open intervals (-1/4, -1/6) and (-1/8, 0).
struct BandwidthSchedule
{
  BandwidthRule rule = BandwidthRule::Convolution;
  double constant = 1.0;
  std::optional<double> exponent_override;

  double exponent() const;
};

double default_exponent(BandwidthRule rule);

double bandwidth(std::size_t n, const BandwidthSchedule& schedule);

//! Logistic density kappa(x) = e^{-x} / (1 + e^{-x})^2.
class LogisticKernel
{
public:
  double operator()(double x) const;
  double derivative(double x) const;

  //! kappa(x / a) / a and its derivative kappa'(x / a) / a^2.
  double scaled(double x, double a) const { return (*this)(x / a) / a; }
  double scaled_derivative(double x, double a) const
  {
    return derivative(x / a) / (a * a);
  }
};

inline LogisticKernel logistic_kernel() { return {}; }

} // namespace respdens
