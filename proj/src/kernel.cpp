#include "respdens/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/multiprecision/cpp_int.hpp>

#include "respdens/error.hpp"
#include "respdens/quadrature.hpp"

namespace respdens {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using RationalPoly = std::vector<Rational>; // coefficients in powers of u

Rational exact_rational(double v)
{
  if (v == 0.0)
    return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(v, &exponent);
  // mantissa * 2^53 is an exact integer
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(scaled);
  if (exponent > 0) {
    boost::multiprecision::cpp_int p = 1;
    p <<= exponent;
    r *= Rational(p);
  } else if (exponent < 0) {
    boost::multiprecision::cpp_int p = 1;
    p <<= -exponent;
    r /= Rational(p);
  }
  return r;
}

double to_double(const Rational& r)
{
  return static_cast<double>(r);
}

Rational binomial(int n, int k)
{
  Rational result(1);
  for (int i = 1; i <= k; ++i) {
    result *= Rational(n - k + i);
    result /= Rational(i);
  }
  return result;
}

Rational power(const Rational& base, int e)
{
  Rational r(1);
  for (int i = 0; i < e; ++i)
    r *= base;
  return r;
}

// Re-express sum a_i (u - from)^i as sum b_i (u - to)^i.
RationalPoly shift_center(const RationalPoly& a, const Rational& from, const Rational& to)
{
  // (u - from) = (u - to) + (to - from)
  const Rational delta = to - from;
  const int deg = static_cast<int>(a.size()) - 1;
  RationalPoly b(a.size(), Rational(0));
  for (int i = 0; i <= deg; ++i) {
    if (a[i] == 0)
      continue;
    for (int m = 0; m <= i; ++m)
      b[m] += a[i] * binomial(i, m) * power(delta, i - m);
  }
  return b;
}

struct RationalPiece
{
  Rational lo;
  Rational hi;
  RationalPoly coeffs; // absolute powers of u
};

// Polynomial in t obtained by substituting s = alpha + beta t into the
// bivariate antiderivative A(s, t) = sum A[sig][tau] s^sig t^tau.
RationalPoly substitute(const std::vector<RationalPoly>& A,
                        const Rational& alpha, int beta, std::size_t out_size)
{
  RationalPoly out(out_size, Rational(0));
  for (std::size_t sig = 0; sig < A.size(); ++sig) {
    // (alpha + beta t)^sig = sum_l C(sig, l) alpha^{sig-l} beta^l t^l
    RationalPoly expansion(sig + 1, Rational(0));
    for (std::size_t l = 0; l <= sig; ++l) {
      if (beta == 0 && l > 0)
        break;
      expansion[l] = binomial(static_cast<int>(sig), static_cast<int>(l)) *
                     power(alpha, static_cast<int>(sig - l));
    }
    for (std::size_t tau = 0; tau < A[sig].size(); ++tau) {
      if (A[sig][tau] == 0)
        continue;
      for (std::size_t l = 0; l < expansion.size(); ++l) {
        if (expansion[l] != 0)
          out[l + tau] += A[sig][tau] * expansion[l];
      }
    }
  }
  return out;
}

double horner(const std::vector<double>& c, double x)
{
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it)
    acc = acc * x + *it;
  return acc;
}

} // namespace

Kernel::Kernel(std::vector<KernelPiece> pieces, std::string name)
  : pieces_(std::move(pieces))
  , name_(std::move(name))
{
  if (pieces_.empty())
    throw ConfigError("kernel needs at least one piece");
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    if (!(pieces_[p].hi > pieces_[p].lo))
      throw ConfigError("kernel piece with empty interval");
    if (p > 0 && pieces_[p].lo != pieces_[p - 1].hi)
      throw ConfigError("kernel pieces must be contiguous and sorted");
  }
  support_radius_ =
    std::max(std::abs(pieces_.front().lo), std::abs(pieces_.back().hi));

  for (const auto& piece : pieces_)
    degree_ = std::max(degree_, static_cast<int>(piece.coeffs.size()) - 1);

  derivs_.resize(pieces_.size());
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    auto current = pieces_[p].coeffs;
    for (int d = 0; d <= degree_ + 1; ++d) {
      derivs_[p].push_back(current);
      std::vector<double> next;
      for (std::size_t i = 1; i < current.size(); ++i)
        next.push_back(static_cast<double>(i) * current[i]);
      current = std::move(next);
    }
  }

  // smoothness: all derivatives up to d continuous at every knot, with the
  // kernel extended by zero outside its support
  auto value_at = [&](std::size_t p, int d, double u) {
    return horner(derivs_[p][d], u - pieces_[p].center);
  };
  smoothness_ = degree_;
  for (int d = 0; d <= degree_; ++d) {
    double scale = 1.0;
    for (std::size_t p = 0; p < pieces_.size(); ++p) {
      scale = std::max(scale, std::abs(value_at(p, d, pieces_[p].lo)));
      scale = std::max(scale, std::abs(value_at(p, d, pieces_[p].hi)));
    }
    double jump = std::abs(value_at(0, d, pieces_.front().lo));
    jump = std::max(jump, std::abs(value_at(pieces_.size() - 1, d, pieces_.back().hi)));
    for (std::size_t p = 0; p + 1 < pieces_.size(); ++p) {
      jump = std::max(jump, std::abs(value_at(p, d, pieces_[p].hi) -
                                     value_at(p + 1, d, pieces_[p + 1].lo)));
    }
    if (jump > 1e-9 * scale) {
      smoothness_ = d - 1;
      break;
    }
  }

  constexpr double tol = 1e-10;
  order_ = 1;
  if (std::abs(moment(1)) <= tol) {
    order_ = 2;
    if (std::abs(moment(2)) <= tol)
      order_ = 3;
  }
}

const KernelPiece* Kernel::find_piece(double u) const
{
  if (u < pieces_.front().lo || u > pieces_.back().hi)
    return nullptr;
  for (const auto& piece : pieces_) {
    if (u < piece.hi)
      return &piece;
  }
  return &pieces_.back();
}

double Kernel::derivative(double u, int d) const
{
  if (d < 0)
    throw ConfigError("negative derivative order");
  const KernelPiece* piece = find_piece(u);
  if (piece == nullptr || d > degree_)
    return 0.0;
  const auto p = static_cast<std::size_t>(piece - pieces_.data());
  return horner(derivs_[p][d], u - piece->center);
}

double Kernel::moment(int m) const
{
  double total = 0.0;
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    const auto& piece = pieces_[p];
    total += quad::gauss_legendre(
      [&](double u) {
        return std::pow(u, m) * horner(piece.coeffs, u - piece.center);
      },
      piece.lo, piece.hi);
  }
  return total;
}

Kernel make_third_order_kernel()
{
  // Moment system for (c0 + c2 u^2)(1 - u^2)^3:
  //   c0 * 32/35  + c2 * 32/315  = 1
  //   c0 * 32/315 + c2 * 32/1155 = 0
  constexpr double c0 = 945.0 / 512.0;
  constexpr double c2 = -3465.0 / 512.0;
  // (1 - u^2)^3 = 1 - 3u^2 + 3u^4 - u^6
  const double base[7] = {1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0};
  std::vector<double> coeffs(9, 0.0);
  for (int i = 0; i < 7; ++i) {
    coeffs[i] += c0 * base[i];
    coeffs[i + 2] += c2 * base[i];
  }
  return Kernel({KernelPiece{-1.0, 1.0, 0.0, std::move(coeffs)}}, "third-order");
}

Kernel make_box_kernel(double half_width)
{
  if (!(half_width > 0.0))
    throw ConfigError("box kernel half width must be positive");
  return Kernel({KernelPiece{-half_width, half_width, 0.0, {0.5 / half_width}}},
                "box");
}

Kernel self_convolve(const Kernel& k)
{
  std::vector<RationalPiece> in;
  for (const auto& piece : k.pieces()) {
    RationalPoly centered;
    for (double c : piece.coeffs)
      centered.push_back(exact_rational(c));
    in.push_back({exact_rational(piece.lo), exact_rational(piece.hi),
                  shift_center(centered, exact_rational(piece.center), Rational(0))});
  }

  struct Contribution
  {
    Rational t0;
    Rational t1;
    RationalPoly poly;
  };
  std::vector<Contribution> contributions;
  std::vector<Rational> knots;
  std::size_t max_degree = 0;
  for (const auto& piece : in)
    max_degree = std::max(max_degree, piece.coeffs.size() - 1);
  const std::size_t out_size = 2 * max_degree + 2;

  for (const auto& P : in) {
    for (const auto& Q : in) {
      const Rational &a = P.lo, &b = P.hi, &c = Q.lo, &d = Q.hi;
      // bivariate integrand P(s) Q(t - s) in powers s^sig t^tau
      const std::size_t np = P.coeffs.size();
      const std::size_t nq = Q.coeffs.size();
      std::vector<RationalPoly> B(np + nq, RationalPoly(nq, Rational(0)));
      for (std::size_t i = 0; i < np; ++i) {
        if (P.coeffs[i] == 0)
          continue;
        for (std::size_t j = 0; j < nq; ++j) {
          if (Q.coeffs[j] == 0)
            continue;
          for (std::size_t kk = 0; kk <= j; ++kk) {
            Rational term = P.coeffs[i] * Q.coeffs[j] *
                            binomial(static_cast<int>(j), static_cast<int>(kk));
            if (kk % 2 == 1)
              term = -term;
            B[i + kk][j - kk] += term;
          }
        }
      }
      // antiderivative in s
      std::vector<RationalPoly> A(B.size() + 1, RationalPoly(nq, Rational(0)));
      for (std::size_t sig = 0; sig < B.size(); ++sig) {
        for (std::size_t tau = 0; tau < nq; ++tau)
          A[sig + 1][tau] = B[sig][tau] / Rational(static_cast<long long>(sig + 1));
      }

      std::vector<Rational> bp = {a + c, a + d, b + c, b + d};
      std::sort(bp.begin(), bp.end());
      for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
        if (bp[s] == bp[s + 1])
          continue;
        const Rational mid = (bp[s] + bp[s + 1]) / 2;
        // lower limit max(a, t - d), upper limit min(b, t - c)
        const bool lower_const = mid <= a + d;
        const bool upper_const = mid >= b + c;
        RationalPoly upper = upper_const ? substitute(A, b, 0, out_size)
                                         : substitute(A, -c, 1, out_size);
        RationalPoly lower = lower_const ? substitute(A, a, 0, out_size)
                                         : substitute(A, -d, 1, out_size);
        for (std::size_t l = 0; l < out_size; ++l)
          upper[l] -= lower[l];
        contributions.push_back({bp[s], bp[s + 1], std::move(upper)});
      }
      knots.insert(knots.end(), bp.begin(), bp.end());
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::vector<KernelPiece> out;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const Rational mid = (knots[i] + knots[i + 1]) / 2;
    RationalPoly sum(out_size, Rational(0));
    for (const auto& c : contributions) {
      if (c.t0 <= mid && mid <= c.t1) {
        for (std::size_t l = 0; l < out_size; ++l)
          sum[l] += c.poly[l];
      }
    }
    RationalPoly centered = shift_center(sum, Rational(0), mid);
    while (centered.size() > 1 && centered.back() == 0)
      centered.pop_back();
    std::vector<double> coeffs;
    for (const auto& r : centered)
      coeffs.push_back(to_double(r));
    out.push_back({to_double(knots[i]), to_double(knots[i + 1]), to_double(mid),
                   std::move(coeffs)});
  }
  return Kernel(std::move(out), k.name() + "*" + k.name());
}

double eval_scaled(const Kernel& k, double bandwidth, double t, int deriv_order)
{
  if (!(bandwidth > 0.0))
    throw ConfigError("bandwidth must be positive");
  if (deriv_order > k.smoothness()) {
    throw ConfigError("kernel too rough: derivative of order " +
                      std::to_string(deriv_order) + " requested but kernel '" +
                      k.name() + "' has only " + std::to_string(k.smoothness()) +
                      " continuous derivatives");
  }
  return k.derivative(t / bandwidth, deriv_order) /
         std::pow(bandwidth, 1 + deriv_order);
}

std::string to_string(BandwidthRule rule)
{
  switch (rule) {
    case BandwidthRule::KdeBaseline:
      return "kde-baseline";
    case BandwidthRule::Convolution:
      return "convolution";
    case BandwidthRule::Smoother:
      return "smoother";
    case BandwidthRule::Score:
      return "score";
  }
  return "unknown";
}

BandwidthRule bandwidth_rule_from_string(const std::string& name)
{
  for (auto rule : {BandwidthRule::KdeBaseline, BandwidthRule::Convolution,
                    BandwidthRule::Smoother, BandwidthRule::Score}) {
    if (to_string(rule) == name)
      return rule;
  }
  throw ConfigError("unknown bandwidth rule '" + name + "'");
}

double default_exponent(BandwidthRule rule)
{
  switch (rule) {
    case BandwidthRule::KdeBaseline:
      return -1.0 / 7.0;
    case BandwidthRule::Convolution:
      return -1.0 / 5.0;
    case BandwidthRule::Smoother:
      return -1.0 / 4.0;
    case BandwidthRule::Score:
      return -1.0 / 9.0;
  }
  return 0.0;
}

double BandwidthSchedule::exponent() const
{
  if (!exponent_override)
    return default_exponent(rule);
  const double e = *exponent_override;
  switch (rule) {
    case BandwidthRule::Convolution:
      // n b^6 -> 0 and n b^4 / log^4 n -> infinity
      if (!(e > -0.25 && e < -1.0 / 6.0))
        throw ConfigError("convolution bandwidth exponent must lie in (-1/4, -1/6)");
      return e;
    case BandwidthRule::Score:
      // a -> 0 and a^8 n -> infinity
      if (!(e > -0.125 && e < 0.0))
        throw ConfigError("score bandwidth exponent must lie in (-1/8, 0)");
      return e;
    default:
      throw ConfigError("bandwidth exponent of rule '" + to_string(rule) +
                        "' is fixed");
  }
}

double bandwidth(std::size_t n, const BandwidthSchedule& schedule)
{
  if (n < 2)
    throw ConfigError("bandwidth needs n >= 2");
  if (!(schedule.constant > 0.0))
    throw ConfigError("bandwidth constant must be positive");
  return schedule.constant * std::pow(static_cast<double>(n), schedule.exponent());
}

double LogisticKernel::operator()(double x) const
{
  const double e = std::exp(-std::abs(x));
  const double d = 1.0 + e;
  return e / (d * d);
}

double LogisticKernel::derivative(double x) const
{
  // kappa'(x) = -kappa(x) tanh(x / 2)
  return -(*this)(x)*std::tanh(0.5 * x);
}

} // namespace respdens
