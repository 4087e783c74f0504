#pragma once

// Hermite functions psi_j(x) = (-1)^j (2^j j! sqrt(pi))^{-1/2} H_j(x) e^{-x^2/2}
// (physicists' H_j, with the alternating sign), their shifted inner products,
// and Gaussian overlaps.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hermix/bigreal.hpp"
#include "hermix/errors.hpp"
#include "hermix/quadrature.hpp"

namespace hermix {

inline constexpr unsigned kMaxHermiteOrder = 512;

inline void check_order(unsigned j, unsigned limit = kMaxHermiteOrder) {
  if (j > limit)
    fail(ErrorCode::OrderTooLarge, "Hermite order " + std::to_string(j) + " exceeds " + std::to_string(limit));
}

/// psi_j(x) by the three-term recurrence on normalized functions.
template <class Real>
Real hermite_fn(unsigned j, const Real& x, unsigned bits) {
  check_order(j);
  using std::exp;
  using std::sqrt;
  using T = RealTraits<Real>;
  const Real pi = T::pi(bits);
  Real prev = exp(x * x * -0.5) / sqrt(sqrt(pi));
  if (j == 0) return prev;
  const Real sqrt2 = sqrt(T::make(2.0, bits));
  Real cur = -(sqrt2 * x * prev);
  for (unsigned k = 1; k < j; ++k) {
    const Real a = sqrt(T::make(2.0 / (k + 1.0), bits));
    const Real b = sqrt(T::make(static_cast<double>(k) / (k + 1.0), bits));
    Real next = -(a * x * cur) - b * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

inline double hermite_fn(unsigned j, double x) { return hermite_fn<double>(j, x, 53); }

/// psi_0(x), ..., psi_{out.size()-1}(x) in one recurrence pass.
inline void hermite_values(double x, std::span<double> out) {
  if (out.empty()) return;
  check_order(static_cast<unsigned>(out.size() - 1));
  static const double inv_pi_quarter = 1.0 / std::sqrt(std::sqrt(M_PI));
  out[0] = inv_pi_quarter * std::exp(-0.5 * x * x);
  if (out.size() == 1) return;
  out[1] = -M_SQRT2 * x * out[0];
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = -std::sqrt(2.0 / (kk + 1.0)) * x * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
  }
}

/// <g_mu1, g_mu2> for unit-variance Gaussian pdfs.
inline double gaussian_overlap(double mu1, double mu2) {
  const double d = mu1 - mu2;
  return std::exp(-0.25 * d * d) / std::sqrt(4.0 * M_PI);
}

inline BigReal gaussian_overlap(const BigReal& mu1, const BigReal& mu2, unsigned bits) {
  BigReal d = (mu1 - mu2).with_precision(bits);
  return exp(d * d * -0.25) / sqrt(BigReal::pi(bits) * 4.0);
}

/// <psi_{j1,0}, psi_{j2,mu}> by the exact finite sum over k <= min(j1, j2).
template <class Real>
Real inner_shifted(unsigned j1, unsigned j2, const Real& mu, unsigned bits) {
  check_order(j1);
  check_order(j2);
  using std::exp;
  using std::sqrt;
  using T = RealTraits<Real>;
  const Real a = mu / sqrt(T::make(2.0, bits));  // mu / sqrt(2)
  const Real b = -a;
  const unsigned kmax = j1 < j2 ? j1 : j2;
  const Real norm = sqrt(T::factorial(j1, bits) * T::factorial(j2, bits));
  Real sum = T::make(0.0, bits);
  for (unsigned k = 0; k <= kmax; ++k) {
    Real term = T::factorial(k, bits) * T::binomial(j1, k, bits) * T::binomial(j2, k, bits);
    // powers by repeated multiplication keep 0^0 = 1
    Real pa = T::make(1.0, bits);
    for (unsigned p = 0; p < j1 - k; ++p) pa *= a;
    Real pb = T::make(1.0, bits);
    for (unsigned p = 0; p < j2 - k; ++p) pb *= b;
    sum += term * pa * pb;
  }
  Real out = sum / norm * exp(mu * mu * -0.25);
  if ((j1 + j2) % 2 == 1) out = -out;
  return out;
}

/// Double-valued inner_shifted. Evaluated in extended precision because the
/// alternating sum cancels heavily for large orders and shifts.
inline double inner_shifted(unsigned j1, unsigned j2, double mu) {
  const double growth = (j1 + j2) * (std::log2(1.0 + std::abs(mu)) + 1.0) + 0.37 * mu * mu;
  const unsigned bits = 128 + static_cast<unsigned>(growth);
  return inner_shifted<BigReal>(j1, j2, BigReal(mu, bits), bits).to_double();
}

/// <psi_{j,0}, g_mu> = (-1)^j (2^{j+1} j! sqrt(pi))^{-1/2} e^{-mu^2/4} mu^j.
template <class Real>
Real inner_with_gaussian(unsigned j, const Real& mu, unsigned bits) {
  check_order(j);
  using std::exp;
  using std::sqrt;
  using T = RealTraits<Real>;
  Real pw = T::make(1.0, bits);
  for (unsigned p = 0; p < j; ++p) pw *= mu;
  Real denom = T::make(std::ldexp(1.0, static_cast<int>(j) + 1), bits) * T::factorial(j, bits) *
               sqrt(T::pi(bits));
  Real out = pw * exp(mu * mu * -0.25) / sqrt(denom);
  return (j % 2 == 1) ? Real(-out) : out;
}

inline double inner_with_gaussian(unsigned j, double mu) {
  check_order(j);
  if (mu == 0.0) return j == 0 ? 1.0 / std::sqrt(2.0 * std::sqrt(M_PI)) : 0.0;
  const double jj = static_cast<double>(j);
  const double log_mag = jj * std::log(std::abs(mu)) - 0.25 * mu * mu -
                         0.5 * ((jj + 1.0) * M_LN2 + std::lgamma(jj + 1.0) + 0.5 * std::log(M_PI));
  double out = std::exp(log_mag);
  if (mu < 0.0 && j % 2 == 1) out = -out;
  return (j % 2 == 1) ? -out : out;
}

/// ||psi_j||_1 by adaptive quadrature on +-(sqrt(2j+1) + 12).
inline double hermite_l1_norm(unsigned j, double abs_tol = 1e-10) {
  check_order(j, 200);
  const double half_width = std::sqrt(2.0 * j + 1.0) + 12.0;
  QuadratureOptions opt;
  opt.abs_tol = 0.5 * abs_tol;
  opt.initial_panels = 8 * static_cast<int>(j) + 16;
  // |psi_j| is even, so integrate one side.
  return 2.0 * integrate([j](double x) { return std::abs(hermite_fn(j, x)); }, 0.0, half_width, opt);
}

/// psi_{0..order-1} centred at `center`.
struct HermiteBasis {
  double center = 0.0;
  unsigned order = 1;

  HermiteBasis(double c, unsigned n) : center(c), order(n) {
    if (n < 1) fail(ErrorCode::InvalidArgument, "HermiteBasis order must be >= 1");
    check_order(n - 1);
  }

  std::vector<double> values(double x) const {
    std::vector<double> out(order);
    hermite_values(x - center, out);
    return out;
  }

  /// sum_j coeffs[j] psi_{j,center}(x)
  double expand(std::span<const double> coeffs, double x) const {
    std::vector<double> v = values(x);
    double s = 0.0;
    for (std::size_t j = 0; j < coeffs.size() && j < v.size(); ++j) s += coeffs[j] * v[j];
    return s;
  }
};

}  // namespace hermix
