#pragma once

// Component recovery: project samples onto Hermite bases centred at the two
// interval midpoints, solve the 2l x 2l Gram system, then normalize the
// positive parts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hermix/bigreal.hpp"
#include "hermix/errors.hpp"
#include "hermix/hermite.hpp"
#include "hermix/matrix.hpp"
#include "hermix/mixture.hpp"
#include "hermix/parallel.hpp"
#include "hermix/quadrature.hpp"

namespace hermix {

inline constexpr unsigned kMaxEll = 64;
inline constexpr double kDegenerateMass = 1e-12;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double center() const { return 0.5 * (lo + hi); }
  double length() const { return hi - lo; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

struct GramSystem {
  unsigned ell = 0;
  double r1 = 0.0;
  double r2 = 0.0;
  unsigned bits = 0;
  DenseMatrix A;
  std::optional<BigVector> y;
  std::optional<BigVector> y_hat;

  std::size_t size() const { return 2 * static_cast<std::size_t>(ell); }
  double center(int i) const { return i == 0 ? r1 : r2; }
};

/// Gram matrix of psi_{j,r1}, psi_{j,r2}, j < ell. Index (i, j) maps to
/// row i*ell + j. Entries are computed with extra working bits and rounded.
inline GramSystem build_gram(double r1, double r2, unsigned ell, unsigned bits = 256) {
  if (ell < 1) fail(ErrorCode::InvalidArgument, "ell must be >= 1");
  if (ell > kMaxEll) fail(ErrorCode::OrderTooLarge, "ell " + std::to_string(ell) + " exceeds 64");
  if (!(r2 > r1)) fail(ErrorCode::OverlappingIntervals, "centers must satisfy r1 < r2");
  const std::size_t n = 2 * ell;
  DenseMatrix a = DenseMatrix::identity(n, bits);
  const double mu = r2 - r1;
  const unsigned work =
      bits + 64 + static_cast<unsigned>(2.0 * ell * (std::log2(1.0 + mu) + 1.0) + 0.37 * mu * mu);
  const BigReal bmu(mu, work);
  for (unsigned j1 = 0; j1 < ell; ++j1)
    for (unsigned j2 = 0; j2 < ell; ++j2) {
      BigReal v = inner_shifted<BigReal>(j1, j2, bmu, work).with_precision(bits);
      a(j1, ell + j2) = v;
      a(ell + j2, j1) = std::move(v);
    }
  return {ell, r1, r2, bits, std::move(a), std::nullopt, std::nullopt};
}

inline BigVector to_big(std::span<const double> v, unsigned bits) {
  BigVector out;
  out.reserve(v.size());
  for (double x : v) out.emplace_back(x, bits);
  return out;
}

inline std::vector<double> to_doubles(std::span<const BigReal> v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.to_double());
  return out;
}

/// Sample mean of psi_{j,r_i}(X). Chunked so the sum is thread-count independent.
inline std::vector<double> project_empirical(std::span<const double> samples, double r1, double r2, unsigned ell) {
  if (samples.empty()) fail(ErrorCode::EmptySample, "no samples to project");
  if (ell < 1 || ell > kMaxEll) fail(ErrorCode::OrderTooLarge, "ell out of range");
  const std::size_t width = 2 * ell;
  std::vector<double> sum = chunked_sum(samples.size(), width, [&](std::size_t b, std::size_t e, std::vector<double>& out) {
    std::vector<double> v(ell);
    for (std::size_t k = b; k < e; ++k) {
      hermite_values(samples[k] - r1, v);
      for (unsigned j = 0; j < ell; ++j) out[j] += v[j];
      hermite_values(samples[k] - r2, v);
      for (unsigned j = 0; j < ell; ++j) out[ell + j] += v[j];
    }
  });
  for (auto& s : sum) s /= static_cast<double>(samples.size());
  return sum;
}

/// int phi_h(u - x) psi_j(u) du for j < out.size(), phi_h the N(0, h^2) pdf.
/// With U ~ N(x/(1+h^2), h^2/(1+h^2)) and psi_j = p_j psi_0, this is
/// pi^{-1/4} e^{-x^2/(2(1+h^2))}/sqrt(1+h^2) E[p_j(U)], and Stein's identity
/// plus p_j' = -sqrt(2j) p_{j-1} give a three-term recurrence for E[p_j(U)].
inline void smoothed_hermite_values(double x, double h, std::span<double> out) {
  if (out.empty()) return;
  const double q = 1.0 + h * h;
  const double m = x / q;
  const double s2 = h * h / q;
  const double scale = std::exp(-0.5 * x * x / q) / std::sqrt(q) / std::sqrt(std::sqrt(M_PI));
  double prev = 1.0;
  double cur = -M_SQRT2 * m;
  out[0] = scale;
  if (out.size() > 1) out[1] = scale * cur;
  for (std::size_t j = 1; j + 1 < out.size(); ++j) {
    const double jj = static_cast<double>(j);
    const double next = -std::sqrt(2.0 / (jj + 1.0)) * m * cur - (1.0 - 2.0 * s2) * std::sqrt(jj / (jj + 1.0)) * prev;
    prev = cur;
    cur = next;
    out[j + 1] = scale * cur;
  }
}

inline double silverman_bandwidth(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  if (samples.size() < 2) return 1.0;
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  return 1.06 * std::sqrt(var) * std::pow(n, -0.2);
}

/// <f', psi_{j,r_i}> for the Gaussian KDE f' with bandwidth h, in closed form.
inline std::vector<double> project_via_kde(std::span<const double> samples, double bandwidth, double r1, double r2,
                                           unsigned ell) {
  if (samples.empty()) fail(ErrorCode::EmptySample, "no samples to project");
  if (!(bandwidth >= 0.0) || !std::isfinite(bandwidth))
    fail(ErrorCode::InvalidArgument, "bandwidth must be a nonnegative finite number");
  if (ell < 1 || ell > kMaxEll) fail(ErrorCode::OrderTooLarge, "ell out of range");
  std::vector<double> sum = chunked_sum(samples.size(), 2 * ell, [&](std::size_t b, std::size_t e, std::vector<double>& out) {
    std::vector<double> v(ell);
    for (std::size_t k = b; k < e; ++k) {
      smoothed_hermite_values(samples[k] - r1, bandwidth, v);
      for (unsigned j = 0; j < ell; ++j) out[j] += v[j];
      smoothed_hermite_values(samples[k] - r2, bandwidth, v);
      for (unsigned j = 0; j < ell; ++j) out[ell + j] += v[j];
    }
  });
  for (auto& s : sum) s /= static_cast<double>(samples.size());
  return sum;
}

/// Mixture components ordered by interval midpoint (left first).
inline std::array<std::pair<const IntervalGaussian*, double>, 2> ordered_components(const TwoComponentMixture& m) {
  if (m.comp1.center() <= m.comp2.center()) return {{{&m.comp1, m.w1}, {&m.comp2, m.w2}}};
  return {{{&m.comp2, m.w2}, {&m.comp1, m.w1}}};
}

/// lambda_{i,j} = w_i <f_i, psi_{j,r_i}>, the untruncated coefficients cut at ell.
inline BigVector true_lambda(const TwoComponentMixture& truth, const GramSystem& sys, unsigned bits) {
  const auto comps = ordered_components(truth);
  BigVector out;
  out.reserve(sys.size());
  for (int i = 0; i < 2; ++i) {
    auto alpha = hermite_coefficients(*comps[i].first, sys.center(i), sys.ell, bits);
    for (auto& a : alpha) out.push_back(a * comps[i].second);
  }
  return out;
}

/// y_{i,j} = <f, psi_{j,r_i}> exactly.
inline BigVector analytic_y(const TwoComponentMixture& truth, const GramSystem& sys, unsigned bits) {
  BigVector out(sys.size(), BigReal(bits));
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 2; ++c) {
      auto alpha = hermite_coefficients(truth.component(c), sys.center(i), sys.ell, bits);
      for (unsigned j = 0; j < sys.ell; ++j) out[i * sys.ell + j] += alpha[j] * truth.weight(c);
    }
  return out;
}

inline BigVector solve_components(const GramSystem& sys, std::span<const BigReal> y_input, unsigned bits) {
  if (y_input.size() != sys.size())
    fail(ErrorCode::DimensionMismatch, "right-hand side must have 2*ell entries");
  try {
    return solve_linear(sys.A, y_input, bits);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularMatrix)
      fail(ErrorCode::SingularMatrix, std::string(e.what()) + "; raise the precision or lower ell");
    throw;
  }
}

struct ComponentEstimate {
  unsigned ell = 0;
  std::array<double, 2> centers{};
  BigVector lambda_hat;
  std::array<std::vector<double>, 2> coeffs;
  std::array<double, 2> w_hat{};
  std::array<Interval, 2> support{};

  double f_tilde(int i, double x) const { return HermiteBasis(centers[i], ell).expand(coeffs[i], x); }
  double f_hat(int i, double x) const {
    if (x < support[i].lo || x > support[i].hi) return 0.0;
    return std::max(f_tilde(i, x), 0.0) / w_hat[i];
  }
  DensityView view(int i) const {
    return {[self = *this, i](double x) { return self.f_hat(i, x); }, support[i].lo, support[i].hi};
  }
};

/// Half-width beyond which psi_j, j < ell, is negligible (< 1e-18 or so).
inline double basis_reach(unsigned ell) { return std::sqrt(2.0 * ell + 1.0) + 12.0; }

/// Positive-part normalization of each signed component.
inline ComponentEstimate finalize(std::span<const BigReal> lambda_hat, double r1, double r2, unsigned ell) {
  if (lambda_hat.size() != 2 * static_cast<std::size_t>(ell))
    fail(ErrorCode::DimensionMismatch, "lambda_hat must have 2*ell entries");
  ComponentEstimate est;
  est.ell = ell;
  est.centers = {r1, r2};
  est.lambda_hat.assign(lambda_hat.begin(), lambda_hat.end());
  for (int i = 0; i < 2; ++i) {
    for (unsigned j = 0; j < ell; ++j) {
      const double v = lambda_hat[i * ell + j].to_double();
      if (!std::isfinite(v)) fail(ErrorCode::NonFiniteDensity, "lambda_hat has a non-finite entry");
      est.coeffs[i].push_back(v);
    }
    const double reach = basis_reach(ell);
    est.support[i] = {est.centers[i] - reach, est.centers[i] + reach};
    QuadratureOptions opt;
    opt.abs_tol = 1e-13;
    opt.initial_panels = 16 * static_cast<int>(reach);
    const HermiteBasis basis(est.centers[i], ell);
    const auto& c = est.coeffs[i];
    const double mass = integrate([&](double x) { return std::max(basis.expand(c, x), 0.0); }, est.support[i].lo,
                                  est.support[i].hi, opt);
    if (!(mass >= kDegenerateMass))
      fail(ErrorCode::DegenerateComponent,
           "component " + std::to_string(i + 1) + " has positive-part mass " + format_double(mass) + " below 1e-12");
    est.w_hat[i] = mass;
  }
  return est;
}

enum class ProjectionMode { Empirical, Kde };

struct EstimateOptions {
  unsigned ell = 4;
  ProjectionMode mode = ProjectionMode::Empirical;
  unsigned precision_bits = 0;  // 0: policy default
  double bandwidth = -1.0;      // < 0: Silverman
};

inline unsigned default_solver_bits(unsigned ell) { return ell <= 6 ? 128u : required_precision(ell); }

/// Orders two intervals left to right and rejects touching or overlapping ones.
inline std::pair<Interval, Interval> ordered_intervals(Interval a, Interval b) {
  if (!(a.lo < a.hi) || !(b.lo < b.hi)) fail(ErrorCode::SchemaViolation, "interval requires lo < hi");
  if (b.center() < a.center()) std::swap(a, b);
  if (!(b.lo > a.hi)) fail(ErrorCode::OverlappingIntervals, "intervals must be disjoint with a positive gap");
  return {a, b};
}

inline ComponentEstimate estimate(std::span<const double> samples, Interval i1, Interval i2,
                                  const EstimateOptions& opt = {}) {
  const auto [a, b] = ordered_intervals(i1, i2);
  if (samples.empty()) fail(ErrorCode::EmptySample, "no samples");
  const unsigned bits = opt.precision_bits ? opt.precision_bits : default_solver_bits(opt.ell);
  GramSystem sys = build_gram(a.center(), b.center(), opt.ell, std::max(bits, 128u));
  std::vector<double> y;
  if (opt.mode == ProjectionMode::Empirical) {
    y = project_empirical(samples, sys.r1, sys.r2, opt.ell);
  } else {
    const double h = opt.bandwidth < 0.0 ? silverman_bandwidth(samples) : opt.bandwidth;
    y = project_via_kde(samples, h, sys.r1, sys.r2, opt.ell);
  }
  sys.y_hat = to_big(y, bits);
  const BigVector lambda = solve_components(sys, *sys.y_hat, bits);
  return finalize(lambda, sys.r1, sys.r2, opt.ell);
}

struct ErrorSplit {
  BigVector e_t;
  BigVector e_a;
  BigVector lambda;  // truncated ground truth
  BigVector y;       // analytic right-hand side
};

/// e_a = A^{-1}(y' - y), e_t = A^{-1}(y - A lambda); lambda_hat - lambda = e_t + e_a.
inline ErrorSplit error_split(std::span<const BigReal> y_input, const TwoComponentMixture& truth, const GramSystem& sys,
                              unsigned bits) {
  ErrorSplit out;
  out.y = analytic_y(truth, sys, bits);
  out.lambda = true_lambda(truth, sys, bits);
  BigVector dy(sys.size(), BigReal(bits));
  for (std::size_t k = 0; k < sys.size(); ++k) dy[k] = y_input[k].with_precision(bits) - out.y[k];
  const DenseMatrix a = sys.A.with_precision(bits);
  const BigVector a_lambda = a.multiply(out.lambda);
  BigVector rt(sys.size(), BigReal(bits));
  for (std::size_t k = 0; k < sys.size(); ++k) rt[k] = out.y[k] - a_lambda[k];
  bool exact_input = true;
  for (const auto& v : dy) exact_input = exact_input && v.is_zero();
  out.e_a = exact_input ? BigVector(sys.size(), BigReal(bits)) : solve_components(sys, dy, bits);
  out.e_t = solve_components(sys, rt, bits);
  return out;
}

/// l = max(2, ceil(c ln(1/epsilon))).
inline unsigned choose_ell(double epsilon, double c = 2.0) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  if (!(c > 0.0)) fail(ErrorCode::InvalidArgument, "c must be positive");
  const double l = std::ceil(c * std::log(1.0 / epsilon) - 1e-12);
  return static_cast<unsigned>(std::max(2.0, l));
}

}  // namespace hermix
