#pragma once

// Projection of a unit Gaussian onto the span of Gaussians centred on a grid
// of spacing delta, and the near-indistinguishable mixture pair built from
// the projection coefficients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hermix/bigreal.hpp"
#include "hermix/errors.hpp"
#include "hermix/hermite.hpp"
#include "hermix/matrix.hpp"
#include "hermix/mixture.hpp"
#include "hermix/parallel.hpp"
#include "hermix/quadrature.hpp"
#include "hermix/rng.hpp"

namespace hermix {

inline constexpr unsigned kMaxGridCells = 40;

/// m = 1/delta, rejecting non-integer reciprocals and m > 40.
inline unsigned grid_cells(double delta) {
  if (!(delta > 0.0)) fail(ErrorCode::InvalidArgument, "delta must be positive");
  const double inv = 1.0 / delta;
  const double m = std::round(inv);
  if (std::abs(inv - m) > 1e-9 * inv || m < 1.0)
    fail(ErrorCode::InvalidArgument, "1/delta must be an integer, got " + format_double(inv));
  if (m > kMaxGridCells) fail(ErrorCode::InvalidArgument, "1/delta must be at most 40");
  return static_cast<unsigned>(m);
}

/// Grid node i/m at full precision.
inline BigReal grid_node(long i, unsigned m, unsigned bits) { return BigReal(i, bits) / BigReal(static_cast<long>(m), bits); }

/// <g_a, u~_i> where u~_i is the Gram-Schmidt residual of g_{i delta}
/// against g_0, ..., g_{(i-1) delta}:
/// (1/sqrt(4 pi)) e^{-a^2/4} e^{-i delta^2/4} prod_{k=1}^{i} (e^{a delta/2 - (k-1) delta^2/2} - 1).
inline BigReal gs_inner(const BigReal& a, unsigned i, const BigReal& delta, unsigned bits) {
  const BigReal aa = a.with_precision(bits);
  const BigReal d = delta.with_precision(bits);
  const BigReal d2 = d * d;
  BigReal out = exp(aa * aa * -0.25 - d2 * (0.25 * i)) / sqrt(BigReal::pi(bits) * 4.0);
  for (unsigned k = 1; k <= i; ++k) out *= expm1(aa * d * 0.5 - d2 * (0.5 * (k - 1)));
  return out;
}

inline BigReal gs_inner(double a, unsigned i, double delta, unsigned bits) {
  return gs_inner(BigReal(a, bits), i, BigReal(delta, bits), bits);
}

/// ||u~_i||^2 = (1/sqrt(4 pi)) prod_{k=1}^{i} (1 - e^{-k delta^2/2}).
inline BigReal gs_norm_sq(unsigned i, const BigReal& delta, unsigned bits) {
  const BigReal d2 = delta.with_precision(bits) * delta.with_precision(bits);
  BigReal out = 1.0 / sqrt(BigReal::pi(bits) * 4.0);
  for (unsigned k = 1; k <= i; ++k) out *= -expm1(d2 * (-0.5 * k));
  return out;
}

namespace detail {

/// alpha_i = e^{-a^2/4} e^{i^2 d^2/4} L_i(e^{a d/2}) with L_i the Lagrange basis
/// on nodes x_j = e^{j d^2/2}, j < count.
inline BigVector lagrange_projection(const BigReal& a, const BigReal& d, unsigned count, unsigned bits) {
  const BigReal d2 = d * d;
  const BigReal y = exp(a * d * 0.5);
  BigVector x;
  x.reserve(count);
  for (unsigned j = 0; j < count; ++j) x.push_back(exp(d2 * (0.5 * j)));
  const BigReal lead = exp(a * a * -0.25);
  BigVector alpha;
  alpha.reserve(count);
  for (unsigned i = 0; i < count; ++i) {
    BigReal num(1, bits), den(1, bits);
    for (unsigned j = 0; j < count; ++j) {
      if (j == i) continue;
      num *= y - x[j];
      den *= x[i] - x[j];
    }
    alpha.push_back(lead * exp(d2 * (0.25 * i * i)) * num / den);
  }
  return alpha;
}

inline bool agree(const BigVector& a, const BigVector& b, long rel_exp) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    const BigReal diff = abs(a[k] - b[k]);
    if (diff.is_zero()) continue;
    if (a[k].is_zero() || diff.exponent2() - a[k].exponent2() > rel_exp) return false;
  }
  return true;
}

}  // namespace detail

/// Coefficients projecting g_a (default a = -1) onto g_0, g_delta, ...,
/// g_{(count-1) delta}. count defaults to m + 1 (the grid on [0, 1]).
/// The result is recomputed 64 bits wider; disagreement beyond half the
/// working precision raises PrecisionExhausted.
inline BigVector projection_coeffs_closed(double delta, unsigned bits, unsigned count = 0, double a = -1.0) {
  const unsigned m = grid_cells(delta);
  if (count == 0) count = m + 1;
  const BigReal da(a, bits + 64);
  const BigVector wide = detail::lagrange_projection(da, grid_node(1, m, bits + 64), count, bits + 64);
  const BigVector alpha = detail::lagrange_projection(da.with_precision(bits), grid_node(1, m, bits), count, bits);
  if (!detail::agree(wide, alpha, -static_cast<long>(bits) / 2))
    fail(ErrorCode::PrecisionExhausted, "closed-form coefficients unstable at " + std::to_string(bits) + " bits");
  return alpha;
}

struct GridProjection {
  double a = -1.0;
  double delta = 0.0;
  unsigned m = 0;
  unsigned bits = 0;
  std::vector<double> grid;
  BigVector alpha;
  BigReal beta;
  BigReal c_plus;
  BigReal c_minus;
};

inline void split_signs(const BigVector& alpha, unsigned bits, BigReal& c_plus, BigReal& c_minus) {
  c_plus = BigReal(bits);
  c_minus = BigReal(bits);
  for (const auto& v : alpha) {
    if (v.sign() >= 0)
      c_plus += v;
    else
      c_minus -= v;
  }
}

/// Solves the Gram system of grid Gaussians; beta by Pythagoras with
/// ||g_a||^2 = 1/sqrt(4 pi).
inline GridProjection project_gaussian(double a, double delta, unsigned bits, unsigned count = 0) {
  const unsigned m = grid_cells(delta);
  if (count == 0) count = m + 1;
  GridProjection p;
  p.a = a;
  p.delta = delta;
  p.m = m;
  p.bits = bits;
  const BigReal ba(a, bits);
  DenseMatrix g(count, count, bits);
  BigVector rhs;
  for (unsigned i = 0; i < count; ++i) {
    p.grid.push_back(static_cast<double>(i) / m);
    for (unsigned k = 0; k < count; ++k) g(i, k) = gaussian_overlap(grid_node(i, m, bits), grid_node(k, m, bits), bits);
    rhs.push_back(gaussian_overlap(ba, grid_node(i, m, bits), bits));
  }
  p.alpha = solve_linear(g, rhs, bits);
  BigReal proj_sq(bits);
  for (unsigned i = 0; i < count; ++i) proj_sq += p.alpha[i] * rhs[i];
  const BigReal beta_sq = 1.0 - proj_sq * sqrt(BigReal::pi(bits) * 4.0);
  if (!(beta_sq.sign() > 0))
    fail(ErrorCode::PrecisionExhausted, "projection residual vanished at " + std::to_string(bits) + " bits");
  p.beta = sqrt(beta_sq);
  split_signs(p.alpha, bits, p.c_plus, p.c_minus);
  return p;
}

enum class BetaRoute { Gram, Recur, StRecurrence };

/// beta for projecting g_{-1} onto the grid on [0, 1].
inline BigReal beta(double delta, BetaRoute route, unsigned bits) {
  const unsigned m = grid_cells(delta);
  const BigReal d = grid_node(1, m, bits);
  BigReal beta_sq(bits);
  switch (route) {
    case BetaRoute::Gram:
      return project_gaussian(-1.0, delta, bits).beta;
    case BetaRoute::Recur: {
      // 1 - sum_i <v, u~_i>^2 / (||v||^2 ||u~_i||^2)
      const BigReal v_sq = 1.0 / sqrt(BigReal::pi(bits) * 4.0);
      const BigReal a(-1, bits);
      beta_sq = BigReal(1, bits);
      for (unsigned i = 0; i <= m; ++i) {
        const BigReal c = gs_inner(a, i, d, bits);
        beta_sq -= c * c / (v_sq * gs_norm_sq(i, d, bits));
      }
      break;
    }
    case BetaRoute::StRecurrence: {
      // y = e^{-delta^2/2}; S_0 = 1 - y^{m^2}; S_i = S_{i-1} - y^{m^2+i} T_i,
      // T_i = prod_{j<=i} (1 - y^{m-1+j})^2 / (1 - y^j). Factors 1 - y^k are
      // taken as -expm1(-k delta^2/2) to keep them accurate near y = 1.
      const BigReal h = d * d * -0.5;  // log y
      auto one_minus_pow = [&](long k) { return -expm1(h * static_cast<double>(k)); };
      const long mm = static_cast<long>(m) * m;
      BigReal s = one_minus_pow(mm);
      BigReal t(1, bits);
      for (unsigned i = 1; i <= m; ++i) {
        const BigReal f = one_minus_pow(static_cast<long>(m) - 1 + i);
        t *= f * f / one_minus_pow(i);
        s -= exp(h * static_cast<double>(mm + i)) * t;
      }
      beta_sq = s;
      break;
    }
  }
  if (!(beta_sq.sign() > 0) || beta_sq.exponent2() < -static_cast<long>(bits) + 32)
    fail(ErrorCode::PrecisionExhausted, "beta^2 lost to cancellation at " + std::to_string(bits) + " bits");
  return sqrt(beta_sq);
}

/// Atom list with full-precision weights.
struct BigAtoms {
  std::vector<BigReal> location;
  std::vector<BigReal> weight;

  void add(const BigReal& loc, const BigReal& w) {
    for (std::size_t k = 0; k < location.size(); ++k)
      if (location[k] == loc) {
        weight[k] += w;
        return;
      }
    location.push_back(loc);
    weight.push_back(w);
  }

  BigReal total(unsigned bits) const {
    BigReal s(bits);
    for (const auto& w : weight) s += w;
    return s;
  }

  MixingDensity to_mixing() const {
    std::vector<Atom> atoms;
    for (std::size_t k = 0; k < location.size(); ++k)
      if (!weight[k].is_zero()) atoms.push_back({location[k].to_double(), weight[k].to_double()});
    std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.location < y.location; });
    return MixingDensity::atoms(std::move(atoms));
  }
};

/// Signed combination sum_k c_k g_{x_k}, kept at full precision.
struct GaussianCombination {
  BigAtoms terms;

  void add(const BigAtoms& a, double scale, unsigned bits) {
    for (std::size_t k = 0; k < a.location.size(); ++k) terms.add(a.location[k], a.weight[k] * BigReal(scale, bits));
  }

  /// ||.||_2 exactly as a quadratic form in Gaussian overlaps.
  BigReal l2_norm(unsigned bits) const {
    BigReal s(bits);
    const auto& x = terms.location;
    const auto& c = terms.weight;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j) s += c[i] * c[j] * gaussian_overlap(x[i], x[j], bits);
    return sqrt(max(s, BigReal(bits)));
  }

  double eval(double x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < terms.location.size(); ++k)
      s += terms.weight[k].to_double() * normal_pdf(x - terms.location[k].to_double());
    return s;
  }

  /// Bound on the L1 error from rounding each coefficient to double.
  double rounding_bound(unsigned bits) const {
    BigReal s(bits);
    for (const auto& w : terms.weight) s += abs(w - BigReal(w.to_double(), bits));
    return s.to_double();
  }

  /// ||.||_1 by quadrature at double precision on the rounded coefficients.
  double l1_norm(double abs_tol) const {
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < terms.location.size(); ++k) {
      const double x = terms.location[k].to_double();
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    lo -= 12.0;
    hi += 12.0;
    QuadratureOptions opt;
    opt.abs_tol = abs_tol;
    opt.initial_panels = static_cast<int>(std::ceil(hi - lo)) * 8;
    opt.max_depth = 30;
    return integrate([this](double x) { return std::abs(eval(x)); }, lo, hi, opt);
  }
};

struct HardInstance {
  double delta = 0.0;
  unsigned m = 0;
  unsigned bits = 0;
  BigVector alpha;
  BigReal c_plus;
  BigReal c_minus;
  BigReal balance_weight;  // (C+ - C-)/C+
  BigAtoms f1_atoms, f1p_atoms, f2_atoms, f2p_atoms;
  IntervalGaussian f1, f1p, f2, f2p;
  TwoComponentMixture f, f_prime;

  /// f - f' (total) or f1 - f1' (component) as a signed Gaussian combination.
  GaussianCombination total_difference() const {
    GaussianCombination d;
    d.add(f1_atoms, 0.5, bits);
    d.add(f2_atoms, 0.5, bits);
    d.add(f1p_atoms, -0.5, bits);
    d.add(f2p_atoms, -0.5, bits);
    return d;
  }
  GaussianCombination component_difference() const {
    GaussianCombination d;
    d.add(f1_atoms, 1.0, bits);
    d.add(f1p_atoms, -1.0, bits);
    return d;
  }
};

/// Builds f = (f1 + f2)/2 and f' = (f1' + f2')/2 from the projection of g_{-1}
/// onto the grid on [0, 1] (f1, f1') and its mirror image on [-2, -1] (f2, f2').
inline HardInstance build_hard_instance(double delta, unsigned bits = 0) {
  HardInstance h;
  h.delta = delta;
  h.m = grid_cells(delta);
  h.bits = bits ? bits : required_precision(h.m);
  const unsigned b = h.bits;
  h.alpha = projection_coeffs_closed(delta, b);
  split_signs(h.alpha, b, h.c_plus, h.c_minus);
  const BigReal bal = h.c_plus - h.c_minus;
  if (bal.sign() < 0)
    fail(ErrorCode::InvalidBalance, "C+ - C- = " + bal.to_string(12) + " is negative; f1' would need a negative weight");
  h.balance_weight = bal / h.c_plus;
  for (unsigned i = 0; i <= h.m; ++i) {
    const BigReal x = grid_node(i, h.m, b);
    const BigReal xm = BigReal(-1, b) - x;  // mirrored node -1 - i delta
    const BigReal w = abs(h.alpha[i]) / h.c_plus;
    if (h.alpha[i].sign() >= 0) {
      h.f1_atoms.add(x, w);
      h.f2_atoms.add(xm, w);
    } else {
      h.f1p_atoms.add(x, w);
      h.f2p_atoms.add(xm, w);
    }
  }
  h.f1p_atoms.add(BigReal(0, b), h.balance_weight);
  h.f2p_atoms.add(BigReal(-1, b), h.balance_weight);
  h.f1 = {0.0, 1.0, h.f1_atoms.to_mixing()};
  h.f1p = {0.0, 1.0, h.f1p_atoms.to_mixing()};
  h.f2 = {-2.0, -1.0, h.f2_atoms.to_mixing()};
  h.f2p = {-2.0, -1.0, h.f2p_atoms.to_mixing()};
  h.f = {0.5, 0.5, h.f1, h.f2};
  h.f_prime = {0.5, 0.5, h.f1p, h.f2p};
  return h;
}

struct RateRow {
  double delta = 0.0;
  unsigned m = 0;
  double beta = 0.0;
  double c_plus = 0.0;
  double c_minus = 0.0;
  double balance_error = 0.0;
  double l2_total = 0.0;
  double l2_comp = 0.0;
  double l1_total = 0.0;
  double l1_comp = 0.0;
  double l1_rounding_bound = 0.0;  // not part of the CSV
};

inline RateRow rate_row(double delta, unsigned bits = 0) {
  const HardInstance h = build_hard_instance(delta, bits);
  RateRow r;
  r.delta = delta;
  r.m = h.m;
  r.beta = beta(delta, BetaRoute::StRecurrence, h.bits).to_double();
  r.c_plus = h.c_plus.to_double();
  r.c_minus = h.c_minus.to_double();
  r.balance_error = abs(h.c_plus - h.c_minus - 1.0).to_double();
  const GaussianCombination total = h.total_difference();
  const GaussianCombination comp = h.component_difference();
  r.l2_total = total.l2_norm(h.bits).to_double();
  r.l2_comp = comp.l2_norm(h.bits).to_double();
  // the difference is a smooth bump of width O(1), so L1 and L2 are of the
  // same order; tolerances are relative to L2
  r.l1_total = total.l1_norm(1e-7 * r.l2_total);
  r.l1_comp = comp.l1_norm(1e-7 * r.l2_comp);
  r.l1_rounding_bound = std::max(total.rounding_bound(h.bits), comp.rounding_bound(h.bits));
  return r;
}

/// Rows are independent and computed concurrently; order follows `deltas`.
inline std::vector<RateRow> rate_table(const std::vector<double>& deltas, unsigned bits = 0) {
  for (double d : deltas) grid_cells(d);
  std::vector<RateRow> rows(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t k) { rows[k] = rate_row(deltas[k], bits); });
  return rows;
}

/// Mixture of unit Gaussians at locations k * step with weights per arm.
/// Precomputing e^{-(k step)^2/2} lets every density value come from one
/// exp(-x^2/2) and powers of e^{x step}.
class GridPair {
 public:
  GridPair(const TwoComponentMixture& f, const TwoComponentMixture& g, double step) : step_(step) {
    std::map<long, std::pair<double, double>> w;
    auto collect = [&](const TwoComponentMixture& model, bool second) {
      for (int c = 0; c < 2; ++c) {
        const auto& comp = model.component(c);
        if (comp.nu.kind() != MixingDensity::Kind::Atoms)
          fail(ErrorCode::InvalidArgument, "distinguishing needs atom-type components");
        for (const auto& a : comp.nu.atom_list()) {
          const double kk = std::round(a.location / step);
          if (std::abs(a.location - kk * step) > 1e-9) fail(ErrorCode::InvalidArgument, "atom off the grid");
          auto& slot = w[static_cast<long>(kk)];
          (second ? slot.second : slot.first) += model.weight(c) * a.mass;
        }
      }
    };
    collect(f, false);
    collect(g, true);
    for (const auto& [k, ab] : w) {
      k_.push_back(k);
      const double base = std::exp(-0.5 * (k * step) * (k * step)) / std::sqrt(2.0 * M_PI);
      a_.push_back(ab.first * base);
      d_.push_back((ab.first - ab.second) * base);
    }
  }

  /// log f(x) - log g(x).
  double log_ratio(double x) const {
    const double r = std::exp(x * step_);
    const double g0 = std::exp(-0.5 * x * x);
    double fa = 0.0, diff = 0.0;
    double pw = std::pow(r, static_cast<double>(k_.front()));
    for (std::size_t i = 0; i < k_.size(); ++i) {
      if (i > 0) {
        const long gap = k_[i] - k_[i - 1];
        pw *= gap == 1 ? r : std::pow(r, static_cast<double>(gap));
      }
      fa += a_[i] * pw;
      diff += d_[i] * pw;
    }
    fa *= g0;
    diff *= g0;
    // log f - log g = -log(1 - diff/f)
    return -std::log1p(-diff / fa);
  }

 private:
  double step_;
  std::vector<long> k_;
  std::vector<double> a_, d_;
};

/// Fraction of trials in which the likelihood-ratio test names the arm that
/// generated n samples. Trial t draws its arm and samples from split(t).
inline double distinguish_demo(const TwoComponentMixture& f, const TwoComponentMixture& g, double step,
                               std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "trials must be positive");
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be positive");
  const GridPair pair(f, g, step);
  const CounterRng root(seed);
  std::size_t correct = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const CounterRng rng = root.split(t);
    const bool from_g = rng.uniform(0, 0) < 0.5;
    const TwoComponentMixture& model = from_g ? g : f;
    const CounterRng draws = rng.split(1);
    const double llr = chunked_sum(n, 1, [&](std::size_t b, std::size_t e, std::vector<double>& out) {
      double s = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        const IntervalGaussian& comp = draws.uniform(i, 0) < model.w1 ? model.comp1 : model.comp2;
        s += pair.log_ratio(comp.draw_location(draws.uniform(i, 1)) + draws.normal(i, 2));
      }
      out[0] += s;
    })[0];
    bool say_g = llr < 0.0;
    if (llr == 0.0) say_g = rng.uniform(0, 1) < 0.5;
    if (say_g == from_g) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(trials);
}

inline double distinguish_demo(double delta, std::size_t n, std::size_t trials, std::uint64_t seed,
                               unsigned bits = 0) {
  const HardInstance h = build_hard_instance(delta, bits);
  return distinguish_demo(h.f, h.f_prime, delta, n, trials, seed);
}

}  // namespace hermix
