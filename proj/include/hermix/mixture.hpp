#pragma once

// Interval-Gaussian mixtures f = w1 f1 + w2 f2 with f_i = nu_i * g_0, where
// each mixing density nu_i is a finite atom list or piecewise uniform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hermix/errors.hpp"
#include "hermix/hermite.hpp"
#include "hermix/parallel.hpp"
#include "hermix/quadrature.hpp"
#include "hermix/rng.hpp"

namespace hermix {

inline constexpr double kMassTolerance = 1e-12;

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

/// Phi(a) - Phi(b) for a >= b without cancellation in either tail.
inline double normal_mass(double a, double b) {
  if (b >= 0.0) return 0.5 * (std::erfc(b / M_SQRT2) - std::erfc(a / M_SQRT2));
  if (a <= 0.0) return 0.5 * (std::erfc(-a / M_SQRT2) - std::erfc(-b / M_SQRT2));
  return 1.0 - 0.5 * std::erfc(a / M_SQRT2) - 0.5 * std::erfc(-b / M_SQRT2);
}

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  double density = 0.0;
};

class MixingDensity {
 public:
  enum class Kind { Atoms, Piecewise };

  static MixingDensity atoms(std::vector<Atom> a) {
    MixingDensity m;
    m.kind_ = Kind::Atoms;
    m.atoms_ = std::move(a);
    return m;
  }

  static MixingDensity point_mass(double location) { return atoms({{location, 1.0}}); }

  static MixingDensity piecewise(std::vector<Piece> p) {
    MixingDensity m;
    m.kind_ = Kind::Piecewise;
    m.pieces_ = std::move(p);
    return m;
  }

  static MixingDensity uniform(double lo, double hi) { return piecewise({{lo, hi, 1.0 / (hi - lo)}}); }

  Kind kind() const { return kind_; }
  const std::vector<Atom>& atom_list() const { return atoms_; }
  const std::vector<Piece>& piece_list() const { return pieces_; }

  double total_mass() const {
    double s = 0.0;
    if (kind_ == Kind::Atoms)
      for (const auto& a : atoms_) s += a.mass;
    else
      for (const auto& p : pieces_) s += p.density * (p.hi - p.lo);
    return s;
  }

  /// Smallest closed interval containing the support.
  std::pair<double, double> support() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (kind_ == Kind::Atoms) {
      for (const auto& a : atoms_) {
        lo = std::min(lo, a.location);
        hi = std::max(hi, a.location);
      }
    } else {
      for (const auto& p : pieces_) {
        lo = std::min(lo, p.lo);
        hi = std::max(hi, p.hi);
      }
    }
    return {lo, hi};
  }

  double mean() const {
    double s = 0.0;
    if (kind_ == Kind::Atoms)
      for (const auto& a : atoms_) s += a.mass * a.location;
    else
      for (const auto& p : pieces_) s += p.density * (p.hi - p.lo) * 0.5 * (p.hi + p.lo);
    return s;
  }

  /// Inverse CDF of nu at u in [0, 1).
  double quantile(double u) const {
    double cum = 0.0;
    if (kind_ == Kind::Atoms) {
      for (const auto& a : atoms_) {
        cum += a.mass;
        if (u < cum) return a.location;
      }
      return atoms_.back().location;
    }
    for (const auto& p : pieces_) {
      const double mass = p.density * (p.hi - p.lo);
      if (mass > 0.0 && u < cum + mass) return std::min(p.hi, p.lo + (u - cum) / p.density);
      cum += mass;
    }
    return pieces_.back().hi;
  }

  /// Throws SchemaViolation naming the broken invariant.
  void validate(double lo, double hi) const {
    if (kind_ == Kind::Atoms) {
      if (atoms_.empty()) fail(ErrorCode::SchemaViolation, "atom list is empty");
      for (const auto& a : atoms_) {
        if (!std::isfinite(a.location) || !std::isfinite(a.mass) || !(a.mass > 0.0))
          fail(ErrorCode::SchemaViolation, "atom masses must be positive and finite");
      }
    } else {
      if (pieces_.empty()) fail(ErrorCode::SchemaViolation, "piece list is empty");
      for (const auto& p : pieces_) {
        if (!(p.hi > p.lo) || !(p.density >= 0.0) || !std::isfinite(p.density))
          fail(ErrorCode::SchemaViolation, "pieces need lo < hi and a finite nonnegative density");
      }
    }
    if (std::abs(total_mass() - 1.0) > kMassTolerance)
      fail(ErrorCode::SchemaViolation, "mixing density mass must sum to 1 within 1e-12");
    const auto [slo, shi] = support();
    if (slo < lo || shi > hi) fail(ErrorCode::SchemaViolation, "mixing density support must lie inside the interval");
  }

 private:
  Kind kind_ = Kind::Atoms;
  std::vector<Atom> atoms_;
  std::vector<Piece> pieces_;
};

/// f = nu * g_0 with supp(nu) inside [lo, hi].
struct IntervalGaussian {
  double lo = -0.5;
  double hi = 0.5;
  MixingDensity nu = MixingDensity::point_mass(0.0);

  double center() const { return 0.5 * (lo + hi); }

  void validate() const {
    if (!(lo < hi)) fail(ErrorCode::SchemaViolation, "interval requires lo < hi");
    nu.validate(lo, hi);
  }

  double pdf(double x) const {
    double s = 0.0;
    if (nu.kind() == MixingDensity::Kind::Atoms) {
      for (const auto& a : nu.atom_list()) s += a.mass * normal_pdf(x - a.location);
    } else {
      // int_lo^hi g_mu(x) dmu = Phi(x - lo) - Phi(x - hi)
      for (const auto& p : nu.piece_list()) s += p.density * normal_mass(x - p.lo, x - p.hi);
    }
    return s;
  }

  double cdf(double x) const {
    double s = 0.0;
    if (nu.kind() == MixingDensity::Kind::Atoms) {
      for (const auto& a : nu.atom_list()) s += a.mass * normal_cdf(x - a.location);
    } else {
      // int_lo^hi Phi(x - mu) dmu = G(x - lo) - G(x - hi), G(t) = t Phi(t) + phi(t)
      auto big_g = [](double t) { return t * normal_cdf(t) + normal_pdf(t); };
      for (const auto& p : nu.piece_list()) s += p.density * (big_g(x - p.lo) - big_g(x - p.hi));
    }
    return s;
  }

  /// Draw mu from nu at u, for sampling.
  double draw_location(double u) const { return nu.quantile(u); }
};

struct TwoComponentMixture {
  double w1 = 0.5;
  double w2 = 0.5;
  IntervalGaussian comp1;
  IntervalGaussian comp2;

  const IntervalGaussian& component(int i) const { return i == 0 ? comp1 : comp2; }
  double weight(int i) const { return i == 0 ? w1 : w2; }

  void validate() const {
    if (!(w1 > 0.0) || !(w2 > 0.0)) fail(ErrorCode::SchemaViolation, "weights must be positive");
    if (std::abs(w1 + w2 - 1.0) > kMassTolerance) fail(ErrorCode::SchemaViolation, "weights must sum to 1 within 1e-12");
    comp1.validate();
    comp2.validate();
    if (!(comp1.hi < comp2.lo || comp2.hi < comp1.lo))
      fail(ErrorCode::SchemaViolation, "component intervals must be disjoint");
  }

  double pdf(double x) const { return w1 * comp1.pdf(x) + w2 * comp2.pdf(x); }
  double cdf(double x) const { return w1 * comp1.cdf(x) + w2 * comp2.cdf(x); }

  std::pair<double, double> span() const {
    return {std::min(comp1.lo, comp2.lo), std::max(comp1.hi, comp2.hi)};
  }

  double mean() const { return w1 * comp1.nu.mean() + w2 * comp2.nu.mean(); }
};

inline double pdf_eval(const IntervalGaussian& c, double x) { return c.pdf(x); }
inline double pdf_eval(const TwoComponentMixture& m, double x) { return m.pdf(x); }

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Model JSON in canonical form (fixed key order, 17 significant digits).
inline std::string model_to_json_text(const TwoComponentMixture& model) {
  auto list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s + "]";
  };
  auto component = [&](const IntervalGaussian& c) {
    std::string s = "{\"interval\":" + list({c.lo, c.hi}) + ",\"mixing\":{";
    if (c.nu.kind() == MixingDensity::Kind::Atoms) {
      std::vector<double> loc, mass;
      for (const auto& a : c.nu.atom_list()) {
        loc.push_back(a.location);
        mass.push_back(a.mass);
      }
      s += "\"type\":\"atoms\",\"locations\":" + list(loc) + ",\"masses\":" + list(mass);
    } else {
      s += "\"type\":\"piecewise\",\"pieces\":[";
      bool first = true;
      for (const auto& p : c.nu.piece_list()) {
        s += (first ? "" : ",") + list({p.lo, p.hi, p.density});
        first = false;
      }
      s += "]";
    }
    return s + "}}";
  };
  return "{\"weights\":" + list({model.w1, model.w2}) + ",\"components\":[" + component(model.comp1) + "," +
         component(model.comp2) + "]}";
}

inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct SampleSet {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string model_digest;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

/// Draw n i.i.d. samples. Draw i uses counter i of the seeded generator:
/// lane 0 picks the component, lane 1 the location, lanes 2-3 the noise.
inline std::vector<double> sample_values(const TwoComponentMixture& model, std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<double> out(n);
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kReductionChunk);
    for (std::size_t i = c * kReductionChunk; i < end; ++i) {
      const IntervalGaussian& comp = rng.uniform(i, 0) < model.w1 ? model.comp1 : model.comp2;
      out[i] = comp.draw_location(rng.uniform(i, 1)) + rng.normal(i, 2);
    }
  });
  return out;
}

inline SampleSet sample(const TwoComponentMixture& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample size must be >= 1");
  return {sample_values(model, n, seed), seed, fnv1a_hex(model_to_json_text(model))};
}

enum class Norm { L1, L2 };

/// A pointwise-evaluable density with the region that carries its mass.
struct DensityView {
  std::function<double(double)> eval;
  double lo = 0.0;
  double hi = 0.0;
};

inline DensityView view(const IntervalGaussian& c) {
  return {[c](double x) { return c.pdf(x); }, c.lo, c.hi};
}

inline DensityView view(const TwoComponentMixture& m) {
  const auto [lo, hi] = m.span();
  return {[m](double x) { return m.pdf(x); }, lo, hi};
}

/// ||f - g|| over the union of supports padded by 12.
inline double distance(const DensityView& f, const DensityView& g, Norm norm, double abs_tol = 1e-10) {
  const double lo = std::min(f.lo, g.lo) - 12.0;
  const double hi = std::max(f.hi, g.hi) + 12.0;
  QuadratureOptions opt;
  opt.initial_panels = static_cast<int>(std::ceil(hi - lo)) * 4;
  bool finite = true;
  auto diff = [&](double x) {
    const double d = f.eval(x) - g.eval(x);
    if (!std::isfinite(d)) finite = false;
    return d;
  };
  double out = 0.0;
  if (norm == Norm::L1) {
    opt.abs_tol = abs_tol;
    out = integrate([&](double x) { return std::abs(diff(x)); }, lo, hi, opt);
  } else {
    // tolerance on the squared norm scaled so the root meets abs_tol when
    // the norm is O(1)
    opt.abs_tol = abs_tol * abs_tol;
    const double sq = integrate([&](double x) {
      const double d = diff(x);
      return d * d;
    }, lo, hi, opt);
    out = std::sqrt(std::max(sq, 0.0));
  }
  if (!finite || !std::isfinite(out)) fail(ErrorCode::NonFiniteDensity, "density evaluation produced a non-finite value");
  return out;
}

template <class A, class B>
double distance(const A& f, const B& g, Norm norm, double abs_tol = 1e-10) {
  return distance(view(f), view(g), norm, abs_tol);
}

/// alpha_j = <f_c, psi_{j,center}>.
inline double hermite_coefficient(const IntervalGaussian& c, double center, unsigned j) {
  check_order(j, 200);
  double s = 0.0;
  if (c.nu.kind() == MixingDensity::Kind::Atoms) {
    for (const auto& a : c.nu.atom_list()) s += a.mass * inner_with_gaussian(j, a.location - center);
    return s;
  }
  QuadratureOptions opt;
  opt.abs_tol = 1e-15;
  opt.initial_panels = 8;
  for (const auto& p : c.nu.piece_list()) {
    if (p.density == 0.0) continue;
    s += p.density *
         integrate([&](double mu) { return inner_with_gaussian(j, mu - center); }, p.lo, p.hi, opt);
  }
  return s;
}

/// alpha_0..alpha_{count-1} at `bits` precision. Pieces use the moment
/// recurrence I_j = 2(j-1) I_{j-2} - 2[mu^{j-1} e^{-mu^2/4}] for
/// I_j = int mu^j e^{-mu^2/4} dmu, which loses about log2(2^j j!) bits; the
/// working precision carries that loss.
inline std::vector<BigReal> hermite_coefficients(const IntervalGaussian& c, double center, unsigned count,
                                                 unsigned bits) {
  if (count == 0) return {};
  check_order(count - 1);
  const double n = count;
  const unsigned work = bits + 64 + static_cast<unsigned>(n + n * std::log2(n + 1.0));
  std::vector<BigReal> out(count, BigReal(work));
  // norm_j = (-1)^j / sqrt(2^{j+1} j! sqrt(pi))
  std::vector<BigReal> norm;
  norm.reserve(count);
  {
    const BigReal root_pi = sqrt(BigReal::pi(work));
    BigReal d = root_pi * 2.0;
    for (unsigned j = 0; j < count; ++j) {
      if (j > 0) d *= 2.0 * j;
      BigReal v = 1.0 / sqrt(d);
      norm.push_back(j % 2 ? -v : v);
    }
  }
  if (c.nu.kind() == MixingDensity::Kind::Atoms) {
    for (const auto& a : c.nu.atom_list()) {
      const BigReal mu(a.location - center, work);
      const BigReal g = exp(mu * mu * -0.25) * a.mass;
      BigReal pw(1, work);
      for (unsigned j = 0; j < count; ++j) {
        out[j] += norm[j] * pw * g;
        pw *= mu;
      }
    }
  } else {
    for (const auto& p : c.nu.piece_list()) {
      if (p.density == 0.0) continue;
      const BigReal a(p.lo - center, work);
      const BigReal b(p.hi - center, work);
      const BigReal ea = exp(a * a * -0.25);
      const BigReal eb = exp(b * b * -0.25);
      std::vector<BigReal> moment;
      moment.reserve(count);
      moment.push_back(sqrt(BigReal::pi(work)) * (erf(b * 0.5) - erf(a * 0.5)));
      if (count > 1) moment.push_back((ea - eb) * 2.0);
      BigReal pa = a, pb = b;  // a^{j-1}, b^{j-1} for j = 2
      for (unsigned j = 2; j < count; ++j) {
        moment.push_back((pa * ea - pb * eb) * 2.0 + moment[j - 2] * (2.0 * (j - 1)));
        pa *= a;
        pb *= b;
      }
      for (unsigned j = 0; j < count; ++j) out[j] += norm[j] * moment[j] * p.density;
    }
  }
  for (auto& v : out) v = v.with_precision(bits);
  return out;
}

/// Empirical CDF vs model CDF sup-distance.
inline double ks_distance(std::span<const double> values, const std::function<double(double)>& cdf) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    worst = std::max({worst, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return worst;
}

}  // namespace hermix
