#pragma once

#include <cmath>
#include <algorithm>
#include <concepts>
#include <limits>
#include <cstddef>
#include <span>
#include <vector>

namespace hermix {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int initial_panels = 16;
  int max_depth = 48;
};

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Stop once the request is below the rounding noise of the panel sum.
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       (b - a) * (std::abs(fa) + std::abs(flm) + std::abs(fm) + std::abs(frm) + std::abs(fb));
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, noise)) return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature with interval bisection. The range is first cut
/// into equal panels so narrow features are not missed by the initial sample.
template <class F>
  requires std::invocable<const F&, double>
double integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (!(b > a)) return 0.0;
  const int panels = opt.initial_panels < 1 ? 1 : opt.initial_panels;
  const double h = (b - a) / panels;
  const double tol = opt.abs_tol / panels;
  double total = 0.0;
  double x0 = a;
  double f0 = f(a);
  for (int p = 0; p < panels; ++p) {
    const double x1 = (p + 1 == panels) ? b : a + h * (p + 1);
    const double xm = 0.5 * (x0 + x1);
    const double fm = f(xm);
    const double f1 = f(x1);
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += detail::simpson_recurse(f, x0, x1, f0, fm, f1, whole, tol, opt.max_depth);
    x0 = x1;
    f0 = f1;
  }
  return total;
}

/// Integrates over consecutive segments of a sorted breakpoint list, splitting
/// the tolerance evenly.
template <class F>
double integrate_breakpoints(const F& f, std::span<const double> points, const QuadratureOptions& opt = {}) {
  if (points.size() < 2) return 0.0;
  QuadratureOptions seg = opt;
  seg.abs_tol = opt.abs_tol / static_cast<double>(points.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) total += integrate(f, points[i], points[i + 1], seg);
  return total;
}

}  // namespace hermix
