#pragma once

// Reference computations used only by tests. Each one takes a different
// route from the library code it checks.

#include <gmp.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hermix/bigreal.hpp"
#include "hermix/matrix.hpp"

namespace oracle {

using hermix::BigReal;
using hermix::BigVector;
using hermix::DenseMatrix;

/// Integer coefficients of the physicists' H_j (index = power), j <= 25.
inline std::vector<std::int64_t> hermite_poly(unsigned j) {
  std::vector<std::int64_t> prev{1}, cur{0, 2};
  if (j == 0) return prev;
  for (unsigned k = 1; k < j; ++k) {
    // H_{k+1} = 2x H_k - 2k H_{k-1}
    std::vector<std::int64_t> next(k + 2, 0);
    for (std::size_t p = 0; p < cur.size(); ++p) next[p + 1] += 2 * cur[p];
    for (std::size_t p = 0; p < prev.size(); ++p) next[p] -= 2 * static_cast<std::int64_t>(k) * prev[p];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// psi_j(x) = (-1)^j (2^j j! sqrt(pi))^{-1/2} H_j(x) e^{-x^2/2} from raw coefficients.
inline double hermite_direct(unsigned j, double x, unsigned bits = 256) {
  const auto c = hermite_poly(j);
  BigReal bx(x, bits), h(bits), pw(1, bits);
  for (auto coef : c) {
    h += pw * BigReal(static_cast<long>(coef), bits);
    pw *= bx;
  }
  BigReal norm = BigReal(std::ldexp(1.0, static_cast<int>(j)), bits) * BigReal::factorial(j, bits) *
                 sqrt(BigReal::pi(bits));
  BigReal v = h * exp(bx * bx * -0.5) / sqrt(norm);
  return (j % 2 ? -v : v).to_double();
}

/// Composite 5-point Gauss-Legendre on equal panels.
template <class F>
double gauss_legendre(const F& f, double a, double b, int panels) {
  static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                              0.2369268850561891};
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int k = 0; k < 5; ++k) s += w[k] * f(mid + 0.5 * h * x[k]);
  }
  return 0.5 * h * s;
}

/// Determinant by cofactor expansion along the first row.
inline BigReal laplace_det(const DenseMatrix& a, unsigned bits) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0).with_precision(bits);
  BigReal det(bits);
  for (std::size_t c = 0; c < n; ++c) {
    DenseMatrix minor(n - 1, n - 1, bits);
    for (std::size_t r = 1; r < n; ++r) {
      std::size_t cc = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == c) continue;
        minor(r - 1, cc++) = a(r, k);
      }
    }
    BigReal term = a(0, c) * laplace_det(minor, bits);
    if (c % 2) det -= term; else det += term;
  }
  return det;
}

/// x_i = det(A^{i->b}) / det(A).
inline BigVector cramer_solve(const DenseMatrix& a, const BigVector& b, unsigned bits) {
  const BigReal d = laplace_det(a, bits);
  BigVector x;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    DenseMatrix ai = a;
    for (std::size_t r = 0; r < a.rows(); ++r) ai(r, i) = b[r];
    x.push_back(laplace_det(ai, bits) / d);
  }
  return x;
}

/// Row sums of the n x n Hilbert matrix as exact rationals, then rounded.
inline BigVector hilbert_row_sums(unsigned n, unsigned bits) {
  BigVector out;
  for (unsigned i = 0; i < n; ++i) {
    mpq_t acc, term;
    mpq_init(acc);
    mpq_init(term);
    for (unsigned j = 0; j < n; ++j) {
      mpq_set_ui(term, 1, i + j + 1);
      mpq_add(acc, acc, term);
    }
    // numerator / denominator through BigReal at high precision
    auto str = [](mpz_srcptr z) {
      std::string buf(mpz_sizeinbase(z, 10) + 2, '\0');
      mpz_get_str(buf.data(), 10, z);
      return std::string(buf.c_str());
    };
    out.push_back(BigReal::from_string(str(mpq_numref(acc)), bits) / BigReal::from_string(str(mpq_denref(acc)), bits));
    mpq_clear(acc);
    mpq_clear(term);
  }
  return out;
}

/// Poisson upper tail sum_{j >= l} e^{-lam} lam^j / j!, summed directly.
inline double poisson_tail(double lam, unsigned l, unsigned bits = 256) {
  BigReal bl(lam, bits), term = exp(BigReal(-lam, bits)), sum(bits);
  for (unsigned j = 0; j < 400; ++j) {
    if (j > 0) term = term * bl / BigReal(static_cast<long>(j), bits);
    if (j >= l) sum += term;
  }
  return sum.to_double();
}

/// Explicit Gram-Schmidt on g_0, g_d, ..., g_{i d}: returns <g_a, u~_i>
/// and ||u~_i||^2 with all inner products from the overlap formula.
inline std::pair<BigReal, BigReal> gram_schmidt_gaussians(const BigReal& a, unsigned i, const BigReal& d,
                                                          unsigned bits) {
  // u~_k = sum_l coef[k][l] g_{l d}
  auto overlap = [&](const BigReal& x, const BigReal& y) {
    BigReal diff = x - y;
    return exp(diff * diff * -0.25) / sqrt(BigReal::pi(bits) * 4.0);
  };
  std::vector<BigVector> coef;
  auto node = [&](unsigned l) { return d * BigReal(static_cast<long>(l), bits); };
  auto inner_basis = [&](const BigVector& p, const BigVector& q) {
    BigReal s(bits);
    for (std::size_t x = 0; x < p.size(); ++x)
      for (std::size_t y = 0; y < q.size(); ++y) s += p[x] * q[y] * overlap(node(x), node(y));
    return s;
  };
  for (unsigned k = 0; k <= i; ++k) {
    BigVector c(k + 1, BigReal(bits));
    c[k] = BigReal(1, bits);
    BigVector gk(k + 1, BigReal(bits));
    gk[k] = BigReal(1, bits);
    for (unsigned l = 0; l < k; ++l) {
      const BigReal proj = inner_basis(gk, coef[l]) / inner_basis(coef[l], coef[l]);
      for (std::size_t x = 0; x < coef[l].size(); ++x) c[x] -= proj * coef[l][x];
    }
    coef.push_back(std::move(c));
  }
  BigReal ga(bits);
  for (std::size_t x = 0; x < coef[i].size(); ++x) ga += coef[i][x] * overlap(a, node(x));
  return {ga, inner_basis(coef[i], coef[i])};
}

}  // namespace oracle
