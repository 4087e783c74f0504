#pragma once

// Dense extended-precision linear algebra: matrix container, LU with partial
// pivoting, and the precision policy used by the lower-bound computations.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hermix/bigreal.hpp"
#include "hermix/errors.hpp"

namespace hermix {

using BigVector = std::vector<BigReal>;

class DenseMatrix {
 public:
  DenseMatrix(std::size_t rows, std::size_t cols, unsigned bits)
      : rows_(rows), cols_(cols), bits_(bits), data_(rows * cols, BigReal(bits)) {
    if (rows == 0 || cols == 0) fail(ErrorCode::DimensionMismatch, "matrix dimensions must be positive");
  }

  static DenseMatrix identity(std::size_t n, unsigned bits) {
    DenseMatrix m(n, n, bits);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = BigReal(1, bits);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  unsigned precision() const { return bits_; }
  bool square() const { return rows_ == cols_; }

  BigReal& at(std::size_t r, std::size_t c) {
    check(r, c);
    return data_[r * cols_ + c];
  }
  const BigReal& at(std::size_t r, std::size_t c) const {
    check(r, c);
    return data_[r * cols_ + c];
  }
  BigReal& operator()(std::size_t r, std::size_t c) { return at(r, c); }
  const BigReal& operator()(std::size_t r, std::size_t c) const { return at(r, c); }

  DenseMatrix with_precision(unsigned bits) const {
    DenseMatrix out(rows_, cols_, bits);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k].with_precision(bits);
    return out;
  }

  BigVector multiply(std::span<const BigReal> x) const {
    if (x.size() != cols_) fail(ErrorCode::DimensionMismatch, "matrix-vector size mismatch");
    BigVector y;
    y.reserve(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      BigReal acc(bits_);
      for (std::size_t c = 0; c < cols_; ++c) acc += data_[r * cols_ + c] * x[c];
      y.push_back(std::move(acc));
    }
    return y;
  }

  bool symmetric() const {
    if (!square()) return false;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = r + 1; c < cols_; ++c)
        if (!(data_[r * cols_ + c] == data_[c * cols_ + r])) return false;
    return true;
  }

 private:
  void check(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_)
      fail(ErrorCode::DimensionMismatch, "index (" + std::to_string(r) + "," + std::to_string(c) +
                                             ") outside " + std::to_string(rows_) + "x" +
                                             std::to_string(cols_));
  }

  std::size_t rows_;
  std::size_t cols_;
  unsigned bits_;
  std::vector<BigReal> data_;
};

inline BigReal max_abs(std::span<const BigReal> v, unsigned bits) {
  BigReal m(bits);
  for (const auto& x : v) {
    BigReal a = abs(x);
    if (a > m) m = a;
  }
  return m;
}

/// In-place LU factorization PA = LU at a fixed working precision.
class LuFactorization {
 public:
  LuFactorization(const DenseMatrix& a, unsigned bits) : lu_(a.with_precision(bits)), perm_(a.rows()) {
    if (!a.square()) fail(ErrorCode::DimensionMismatch, "LU requires a square matrix");
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    // |pivot| below 2^(8 - bits) is treated as numerically zero.
    const long floor_exp = 8 - static_cast<long>(bits);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      BigReal best = abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        BigReal v = abs(lu_(i, k));
        if (v > best) {
          best = std::move(v);
          p = i;
        }
      }
      if (best.is_zero() || best.exponent2() <= floor_exp)
        fail(ErrorCode::SingularMatrix, "pivot " + best.to_string(6) + " at column " + std::to_string(k) +
                                            " below 2^" + std::to_string(floor_exp));
      if (p != k) {
        for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(p, c));
        std::swap(perm_[k], perm_[p]);
        sign_ = -sign_;
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        BigReal factor = lu_(i, k) / lu_(k, k);
        for (std::size_t c = k + 1; c < n; ++c) lu_(i, c) -= factor * lu_(k, c);
        lu_(i, k) = std::move(factor);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }
  unsigned precision() const { return lu_.precision(); }

  BigVector solve(std::span<const BigReal> b) const {
    const std::size_t n = size();
    if (b.size() != n) fail(ErrorCode::DimensionMismatch, "right-hand side length mismatch");
    const unsigned bits = precision();
    BigVector x(n, BigReal(bits));
    for (std::size_t i = 0; i < n; ++i) {
      BigReal acc = b[perm_[i]].with_precision(bits);
      for (std::size_t c = 0; c < i; ++c) acc -= lu_(i, c) * x[c];
      x[i] = std::move(acc);
    }
    for (std::size_t i = n; i-- > 0;) {
      BigReal acc = x[i];
      for (std::size_t c = i + 1; c < n; ++c) acc -= lu_(i, c) * x[c];
      x[i] = acc / lu_(i, i);
    }
    return x;
  }

  BigReal determinant() const {
    BigReal d(sign_, precision());
    for (std::size_t i = 0; i < size(); ++i) d *= lu_(i, i);
    return d;
  }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
};

/// Solves A x = b at `bits` of working precision, with one step of iterative
/// refinement whose residual is accumulated at twice that precision.
inline BigVector solve_linear(const DenseMatrix& a, std::span<const BigReal> b, unsigned bits) {
  if (!a.square()) fail(ErrorCode::DimensionMismatch, "solve_linear requires a square matrix");
  if (b.size() != a.rows()) fail(ErrorCode::DimensionMismatch, "right-hand side length mismatch");
  if (bits < kMinPrecisionBits) bits = kMinPrecisionBits;
  LuFactorization lu(a, bits);
  BigVector x = lu.solve(b);

  const unsigned wide = 2 * bits;
  const std::size_t n = a.rows();
  BigVector r(n, BigReal(wide));
  for (std::size_t i = 0; i < n; ++i) {
    BigReal acc = b[i].with_precision(wide);
    for (std::size_t c = 0; c < n; ++c) acc -= a(i, c).with_precision(wide) * x[c];
    r[i] = acc.with_precision(bits);
  }
  BigVector dx = lu.solve(r);
  for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  return x;
}

/// max |A x - b|, accumulated at `bits`.
inline BigReal residual_inf(const DenseMatrix& a, std::span<const BigReal> x, std::span<const BigReal> b,
                            unsigned bits) {
  BigReal worst(bits);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    BigReal acc = b[i].with_precision(bits);
    for (std::size_t c = 0; c < a.cols(); ++c) acc -= a(i, c).with_precision(bits) * x[c];
    BigReal v = abs(acc);
    if (v > worst) worst = std::move(v);
  }
  return worst;
}

/// Working precision for grid computations with m = 1/delta cells:
/// max(256, ceil(16 m log2(m + 2))).
inline unsigned required_precision(unsigned m) {
  if (m < 1) m = 1;
  const double bits = std::ceil(16.0 * m * std::log2(static_cast<double>(m) + 2.0));
  return bits < 256.0 ? 256u : static_cast<unsigned>(bits);
}

/// Smallest eigenvalue of a symmetric positive-definite matrix by inverse
/// power iteration. Diagnostic use only.
inline BigReal smallest_eigenvalue_spd(const DenseMatrix& a, unsigned bits, int iterations = 200) {
  LuFactorization lu(a, bits);
  const std::size_t n = a.rows();
  BigVector x(n, BigReal(bits));
  for (std::size_t i = 0; i < n; ++i) x[i] = BigReal(1.0 + 0.01 * static_cast<double>(i), bits);
  BigReal lambda(bits);
  for (int it = 0; it < iterations; ++it) {
    BigVector z = lu.solve(x);
    BigReal norm(bits);
    for (const auto& v : z) norm += v * v;
    norm = sqrt(norm);
    BigReal xnorm(bits);
    for (const auto& v : x) xnorm += v * v;
    xnorm = sqrt(xnorm);
    BigReal next = xnorm / norm;
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / norm;
    BigReal change = abs(next - lambda);
    lambda = std::move(next);
    if (it > 5 && change < lambda * 1e-30) break;
  }
  return lambda;
}

}  // namespace hermix
