#pragma once

// Extended-precision real scalar. Thin RAII wrapper over an MPFR value; every
// operation rounds to nearest at the larger of its operands' precisions.

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

#include "hermix/errors.hpp"

namespace hermix {

inline constexpr unsigned kMinPrecisionBits = 64;

class BigReal {
 public:
  explicit BigReal(unsigned bits = kMinPrecisionBits) { init(bits); mpfr_set_zero(v_, 1); }

  BigReal(double x, unsigned bits) {
    init(bits);
    mpfr_set_d(v_, x, MPFR_RNDN);
  }

  BigReal(long x, unsigned bits) {
    init(bits);
    mpfr_set_si(v_, x, MPFR_RNDN);
  }

  BigReal(int x, unsigned bits) : BigReal(static_cast<long>(x), bits) {}

  static BigReal from_string(const std::string& s, unsigned bits) {
    BigReal r(bits);
    if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0)
      fail(ErrorCode::InvalidArgument, "not a decimal number: " + s);
    return r;
  }

  BigReal(const BigReal& o) {
    init(o.precision());
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }

  BigReal(BigReal&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }

  BigReal& operator=(const BigReal& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }

  BigReal& operator=(BigReal&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }

  ~BigReal() { mpfr_clear(v_); }

  unsigned precision() const { return static_cast<unsigned>(mpfr_get_prec(v_)); }

  /// Same value, rounded (or exactly widened) to a new precision.
  BigReal with_precision(unsigned bits) const {
    BigReal r(bits);
    mpfr_set(r.v_, v_, MPFR_RNDN);
    return r;
  }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  explicit operator double() const { return to_double(); }

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  /// Base-2 exponent e with 0.5 <= |x| / 2^e < 1; very negative for zero.
  long exponent2() const { return is_zero() ? -(1L << 40) : mpfr_get_exp(v_); }

  /// Decimal scientific notation with `digits` significant digits (0 = enough
  /// digits to round-trip at this precision).
  std::string to_string(int digits = 0) const {
    if (digits <= 0) digits = static_cast<int>(std::ceil(precision() * 0.30103)) + 1;
    char* buf = nullptr;
    std::string fmt = "%." + std::to_string(digits - 1) + "Re";
    mpfr_asprintf(&buf, fmt.c_str(), v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
  }

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

  BigReal operator-() const {
    BigReal r(precision());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  BigReal& operator+=(const BigReal& o) { widen(o); mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigReal& operator-=(const BigReal& o) { widen(o); mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigReal& operator*=(const BigReal& o) { widen(o); mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigReal& operator/=(const BigReal& o) { widen(o); mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigReal& operator+=(double o) { mpfr_add_d(v_, v_, o, MPFR_RNDN); return *this; }
  BigReal& operator-=(double o) { mpfr_sub_d(v_, v_, o, MPFR_RNDN); return *this; }
  BigReal& operator*=(double o) { mpfr_mul_d(v_, v_, o, MPFR_RNDN); return *this; }
  BigReal& operator/=(double o) { mpfr_div_d(v_, v_, o, MPFR_RNDN); return *this; }

  friend BigReal operator+(BigReal a, const BigReal& b) { return a += b; }
  friend BigReal operator-(BigReal a, const BigReal& b) { return a -= b; }
  friend BigReal operator*(BigReal a, const BigReal& b) { return a *= b; }
  friend BigReal operator/(BigReal a, const BigReal& b) { return a /= b; }
  friend BigReal operator+(BigReal a, double b) { return a += b; }
  friend BigReal operator-(BigReal a, double b) { return a -= b; }
  friend BigReal operator*(BigReal a, double b) { return a *= b; }
  friend BigReal operator/(BigReal a, double b) { return a /= b; }
  friend BigReal operator+(double a, BigReal b) { return b += a; }
  friend BigReal operator*(double a, BigReal b) { return b *= a; }
  friend BigReal operator-(double a, const BigReal& b) {
    BigReal r(b.precision());
    mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }
  friend BigReal operator/(double a, const BigReal& b) {
    BigReal r(b.precision());
    mpfr_d_div(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }

  friend bool operator==(const BigReal& a, const BigReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const BigReal& a, const BigReal& b) {
    if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
    int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }
  friend bool operator==(const BigReal& a, double b) { return mpfr_cmp_d(a.v_, b) == 0; }
  friend std::partial_ordering operator<=>(const BigReal& a, double b) {
    if (std::isnan(b) || mpfr_nan_p(a.v_)) return std::partial_ordering::unordered;
    int c = mpfr_cmp_d(a.v_, b);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }

  friend std::ostream& operator<<(std::ostream& os, const BigReal& x) { return os << x.to_string(); }

#define HERMIX_UNARY(name, fn)                \
  friend BigReal name(const BigReal& x) {     \
    BigReal r(x.precision());                 \
    fn(r.v_, x.v_, MPFR_RNDN);                \
    return r;                                 \
  }
  HERMIX_UNARY(exp, mpfr_exp)
  HERMIX_UNARY(log, mpfr_log)
  HERMIX_UNARY(log2, mpfr_log2)
  HERMIX_UNARY(sqrt, mpfr_sqrt)
  HERMIX_UNARY(abs, mpfr_abs)
  HERMIX_UNARY(expm1, mpfr_expm1)
  HERMIX_UNARY(log1p, mpfr_log1p)
  HERMIX_UNARY(erf, mpfr_erf)
  HERMIX_UNARY(erfc, mpfr_erfc)
#undef HERMIX_UNARY

  friend BigReal pow(const BigReal& x, const BigReal& y) {
    BigReal r(std::max(x.precision(), y.precision()));
    mpfr_pow(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend BigReal pow(const BigReal& x, long n) {
    BigReal r(x.precision());
    mpfr_pow_si(r.v_, x.v_, n, MPFR_RNDN);
    return r;
  }

  static BigReal pi(unsigned bits) {
    BigReal r(bits);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  /// n! computed exactly in integers, then rounded once.
  static BigReal factorial(unsigned long n, unsigned bits) {
    mpz_t z;
    mpz_init(z);
    mpz_fac_ui(z, n);
    BigReal r(bits);
    mpfr_set_z(r.v_, z, MPFR_RNDN);
    mpz_clear(z);
    return r;
  }

  static BigReal binomial(unsigned long n, unsigned long k, unsigned bits) {
    mpz_t z;
    mpz_init(z);
    mpz_bin_uiui(z, n, k);
    BigReal r(bits);
    mpfr_set_z(r.v_, z, MPFR_RNDN);
    mpz_clear(z);
    return r;
  }

 private:
  void init(unsigned bits) {
    if (bits < kMinPrecisionBits) bits = kMinPrecisionBits;
    mpfr_init2(v_, static_cast<mpfr_prec_t>(bits));
  }

  void widen(const BigReal& o) {
    if (mpfr_get_prec(o.v_) > mpfr_get_prec(v_)) mpfr_prec_round(v_, mpfr_get_prec(o.v_), MPFR_RNDN);
  }

  mpfr_t v_;
};

inline BigReal max(const BigReal& a, const BigReal& b) { return a < b ? b : a; }

// Uniform construction helpers so templated code can run on double or BigReal.
template <class Real>
struct RealTraits;

template <>
struct RealTraits<double> {
  static double make(double x, unsigned) { return x; }
  static double pi(unsigned) { return M_PI; }
  static double factorial(unsigned long n, unsigned) { return std::tgamma(static_cast<double>(n) + 1.0); }
  static double binomial(unsigned long n, unsigned long k, unsigned) {
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
  }
  static double to_double(double x) { return x; }
};

template <>
struct RealTraits<BigReal> {
  static BigReal make(double x, unsigned bits) { return BigReal(x, bits); }
  static BigReal pi(unsigned bits) { return BigReal::pi(bits); }
  static BigReal factorial(unsigned long n, unsigned bits) { return BigReal::factorial(n, bits); }
  static BigReal binomial(unsigned long n, unsigned long k, unsigned bits) {
    return BigReal::binomial(n, k, bits);
  }
  static double to_double(const BigReal& x) { return x.to_double(); }
};

}  // namespace hermix
