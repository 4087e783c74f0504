#include <gtest/gtest.h>

#include <cmath>

#include "hermix/lowerbound.hpp"
#include "oracles.hpp"

using namespace hermix;

namespace {

double rel(const BigReal& a, const BigReal& b) { return (abs(a - b) / abs(b)).to_double(); }

/// ||v - sum alpha_i u_i||_2^2 as a quadratic form, v = g_{-1}, u_i = g_{i delta}.
BigReal residual_sq(const BigVector& alpha, unsigned m, unsigned bits) {
  BigVector loc{BigReal(-1, bits)};
  BigVector c{BigReal(1, bits)};
  for (unsigned i = 0; i < alpha.size(); ++i) {
    loc.push_back(grid_node(i, m, bits));
    c.push_back(-alpha[i]);
  }
  BigReal s(bits);
  for (std::size_t i = 0; i < loc.size(); ++i)
    for (std::size_t j = 0; j < loc.size(); ++j) s += c[i] * c[j] * gaussian_overlap(loc[i], loc[j], bits);
  return s;
}

double inv_sqrt_factorial(unsigned n) { return std::exp(-0.5 * std::lgamma(n + 1.0)); }

}  // namespace

TEST(GridCells, Validation) {
  EXPECT_EQ(grid_cells(0.25), 4u);
  EXPECT_EQ(grid_cells(1.0 / 7.0), 7u);
  EXPECT_THROW(grid_cells(0.3), Error);
  EXPECT_THROW(grid_cells(0.0), Error);
  EXPECT_THROW(grid_cells(1.0 / 41.0), Error);
}

TEST(GsInner, EmptyProductIsOverlap) {
  for (double a : {-1.0, 0.0, 0.35, 2.0})
    EXPECT_NEAR(gs_inner(a, 0, 0.25, 256).to_double(), gaussian_overlap(a, 0.0), 1e-16);
}

TEST(GsInner, DiagonalIsNormSquared) {
  const BigReal d = grid_node(1, 5, 256);
  for (unsigned i = 0; i <= 5; ++i) {
    BigReal prod = 1.0 / sqrt(BigReal::pi(256) * 4.0);
    for (unsigned k = 1; k <= i; ++k) prod *= 1.0 - exp(d * d * (-0.5 * k));
    EXPECT_LT(rel(gs_norm_sq(i, d, 256), prod), 1e-60);
    EXPECT_LT(rel(gs_inner(grid_node(i, 5, 256), i, d, 256), prod), 1e-60);
  }
}

TEST(GsInner, MatchesExplicitGramSchmidt) {
  const unsigned bits = 512;
  const BigReal d = grid_node(1, 4, bits);
  for (double a : {-1.0, 0.3, 1.7})
    for (unsigned i = 0; i <= 4; ++i) {
      const auto [inner, norm] = oracle::gram_schmidt_gaussians(BigReal(a, bits), i, d, bits);
      EXPECT_LT(rel(gs_inner(BigReal(a, bits), i, d, bits), inner), 1e-25) << a << " " << i;
      EXPECT_LT(rel(gs_norm_sq(i, d, bits), norm), 1e-25) << i;
    }
}

TEST(ProjectionCoeffs, FiveCenterClosedValues) {
  const auto alpha = projection_coeffs_closed(0.2, 256, 5);
  const double expect[5] = {80.609, -260.774, 331.9, -195.489, 44.741};
  ASSERT_EQ(alpha.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(alpha[i].to_double() / expect[i], 1.0, 0.005) << i;
}

TEST(ProjectionCoeffs, SixCenterReadingMatchesGram) {
  const auto closed = projection_coeffs_closed(0.2, 256);
  ASSERT_EQ(closed.size(), 6u);
  const auto gram = project_gaussian(-1.0, 0.2, 256);
  for (int i = 0; i < 6; ++i) EXPECT_LT(rel(closed[i], gram.alpha[i]), 1e-20);
}

TEST(ProjectionCoeffs, AgreeWithGramSolve) {
  for (unsigned m = 1; m <= 10; ++m) {
    const unsigned bits = required_precision(m);
    const auto closed = projection_coeffs_closed(1.0 / m, bits);
    const auto gram = project_gaussian(-1.0, 1.0 / m, bits);
    for (unsigned i = 0; i <= m; ++i) EXPECT_LT(rel(closed[i], gram.alpha[i]), 1e-20) << m << " " << i;
  }
}

TEST(ProjectionCoeffs, SumTendsToOne) {
  double prev = 1e9;
  for (unsigned m = 2; m <= 5; ++m) {
    const auto alpha = projection_coeffs_closed(1.0 / m, required_precision(m));
    BigReal s(256);
    for (const auto& a : alpha) s += a;
    const double err = std::abs(s.to_double() - 1.0);
    EXPECT_LT(err, prev) << m;
    prev = err;
  }
}

TEST(ProjectGaussian, UnitGridAgainstQuadrature) {
  const auto p = project_gaussian(-1.0, 1.0, 256);
  ASSERT_EQ(p.alpha.size(), 2u);
  const double a0 = p.alpha[0].to_double(), a1 = p.alpha[1].to_double();
  auto r = [&](double x) { return normal_pdf(x + 1.0) - a0 * normal_pdf(x) - a1 * normal_pdf(x - 1.0); };
  const double res = oracle::gauss_legendre([&](double x) { return r(x) * r(x); }, -16, 16, 800);
  const double v = oracle::gauss_legendre([](double x) { return std::pow(normal_pdf(x + 1.0), 2); }, -16, 16, 800);
  EXPECT_NEAR(p.beta.to_double(), std::sqrt(res / v), 1e-10);
}

TEST(ProjectGaussian, ResidualOrthogonalToGrid) {
  const unsigned bits = 512;
  for (unsigned m : {2u, 5u, 9u}) {
    const auto p = project_gaussian(-1.0, 1.0 / m, bits);
    for (unsigned i = 0; i <= m; ++i) {
      const BigReal ui = grid_node(i, m, bits);
      BigReal dot = gaussian_overlap(BigReal(-1, bits), ui, bits);
      for (unsigned k = 0; k <= m; ++k) dot -= p.alpha[k] * gaussian_overlap(grid_node(k, m, bits), ui, bits);
      EXPECT_LT(abs(dot).to_double(), std::ldexp(1.0, -static_cast<int>(bits) / 2)) << m << " " << i;
    }
    EXPECT_GE(p.c_plus.sign(), 0);
    EXPECT_GE(p.c_minus.sign(), 0);
    EXPECT_GT(p.beta.to_double(), 0.0);
    EXPECT_LT(p.beta.to_double(), 1.0);
  }
}

TEST(ProjectGaussian, LocalOptimality) {
  const unsigned bits = 256;
  const auto p = project_gaussian(-1.0, 0.5, bits);
  const BigReal base = residual_sq(p.alpha, 2, bits);
  for (std::size_t i = 0; i < p.alpha.size(); ++i)
    for (double eps : {1e-6, -1e-6}) {
      BigVector moved = p.alpha;
      moved[i] += eps;
      EXPECT_GT(residual_sq(moved, 2, bits), base) << i << " " << eps;
    }
}

TEST(ProjectGaussian, BalanceIdentity) {
  for (unsigned m : {2u, 4u, 6u}) {
    const auto p = project_gaussian(-1.0, 1.0 / m, required_precision(m));
    BigReal s(256);
    for (const auto& a : p.alpha) s += a;
    const double integral = oracle::gauss_legendre(
        [&](double x) {
          double v = 0.0;
          for (unsigned i = 0; i <= m; ++i) v += p.alpha[i].to_double() * normal_pdf(x - double(i) / m);
          return v;
        },
        -14, 15, 600);
    EXPECT_NEAR(integral, s.to_double(), 1e-10 * std::max(1.0, (p.c_plus + p.c_minus).to_double()));
    EXPECT_NEAR((p.c_plus - p.c_minus).to_double(), s.to_double(), 1e-12);
  }
}

TEST(Beta, RoutesAgree) {
  for (unsigned m = 1; m <= 12; ++m) {
    const unsigned bits = required_precision(m);
    const BigReal g = beta(1.0 / m, BetaRoute::Gram, bits);
    const BigReal r = beta(1.0 / m, BetaRoute::Recur, bits);
    const BigReal s = beta(1.0 / m, BetaRoute::StRecurrence, bits);
    EXPECT_LT(rel(r, g), 1e-15) << m;
    EXPECT_LT(rel(s, g), 1e-15) << m;
  }
}

TEST(Beta, FactorialBoundAndMonotone) {
  double prev = 1.0;
  for (unsigned m = 1; m <= 12; ++m) {
    const double b = beta(1.0 / m, BetaRoute::StRecurrence, required_precision(m)).to_double();
    if (m >= 4) {
      EXPECT_LE(b, inv_sqrt_factorial(m + 1)) << m;
    }
    EXPECT_LT(b, prev) << m;
    prev = b;
  }
}

TEST(Beta, PrecisionExhausted) {
  try {
    beta(1.0 / 30, BetaRoute::StRecurrence, 64);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PrecisionExhausted);
  }
}

TEST(HardInstance, ComponentsAreNormalizedAtoms) {
  for (unsigned m = 1; m <= 12; ++m) {
    const auto h = build_hard_instance(1.0 / m);
    const double tol = std::ldexp(1.0, -static_cast<int>(h.bits) / 2);
    EXPECT_GE((h.c_plus - h.c_minus).sign(), 0) << m;
    for (const BigAtoms* a : {&h.f1_atoms, &h.f1p_atoms, &h.f2_atoms, &h.f2p_atoms}) {
      for (const auto& w : a->weight) EXPECT_GE(w.sign(), 0);
      EXPECT_LT(abs(a->total(h.bits) - 1.0).to_double(), tol) << m;
    }
    for (const auto& a : h.f1.nu.atom_list()) {
      EXPECT_GE(a.location, 0.0);
      EXPECT_LE(a.location, 1.0);
    }
    for (const auto& a : h.f2p.nu.atom_list()) {
      EXPECT_GE(a.location, -2.0);
      EXPECT_LE(a.location, -1.0);
    }
    EXPECT_NO_THROW(h.f.validate());
    EXPECT_NO_THROW(h.f_prime.validate());
  }
}

TEST(HardInstance, MixturesIntegrateToOne) {
  const auto h = build_hard_instance(0.2);
  for (const TwoComponentMixture* m : {&h.f, &h.f_prime})
    EXPECT_NEAR(oracle::gauss_legendre([&](double x) { return m->pdf(x); }, -16, 15, 600), 1.0, 1e-10);
}

TEST(HardInstance, TotalGapFarBelowComponentGap) {
  const auto h = build_hard_instance(0.2);
  const double total = h.total_difference().l2_norm(h.bits).to_double();
  const double comp = h.component_difference().l2_norm(h.bits).to_double();
  EXPECT_LT(total, 0.1 * comp);
  // quadrature cross-check of the exact quadratic form
  const double q = std::sqrt(oracle::gauss_legendre(
      [&](double x) { return std::pow(h.f.pdf(x) - h.f_prime.pdf(x), 2); }, -16, 15, 600));
  EXPECT_NEAR(q, total, 1e-9);
  // ||f1 - f1'|| >= ||v - u0|| / C+ - beta ||v|| / C+
  const double v_norm = std::pow(4 * M_PI, -0.25);
  const double gap = std::sqrt(2.0 * v_norm * v_norm * (1.0 - std::exp(-0.25)));
  const double b = beta(0.2, BetaRoute::StRecurrence, h.bits).to_double();
  EXPECT_GE(comp, (gap - b * v_norm) / h.c_plus.to_double());
}

TEST(HardInstance, DifferenceIdentity) {
  const auto h = build_hard_instance(0.25);
  const double cp = h.c_plus.to_double();
  const double bal = (h.c_plus - h.c_minus).to_double() / cp;
  for (int k = 0; k < 20; ++k) {
    const double x = -4.0 + 0.45 * k;
    double proj = 0.0;
    for (unsigned i = 0; i <= h.m; ++i) proj += h.alpha[i].to_double() * normal_pdf(x - double(i) / h.m);
    const double lhs = h.f1.pdf(x) - h.f1p.pdf(x);
    EXPECT_NEAR(lhs, proj / cp - bal * normal_pdf(x), 1e-10) << x;
  }
}

TEST(RateTable, RowsAndShape) {
  const std::vector<double> deltas{1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5, 1.0 / 6, 1.0 / 7};
  const auto rows = rate_table(deltas);
  ASSERT_EQ(rows.size(), deltas.size());
  double min_slope = 1e9, max_growth = 0.0;
  for (const auto& r : rows) {
    for (double v : {r.beta, r.c_plus, r.c_minus, r.balance_error, r.l2_total, r.l2_comp, r.l1_total, r.l1_comp})
      EXPECT_GE(v, 0.0);
    EXPECT_LE(r.l2_comp * r.l2_comp / r.l1_comp, 2.0 / std::sqrt(2 * M_PI) * (1 + 1e-6)) << r.m;
    EXPECT_LE(r.l2_total * r.l2_total / r.l1_total, 2.0 / std::sqrt(2 * M_PI) * (1 + 1e-6)) << r.m;
    EXPECT_LT(r.l1_rounding_bound, 1e-3 * r.l1_total);
    min_slope = std::min(min_slope, std::log2(1.0 / r.beta) / (r.m * std::log2(r.m + 1.0)));
    max_growth = std::max(max_growth, std::log2(r.c_plus + r.c_minus) / r.m);
  }
  EXPECT_GT(min_slope, 0.1);
  EXPECT_LT(max_growth, 4.0);
  EXPECT_THROW(rate_table({0.5, 0.3}), Error);
}

TEST(RateTable, RowIndependentOfThreads) {
  setenv("HERMIX_THREADS", "1", 1);
  const auto a = rate_table({0.5, 0.25});
  setenv("HERMIX_THREADS", "3", 1);
  const auto b = rate_table({0.5, 0.25});
  unsetenv("HERMIX_THREADS");
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(a[k].l1_total, b[k].l1_total);
    EXPECT_EQ(a[k].l2_comp, b[k].l2_comp);
  }
}

TEST(Distinguish, SingleSampleIsACoinFlip) {
  const double rate = distinguish_demo(0.25, 1, 2000, 3);
  EXPECT_NEAR(rate, 0.5, 3.0 * std::sqrt(0.25 / 2000));
}

TEST(Distinguish, NullCalibration) {
  const auto h = build_hard_instance(0.25);
  const double rate = distinguish_demo(h.f, h.f, 0.25, 50, 2000, 4);
  EXPECT_NEAR(rate, 0.5, 3.0 * std::sqrt(0.25 / 2000));
}

TEST(Distinguish, ModerateSampleCannotTell) {
  EXPECT_LT(distinguish_demo(0.25, 1000, 500, 7), 0.55);
  EXPECT_EQ(distinguish_demo(0.25, 1000, 50, 7), distinguish_demo(0.25, 1000, 50, 7));
}

TEST(Distinguish, FarPairIsEasy) {
  const auto h = build_hard_instance(0.5);
  // components moved by a whole unit: f1 vs its mirror
  TwoComponentMixture shifted = h.f;
  shifted.comp1.nu = MixingDensity::point_mass(1.0);
  shifted.comp2.nu = MixingDensity::point_mass(-1.0);
  EXPECT_GT(distinguish_demo(h.f, shifted, 0.5, 200, 200, 5), 0.95);
}
