#include <gtest/gtest.h>

#include <cmath>

#include "mrsabr/closed_forms.hpp"
#include "mrsabr/errors.hpp"
#include "mrsabr/extended.hpp"
#include "mrsabr/oracle.hpp"
#include "mrsabr/verification.hpp"
#include "reference_values.hpp"

using namespace mrsabr;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void expect_reference(const EffectiveCoeffs& c, const test::Reference& r, double tol) {
  EXPECT_LT(rel(c.tau_ex, r.tau), tol);
  EXPECT_LT(rel(c.b_bar, r.b), tol);
  EXPECT_LT(rel(c.c_bar, r.c), tol);
  if (r.has_g) {
    ASSERT_TRUE(c.g_int.has_value());
    EXPECT_LT(rel(*c.g_int, r.g), tol);
  }
}

}  // namespace

TEST(ExpectedVolCurve, BoundsAndMonotonicity) {
  const ExpectedVolCurve c{0.3, 0.2, 4.0};
  double prev_v = c.variance(0.0), prev_a = c.vol(0.0);
  EXPECT_DOUBLE_EQ(prev_v, 0.09);
  EXPECT_DOUBLE_EQ(prev_a, 0.3);
  for (double t = 0.1; t < 5.0; t += 0.1) {
    const double v = c.variance(t), a = c.vol(t);
    EXPECT_LE(v, prev_v);
    EXPECT_LE(a, prev_a);
    EXPECT_GE(v, 0.04);
    EXPECT_GE(a, 0.2);
    prev_v = v;
    prev_a = a;
  }
}

TEST(Oracle, HsabrMatchesReference) {
  const auto& r = test::kHsabrRef;
  expect_reference(oracle_coeffs_hsabr(r.params, r.t_ex), r, 1e-9);
}

TEST(Oracle, MrsabrMatchesReference) {
  const auto& r = test::kMrsabrRef;
  expect_reference(oracle_coeffs_mrsabr(r.params, r.t_ex), r, 1e-9);
}

TEST(Oracle, CirzabrMatchesReference) {
  const auto& r = test::kCirzabrRef;
  expect_reference(oracle_coeffs_mrzabr(r.params, ZabrSpec{r.params.nu, 0.5}, r.t_ex), r, 1e-9);
}

TEST(Oracle, QuadPrecisionMatchesReference) {
  const auto& r = test::kMrsabrRef;
  const auto c = coeffs_cast<double>(oracle_coeffs_mrsabr_as<Quad>(r.params, r.t_ex, extended_quadrature_config()));
  expect_reference(c, r, 1e-15);
}

TEST(Oracle, ConstantVolatilityCases) {
  const double s = 0.22, lam = 3.5, nu = 1.3, rho = -0.45, t = 1.7;
  for (Model m : {Model::HSABR, Model::MRSABR, Model::CIRZABR}) {
    const auto want = special_case_coeffs(m, s, lam, nu, rho, t);
    const auto got = oracle_coeffs({m, s, s, lam, nu, rho}, t);
    EXPECT_LT(rel(got.tau_ex, want.tau_ex), 1e-10);
    EXPECT_LT(rel(got.b_bar, want.b_bar), 1e-10);
    EXPECT_LT(rel(got.c_bar, want.c_bar), 1e-10);
    if (want.g_int) {
      EXPECT_LT(rel(*got.g_int, *want.g_int), 1e-10);
    }
  }
}

TEST(Oracle, GeneralGammaConstantVolatility) {
  const double s = 0.3, lam = 2.0, nu = 0.8, rho = -0.6, t = 1.2, gamma = 0.8;
  const auto want = special_case_coeffs(Model::CIRZABR, s, lam, nu, rho, t, gamma);
  const auto got = oracle_coeffs_mrzabr({Model::CIRZABR, s, s, lam, nu, rho}, ZabrSpec{nu, gamma}, t);
  EXPECT_LT(rel(got.b_bar, want.b_bar), 1e-10);
  EXPECT_LT(rel(got.c_bar, want.c_bar), 1e-10);
  EXPECT_LT(rel(*got.g_int, *want.g_int), 1e-10);
}

TEST(Oracle, GammaOneReproducesMrsabrIntegrals) {
  for (const auto& g : random_grid(Model::MRSABR, 50, 5)) {
    const auto a = oracle_coeffs_mrsabr(g.params, g.t_ex);
    const auto b = oracle_coeffs_mrzabr(g.params, ZabrSpec{g.params.nu, 1.0}, g.t_ex);
    EXPECT_LT(max_relative_error(b, a), 1e-9);
  }
}

TEST(Oracle, ZeroVolOfVolAndZeroCorrelation) {
  const ModelParams flat{Model::HSABR, 0.3, 0.2, 3.0, 0.0, -0.5};
  const auto h = oracle_coeffs_hsabr(flat, 1.0);
  EXPECT_EQ(h.b_bar, 0.0);
  EXPECT_EQ(h.c_bar, 0.0);
  const ModelParams uncorrelated{Model::MRSABR, 0.3, 0.2, 3.0, 1.0, 0.0};
  EXPECT_EQ(oracle_coeffs_mrsabr(uncorrelated, 1.0).b_bar, 0.0);
}

TEST(Oracle, TauMatchesAntiderivative) {
  const double a = 0.35, th = 0.15, lam = 2.5, t = 3.0;
  const double e = std::exp(-lam * t);
  const double tau_h = th * th * t + (a * a - th * th) * (1 - e) / lam;
  const double tau_m = th * th * t + 2 * th * (a - th) * (1 - e) / lam + (a - th) * (a - th) * (1 - e * e) / (2 * lam);
  EXPECT_LT(rel(oracle_coeffs_hsabr({Model::HSABR, a, th, lam, 1, 0}, t).tau_ex, tau_h), 1e-12);
  EXPECT_LT(rel(oracle_coeffs_mrsabr({Model::MRSABR, a, th, lam, 1, 0}, t).tau_ex, tau_m), 1e-12);
}

TEST(Oracle, TighterToleranceStaysWithinErrorBudget) {
  const ModelParams p{Model::MRSABR, 0.4, 0.1, 8.0, 2.0, -0.8};
  QuadratureConfig loose;
  loose.rel_tol = 1e-8;
  QuadratureConfig tight = loose;
  tight.rel_tol = 0.5e-8;
  const auto a = oracle_coeffs_mrsabr(p, 2.0, loose);
  const auto b = oracle_coeffs_mrsabr(p, 2.0, tight);
  EXPECT_LT(max_relative_error(a, b), 1e-8);
}

TEST(Oracle, ShortExpiry) {
  const ModelParams p{Model::MRSABR, 0.3, 0.2, 5.0, 1.0, -0.5};
  const auto c = oracle_coeffs_mrsabr(p, 1e-4);
  EXPECT_NEAR(c.tau_ex, 0.09e-4, 1e-8);
  EXPECT_LT(*c.g_int, 1e-8);
}

TEST(Oracle, Validation) {
  const ModelParams p{Model::MRSABR, 0.3, 0.2, 5.0, 1.0, -0.5};
  EXPECT_THROW(oracle_coeffs_mrzabr(p, ZabrSpec{1.0, 1.6}, 1.0), Error);
  EXPECT_THROW(oracle_coeffs_mrsabr(p, -1.0), Error);
  QuadratureConfig bad;
  bad.rel_tol = -1;
  EXPECT_THROW(oracle_coeffs_mrsabr(p, 1.0, bad), Error);
}
