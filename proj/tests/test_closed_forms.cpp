#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mrsabr/closed_forms.hpp"
#include "mrsabr/errors.hpp"
#include "reference_values.hpp"

using namespace mrsabr;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void expect_close(const EffectiveCoeffs& got, const EffectiveCoeffs& want, double tol) {
  EXPECT_LT(rel(got.tau_ex, want.tau_ex), tol) << got.tau_ex << " vs " << want.tau_ex;
  EXPECT_LT(rel(got.b_bar, want.b_bar), tol) << got.b_bar << " vs " << want.b_bar;
  EXPECT_LT(rel(got.c_bar, want.c_bar), tol) << got.c_bar << " vs " << want.c_bar;
  ASSERT_EQ(got.g_int.has_value(), want.g_int.has_value());
  if (got.g_int) {
    EXPECT_LT(rel(*got.g_int, *want.g_int), tol) << *got.g_int << " vs " << *want.g_int;
  }
}

EffectiveCoeffs from_reference(const test::Reference& r, double t_ex) {
  EffectiveCoeffs c;
  c.tau_ex = r.tau;
  c.b_bar = r.b;
  c.c_bar = r.c;
  if (r.has_g) c.g_int = r.g;
  c.t_ex = t_ex;
  return c;
}

}  // namespace

TEST(ClosedForms, HsabrMatchesReference) {
  const auto& r = test::kHsabrRef;
  expect_close(effective_coeffs(r.params, r.t_ex), from_reference(r, r.t_ex), 1e-13);
}

TEST(ClosedForms, MrsabrMatchesReference) {
  const auto& r = test::kMrsabrRef;
  expect_close(effective_coeffs(r.params, r.t_ex), from_reference(r, r.t_ex), 1e-13);
}

TEST(ClosedForms, CirzabrTauAndGAreExact) {
  const auto& r = test::kCirzabrRef;
  const auto c = effective_coeffs(r.params, r.t_ex);
  EXPECT_LT(rel(c.tau_ex, r.tau), 1e-13);
  EXPECT_LT(rel(*c.g_int, r.g), 1e-13);
}

TEST(ClosedForms, CirzabrTruncationErrorIsSmall) {
  // |alpha - theta| / theta = 10%; the expansion residual is O(0.1^6).
  const auto& r = test::kCirzabrRef;
  const auto c = effective_coeffs(r.params, r.t_ex);
  EXPECT_LT(rel(c.b_bar, r.b), 1e-5);
  EXPECT_LT(rel(c.c_bar, r.c), 1e-5);
}

TEST(ClosedForms, CollapseToConstantVolatilityCases) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> sig(0.05, 0.5), lam(0.5, 20), nu(0.1, 5), rho(-0.95, 0.95), t(0.05, 5);
  for (Model m : {Model::HSABR, Model::MRSABR, Model::CIRZABR}) {
    for (int i = 0; i < 10; ++i) {
      const double s = sig(rng);
      const ModelParams p{m, s, s, lam(rng), nu(rng), rho(rng)};
      const double T = t(rng);
      expect_close(effective_coeffs(p, T), special_case_coeffs(m, s, p.lambda, p.nu, p.rho, T), 1e-12);
    }
  }
}

TEST(ClosedForms, VolOfVolScaling) {
  for (Model m : {Model::HSABR, Model::MRSABR, Model::CIRZABR}) {
    const ModelParams p{m, 0.3, 0.2, 4.0, 0.7, -0.5};
    ModelParams q = p;
    q.nu *= 2.5;
    const auto a = effective_coeffs(p, 1.3), b = effective_coeffs(q, 1.3);
    EXPECT_LT(rel(b.b_bar, 2.5 * a.b_bar), 1e-12);
    EXPECT_LT(rel(b.c_bar, 6.25 * a.c_bar), 1e-12);
    EXPECT_EQ(a.tau_ex, b.tau_ex);
  }
}

TEST(ClosedForms, CorrelationSymmetry) {
  for (Model m : {Model::HSABR, Model::MRSABR, Model::CIRZABR}) {
    const ModelParams p{m, 0.3, 0.2, 4.0, 0.7, -0.5};
    ModelParams q = p;
    q.rho = 0.5;
    const auto a = effective_coeffs(p, 2.0), b = effective_coeffs(q, 2.0);
    EXPECT_LT(rel(b.b_bar, -a.b_bar), 1e-14);
    EXPECT_LT(rel(b.c_bar, a.c_bar), 1e-14);
  }
}

TEST(ClosedForms, ZeroVolOfVolGivesZeroSkewAndCurvature) {
  for (Model m : {Model::HSABR, Model::MRSABR, Model::CIRZABR}) {
    const auto c = effective_coeffs({m, 0.3, 0.2, 4.0, 0.0, -0.5}, 2.0);
    EXPECT_EQ(c.b_bar, 0.0);
    EXPECT_EQ(c.c_bar, 0.0);
  }
}

TEST(ClosedForms, WFormMatchesZForm) {
  for (Model m : {Model::HSABR, Model::MRSABR, Model::CIRZABR}) {
    const ModelParams p{m, 0.35, 0.2, 5.0, 1.1, -0.6};
    for (double t : {0.3, 2.0}) {
      expect_close(effective_coeffs(p, t, RatioForm::WForm), effective_coeffs(p, t, RatioForm::ZForm), 1e-13);
    }
  }
}

TEST(ClosedForms, LargeLambdaT) {
  for (Model m : {Model::HSABR, Model::MRSABR, Model::CIRZABR}) {
    const ModelParams p{m, 0.35, 0.2, 30.0, 1.1, -0.6};
    const auto c = effective_coeffs(p, 5.0);  // lambda T = 150
    EXPECT_TRUE(std::isfinite(c.tau_ex) && std::isfinite(c.b_bar) && std::isfinite(c.c_bar));
    try {
      effective_coeffs(p, 40.0, RatioForm::ZForm);
      FAIL() << "expected OverflowDomain";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OverflowDomain);
    }
  }
}

TEST(ClosedForms, LongRunLimit) {
  // For lambda T >> 1 the variance settles on theta^2, so tau / T -> theta^2.
  const auto c = effective_coeffs({Model::MRSABR, 0.4, 0.2, 50.0, 1.0, -0.5}, 40.0);
  EXPECT_NEAR(c.tau_ex / 40.0, 0.04, 1e-3);
}

TEST(ClosedForms, SmallLambdaIsStable) {
  const ModelParams p{Model::MRSABR, 0.3, 0.2, 1e-3, 1.0, -0.5};
  const auto c = effective_coeffs(p, 0.5);
  // Constant-volatility SABR limit: tau = alpha^2 T, b = rho nu / alpha.
  EXPECT_NEAR(c.tau_ex, 0.09 * 0.5, 1e-5);
  EXPECT_NEAR(c.b_bar, -0.5 / 0.3, 1e-3);
}

TEST(ClosedForms, DomainErrors) {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;  // sentinel: nothing thrown
  };
  EXPECT_EQ(code_of([] { effective_coeffs({Model::MRSABR, 0.2, 0.2, 1e-5, 1, 0}, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { effective_coeffs({Model::MRSABR, 0.2, 0.2, 1, 1, 0}, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { effective_coeffs({Model::CIRZABR, 0.2, 1e-7, 1, 1, 0}, 1); }), ErrorCode::DegenerateTheta);
  EXPECT_EQ(code_of([] { effective_coeffs({Model::HSABR, 0.2, 0.2, 1, 1, 1.0}, 1); }), ErrorCode::InvalidArgument);
}

TEST(StdSabrMapping, FormulaAndFlags) {
  EffectiveCoeffs c;
  c.tau_ex = 0.05;
  c.b_bar = -0.8;
  c.c_bar = 4.0;
  c.g_int = 0.01;
  c.t_ex = 1.25;
  const auto m = to_std_sabr(c);
  EXPECT_NEAR(m.params.alpha, std::sqrt(0.04) * std::exp(-4.0 * 0.05 / 4 + 0.01 / 0.1), 1e-15);
  EXPECT_NEAR(m.params.rho, -0.4, 1e-15);
  EXPECT_NEAR(m.params.nu, std::sqrt(0.04 * 4.0), 1e-15);
  EXPECT_FALSE(m.rho_clamped);

  c.c_bar = 0.25;  // |b| / sqrt(c) = 1.6
  const auto clamped = to_std_sabr(c);
  EXPECT_TRUE(clamped.rho_clamped);
  EXPECT_EQ(clamped.params.rho, -0.999);

  c.c_bar = -1.0;
  try {
    to_std_sabr(c);
    FAIL() << "expected NegativeCbar";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeCbar);
  }
}

TEST(StdSabrMapping, HsabrOmitsG) {
  const auto c = effective_coeffs({Model::HSABR, 0.3, 0.2, 3.0, 0.8, -0.4}, 1.0);
  EXPECT_FALSE(c.g_int.has_value());
  const auto m = to_std_sabr(c);
  EXPECT_NEAR(m.params.alpha, std::sqrt(c.tau_ex) * std::exp(-0.25 * c.c_bar * c.tau_ex), 1e-15);
}

TEST(ImpliedVol, MatchesManualComposition) {
  const ModelParams p{Model::CIRZABR, 0.25, 0.2, 6.0, 1.2, -0.6};
  const auto sabr = to_std_sabr(effective_coeffs(p, 0.75)).params;
  for (double k : {80.0, 100.0, 125.0}) {
    EXPECT_EQ(implied_vol(p, 0.75, {100.0, k}), black_vol_lognormal_sabr(sabr, {100.0, k}));
  }
}
