#include <gtest/gtest.h>

#include <cmath>

#include "mrsabr/calibration.hpp"
#include "mrsabr/closed_forms.hpp"
#include "mrsabr/errors.hpp"

using namespace mrsabr;

namespace {

const std::vector<double> kExpiries{0.25, 0.5, 1.0};
const std::vector<double> kStrikes{80, 90, 100, 110, 120};

VolSurface surface_for(const ModelParams& p, const std::string& as_of = "2024-01-02") {
  return synthetic_surface(p, as_of, kExpiries, kStrikes);
}

CalibrationSpec quick_spec(Model m) {
  CalibrationSpec s;
  s.model = m;
  s.multistart_count = 4;
  return s;
}

}  // namespace

TEST(Params, ParseAndAccess) {
  EXPECT_EQ(parse_param("Lambda"), Param::Lambda);
  EXPECT_THROW(parse_param("kappa"), Error);
  const auto list = parse_param_list(" alpha, theta ,alpha");
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0], Param::Alpha);
  EXPECT_EQ(list[1], Param::Theta);
  ModelParams p;
  for (Param q : kAllParams) set(p, q, 0.1 * (static_cast<int>(q) + 1));
  EXPECT_DOUBLE_EQ(get(p, Param::Nu), 0.4);
}

TEST(Feller, DocumentedExamples) {
  const auto h = feller_check({Model::HSABR, 0.2, 0.2, 5.0, 0.5, 0.0});
  EXPECT_TRUE(h.satisfied);
  EXPECT_NEAR(h.margin(), 0.15, 1e-15);

  const auto hsabr_median = feller_check({Model::HSABR, 0.23, 0.23, 6.64, 1.47, -0.7});
  EXPECT_FALSE(hsabr_median.satisfied);
  EXPECT_NEAR(hsabr_median.lhs, 0.702512, 1e-6);
  EXPECT_NEAR(hsabr_median.rhs, 2.1609, 1e-12);

  const auto mrsabr_median = feller_check({Model::MRSABR, 0.15, 0.15, 9.82, 3.58, -0.69});
  EXPECT_TRUE(mrsabr_median.satisfied);
  EXPECT_NEAR(mrsabr_median.rhs, 6.4082, 1e-12);

  const auto cirzabr_median = feller_check({Model::CIRZABR, 0.12, 0.12, 9.67, 1.46, -0.7});
  EXPECT_TRUE(cirzabr_median.satisfied);
  EXPECT_NEAR(cirzabr_median.lhs, 2.3208, 1e-12);
  EXPECT_NEAR(cirzabr_median.rhs, 2.1316, 1e-12);
}

TEST(Objective, ExactSurfaceHasZeroError) {
  const ModelParams p{Model::MRSABR, 0.18, 0.15, 9.82, 3.58, -0.69};
  EXPECT_LT(rmse_objective(p, surface_for(p)), 1e-12);
}

TEST(Objective, UniformPerturbation) {
  const ModelParams p{Model::HSABR, 0.25, 0.2, 4.0, 1.2, -0.6};
  auto s = surface_for(p);
  for (std::size_t i = 0; i < s.quotes.size(); ++i) s.quotes[i].market_vol += i % 2 ? 0.01 : -0.01;
  EXPECT_NEAR(rmse_objective(p, s), 0.01, 1e-12);
}

TEST(Objective, WeightsEnterTheAverage) {
  const ModelParams p{Model::HSABR, 0.25, 0.2, 4.0, 1.2, -0.6};
  auto s = surface_for(p);
  s.quotes[0].market_vol += 0.02;
  s.quotes[0].weight = 3.0;
  EXPECT_NEAR(rmse_objective(p, s), std::sqrt(3 * 0.0004 / 17.0), 1e-12);
}

TEST(Objective, InfeasiblePointsArePenalized) {
  const ModelParams p{Model::HSABR, 0.25, 0.2, 4.0, 1.2, -0.6};
  const auto s = surface_for(p);
  // A huge vol-of-vol with strongly negative correlation drives the Hagan bracket negative.
  const ModelParams bad{Model::MRSABR, 2.0, 2.0, 0.05, 10.0, -0.999};
  EXPECT_THROW(model_vols(bad, s), Error);
  EXPECT_EQ(rmse_objective(bad, s), kPenalty);
}

TEST(Calibrate, RoundTripMrsabr) {
  const ModelParams truth{Model::MRSABR, 0.18, 0.15, 9.82, 3.58, -0.69};
  const auto s = surface_for(truth);
  const auto r = calibrate(s, quick_spec(Model::MRSABR));
  EXPECT_LT(r.rmse, 1e-6);
  ASSERT_EQ(r.residuals.size(), s.quotes.size());
  for (double e : r.residuals) EXPECT_LT(std::abs(e), 1e-6);
  EXPECT_EQ(r.as_of, "2024-01-02");
  EXPECT_EQ(r.feller.model, Model::MRSABR);
}

TEST(Calibrate, Deterministic) {
  const ModelParams truth{Model::HSABR, 0.25, 0.2, 5.0, 1.0, -0.5};
  const auto s = surface_for(truth);
  auto spec = quick_spec(Model::HSABR);
  spec.seed = 99;
  const auto a = calibrate(s, spec);
  const auto b = calibrate(s, spec);
  EXPECT_EQ(a.params.alpha, b.params.alpha);
  EXPECT_EQ(a.params.lambda, b.params.lambda);
  EXPECT_EQ(a.rmse, b.rmse);
  EXPECT_EQ(a.residuals, b.residuals);
  EXPECT_EQ(a.objective_evals, b.objective_evals);
}

TEST(Calibrate, FixedParametersAreKept) {
  const ModelParams truth{Model::MRSABR, 0.2, 0.16, 6.0, 2.0, -0.6};
  auto spec = quick_spec(Model::MRSABR);
  spec.free_params = {Param::Alpha, Param::Theta, Param::Nu, Param::Rho};
  spec.fixed_values[Param::Lambda] = 6.0;
  const auto r = calibrate(surface_for(truth), spec);
  EXPECT_EQ(r.params.lambda, 6.0);
  EXPECT_LT(r.rmse, 1e-6);
}

TEST(Calibrate, TieRestrictionCannotBeatFreeFit) {
  const ModelParams truth{Model::MRSABR, 0.25, 0.15, 4.0, 2.0, -0.6};
  const auto s = surface_for(truth);
  const auto free = calibrate(s, quick_spec(Model::MRSABR));
  auto tied_spec = quick_spec(Model::MRSABR);
  tied_spec.tie_alpha_theta = true;
  const auto tied = calibrate(s, tied_spec);
  EXPECT_EQ(tied.params.alpha, tied.params.theta);
  EXPECT_GT(tied.rmse, free.rmse);
}

TEST(Calibrate, CrossModelMisfitIsPositive) {
  const ModelParams mrsabr_median{Model::MRSABR, 0.15, 0.15, 9.82, 3.58, -0.69};
  const auto r = calibrate(surface_for(mrsabr_median), quick_spec(Model::HSABR));
  EXPECT_GT(r.rmse, 0.0);
}

TEST(Calibrate, InsufficientQuotes) {
  const ModelParams p{Model::MRSABR, 0.2, 0.2, 5.0, 1.0, -0.5};
  auto s = synthetic_surface(p, "2024-01-02", {0.5}, {90, 100, 110, 120, 130});
  try {
    calibrate(s, quick_spec(Model::MRSABR));
    FAIL() << "expected InsufficientQuotes";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientQuotes);
  }
}

TEST(Calibrate, NonConvergenceOnTinyBudget) {
  const ModelParams p{Model::MRSABR, 0.2, 0.15, 5.0, 1.0, -0.5};
  auto spec = quick_spec(Model::MRSABR);
  spec.max_evals_per_start = 10;
  try {
    calibrate(surface_for(p), spec);
    FAIL() << "expected NonConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConvergence);
  }
}

TEST(CalibrationSpec, Validation) {
  CalibrationSpec s;
  s.free_params = {Param::Alpha};
  EXPECT_THROW(s.validate(), Error);  // theta, lambda, nu, rho uncovered
  s.fixed_values = {{Param::Theta, 0.2}, {Param::Lambda, 3}, {Param::Nu, 1}, {Param::Rho, -0.5}};
  EXPECT_NO_THROW(s.validate());
  s.fixed_values[Param::Alpha] = 0.2;
  EXPECT_THROW(s.validate(), Error);  // both free and fixed
  CalibrationSpec tie;
  tie.tie_alpha_theta = true;
  EXPECT_NO_THROW(tie.validate());
  EXPECT_EQ(tie.effective_free().size(), 4u);
  tie.multistart_count = 0;
  EXPECT_THROW(tie.validate(), Error);
}

TEST(Batch, SingleSurfaceMatchesCalibrate) {
  const ModelParams p{Model::HSABR, 0.25, 0.2, 5.0, 1.0, -0.5};
  const auto s = surface_for(p);
  const auto spec = quick_spec(Model::HSABR);
  const auto direct = calibrate(s, spec);
  for (auto mode : {BatchMode::PerDate, BatchMode::GlobalExceptFree, BatchMode::PreviousPeriod}) {
    const auto batch = batch_calibrate({s}, spec, mode);
    ASSERT_EQ(batch.size(), 1u);
    EXPECT_EQ(batch[0].rmse, direct.rmse);
    EXPECT_EQ(batch[0].params.alpha, direct.params.alpha);
  }
}

TEST(Batch, PreviousPeriodKeepsSharedParameters) {
  std::vector<VolSurface> panel;
  for (int d = 0; d < 3; ++d) {
    panel.push_back(surface_for({Model::MRSABR, 0.15 + 0.02 * d, 0.15, 8.0, 2.5, -0.6}, "2024-01-0" + std::to_string(d + 2)));
  }
  const auto res = batch_calibrate(panel, quick_spec(Model::MRSABR), BatchMode::PreviousPeriod);
  ASSERT_EQ(res.size(), 3u);
  EXPECT_LT(res[0].rmse, 1e-6);
  for (int d = 1; d < 3; ++d) {
    EXPECT_EQ(res[d].as_of, panel[d].as_of);
    EXPECT_TRUE(std::isfinite(res[d].rmse));
  }
}

TEST(Batch, ModeNames) {
  EXPECT_EQ(parse_batch_mode("global"), BatchMode::GlobalExceptFree);
  EXPECT_EQ(to_string(BatchMode::PreviousPeriod), "previous");
  EXPECT_THROW(parse_batch_mode("weekly"), Error);
}

TEST(Threads, EnvironmentOverride) {
  ::setenv("MRSABR_THREADS", "3", 1);
  EXPECT_EQ(worker_threads(), 3u);
  ::setenv("MRSABR_THREADS", "0", 1);
  EXPECT_GE(worker_threads(), 1u);
  ::unsetenv("MRSABR_THREADS");
}
