#include <gtest/gtest.h>

#include <cmath>

#include "mrsabr/errors.hpp"
#include "mrsabr/optimizer.hpp"

using namespace mrsabr;

TEST(NelderMead, QuadraticBowl) {
  const auto f = [](const std::vector<double>& x) {
    return std::pow(x[0] - 0.3, 2) + 10.0 * std::pow(x[1] - 0.7, 2) + std::pow(x[2] - 0.5, 2);
  };
  const auto r = nelder_mead_box(f, {0.9, 0.1, 0.2});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 0.3, 1e-6);
  EXPECT_NEAR(r.x[1], 0.7, 1e-6);
  EXPECT_NEAR(r.x[2], 0.5, 1e-6);
}

TEST(NelderMead, RosenbrockInsideTheBox) {
  // Valley mapped so that the minimum (1, 1) sits at (0.75, 0.75).
  const auto f = [](const std::vector<double>& u) {
    const double x = 4.0 * u[0] - 2.0, y = 4.0 * u[1] - 2.0;
    return 100.0 * std::pow(y - x * x, 2) + std::pow(1.0 - x, 2);
  };
  NelderMeadOptions opt;
  opt.max_evals = 5000;
  const auto r = nelder_mead_box(f, {0.2, 0.8}, opt);
  EXPECT_NEAR(r.x[0], 0.75, 1e-5);
  EXPECT_NEAR(r.x[1], 0.75, 1e-5);
}

TEST(NelderMead, MinimumOnTheBoundary) {
  const auto f = [](const std::vector<double>& x) { return std::pow(x[0] + 0.5, 2) + std::pow(x[1] - 0.4, 2); };
  const auto r = nelder_mead_box(f, {0.8, 0.8});
  EXPECT_NEAR(r.x[0], 0.0, 1e-8);
  EXPECT_NEAR(r.x[1], 0.4, 1e-6);
  for (double v : r.x) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(NelderMead, BudgetIsRespected) {
  const auto f = [](const std::vector<double>& x) { return std::sin(40.0 * x[0]) + std::cos(37.0 * x[1]); };
  NelderMeadOptions opt;
  opt.max_evals = 50;
  opt.x_tol = 1e-300;
  opt.f_tol_abs = 0.0;
  opt.f_tol_rel = 0.0;
  const auto r = nelder_mead_box(f, {0.5, 0.5}, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evals, 50 + 3);  // a shrink step may finish after the check
}

TEST(NelderMead, NanIsTreatedAsInfeasible) {
  const auto f = [](const std::vector<double>& x) { return x[0] > 0.6 ? std::nan("") : std::pow(x[0] - 0.2, 2); };
  const auto r = nelder_mead_box(f, {0.5});
  EXPECT_NEAR(r.x[0], 0.2, 1e-6);
}

TEST(NelderMead, Deterministic) {
  const auto f = [](const std::vector<double>& x) { return std::pow(x[0] - 0.1, 2) + std::abs(x[1] - 0.9); };
  const auto a = nelder_mead_box(f, {0.5, 0.5});
  const auto b = nelder_mead_box(f, {0.5, 0.5});
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.f, b.f);
  EXPECT_EQ(a.evals, b.evals);
}

TEST(NelderMead, RejectsEmptyStart) {
  EXPECT_THROW(nelder_mead_box([](const std::vector<double>&) { return 0.0; }, {}), Error);
}
