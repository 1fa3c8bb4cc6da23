#pragma once

// Closed-form versus quadrature-oracle comparisons over random parameter grids.

#include <cstdint>
#include <vector>

#include "mrsabr/model.hpp"
#include "mrsabr/quadrature.hpp"

namespace mrsabr {

struct GridPoint {
  ModelParams params;
  double t_ex = 0.0;
};

/// Ranges of the default verification grid.
struct GridRanges {
  double vol_lo = 0.05, vol_hi = 0.5;     ///< alpha and theta
  double lambda_lo = 0.5, lambda_hi = 20.0;
  double nu_lo = 0.1, nu_hi = 5.0;
  double rho_lo = -0.95, rho_hi = 0.95;
  double t_lo = 0.05, t_hi = 5.0;
};

/// Uniform draws from `ranges`; with alpha_eq_theta the alpha draw is reused for theta.
std::vector<GridPoint> random_grid(Model model, std::size_t count, std::uint64_t seed, bool alpha_eq_theta = false,
                                   const GridRanges& ranges = {});

/// Largest relative difference over tau, b, c and G (absolute where the reference is zero).
double max_relative_error(const EffectiveCoeffs& value, const EffectiveCoeffs& reference);

struct VerifyRow {
  GridPoint point;
  double error = 0.0;
};

struct VerifyReport {
  std::vector<VerifyRow> rows;  ///< one per grid point, grid order
  double max_error = 0.0;
  std::size_t worst = 0;
};

/// Closed forms against the model's oracle (CIRZABR uses the gamma = 1/2 mrZABR oracle).
VerifyReport verify_closed_forms(Model model, const std::vector<GridPoint>& grid, const QuadratureConfig& cfg = {});

struct ExpansionPoint {
  GridPoint base;                  ///< alpha = theta; displaced points use alpha = theta (1 + d)
  std::vector<double> displacements;
  std::vector<double> errors;      ///< max relative error of b and c at each displacement
  double slope = 0.0;              ///< least-squares slope of log(error) on log(displacement)
};

/// CIR-ZABR truncation-error study, with both sides evaluated in quad precision.
ExpansionPoint cirzabr_expansion_slope(const GridPoint& base, const std::vector<double>& displacements);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mrsabr
