#pragma once

// RMSE calibration of the five model parameters to implied-volatility surfaces.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mrsabr/model.hpp"

namespace mrsabr {

struct VolQuote {
  double t_ex = 0.0;
  double forward = 0.0;
  double strike = 0.0;
  double market_vol = 0.0;
  double weight = 1.0;

  void validate() const;
};

struct VolSurface {
  std::string as_of;
  std::vector<VolQuote> quotes;

  /// Quote invariants plus the six-quote minimum for a five-parameter fit.
  void validate() const;
};

enum class Param { Alpha, Theta, Lambda, Nu, Rho };
inline constexpr std::array<Param, 5> kAllParams{Param::Alpha, Param::Theta, Param::Lambda, Param::Nu,
                                                 Param::Rho};

std::string_view to_string(Param p) noexcept;
/// "alpha", "theta", "lambda", "nu", "rho".  Throws InvalidArgument.
Param parse_param(std::string_view name);
/// Comma-separated list, e.g. "alpha,theta".
std::vector<Param> parse_param_list(std::string_view list);

double get(const ModelParams& p, Param which) noexcept;
void set(ModelParams& p, Param which, double value) noexcept;

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// alpha, theta in [0.01, 2]; lambda in [0.05, 50]; nu in [0.01, 10]; rho in [-0.999, 0.999].
std::array<Bounds, 5> default_bounds() noexcept;

struct CalibrationSpec {
  Model model = Model::MRSABR;
  std::vector<Param> free_params{kAllParams.begin(), kAllParams.end()};
  std::map<Param, double> fixed_values;
  bool tie_alpha_theta = false;  ///< theta := alpha; theta is dropped from the free set
  std::array<Bounds, 5> bounds = default_bounds();
  int multistart_count = 8;
  std::uint64_t seed = 42;
  int max_evals_per_start = 2000;
  double simplex_tol = 1e-8;
  /// Parameters refit on every date in the GlobalExceptFree and PreviousPeriod
  /// batch modes; the remaining free parameters are shared across dates.
  std::vector<Param> per_date_params{Param::Alpha};

  void validate() const;
  /// Free parameters after applying the tie.
  std::vector<Param> effective_free() const;
};

struct FellerDiagnostic {
  Model model = Model::MRSABR;
  std::string condition;  ///< e.g. "2*lambda*theta^2 > nu^2"
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;

  double margin() const noexcept { return lhs - rhs; }
};

/// hSABR: 2 lambda theta^2 > nu^2; mrSABR: lambda > nu^2 / 2; CIR-ZABR: 2 lambda theta > nu^2.
FellerDiagnostic feller_check(const ModelParams& p);

struct CalibrationResult {
  std::string as_of;
  ModelParams params;
  double rmse = 0.0;
  std::vector<double> residuals;  ///< model minus market, in quote order
  FellerDiagnostic feller;
  bool converged = false;
  int objective_evals = 0;
};

/// Penalty returned by rmse_objective for infeasible parameter points.
inline constexpr double kPenalty = 1e3;

/// Model implied vols for every quote; throws on infeasible points.
std::vector<double> model_vols(const ModelParams& p, const VolSurface& surface);

/// Weighted RMSE sqrt(sum w (model - market)^2 / sum w).  Infeasible points give kPenalty.
double rmse_objective(const ModelParams& p, const VolSurface& surface);

/// Best-of-multistart bounded Nelder-Mead.  Deterministic for a given seed.
/// Throws InsufficientQuotes or NonConvergence.
CalibrationResult calibrate(const VolSurface& surface, const CalibrationSpec& spec);

enum class BatchMode { PerDate, GlobalExceptFree, PreviousPeriod };

std::string_view to_string(BatchMode m) noexcept;
/// "per-date", "global", "previous".
BatchMode parse_batch_mode(std::string_view name);

/// Surfaces must be date-ordered for PreviousPeriod.
std::vector<CalibrationResult> batch_calibrate(const std::vector<VolSurface>& surfaces,
                                               const CalibrationSpec& spec, BatchMode mode);

/// Synthetic surface: one quote per (expiry, strike) with forward `forward`
/// and market vols taken from the model itself.
VolSurface synthetic_surface(const ModelParams& p, std::string as_of, const std::vector<double>& expiries,
                             const std::vector<double>& strikes, double forward = 100.0);

/// Worker threads for multistarts: MRSABR_THREADS if set and positive,
/// otherwise std::thread::hardware_concurrency().
unsigned worker_threads();

}  // namespace mrsabr
