#pragma once

// Lognormal-SABR Black implied volatility (Hagan et al. 2002 expansion).

namespace mrsabr {

/// Per-expiry standard SABR parameters.
struct StdSabrParams {
  double alpha = 0.0;  ///< initial volatility, > 0
  double rho = 0.0;    ///< correlation, in (-1, 1)
  double nu = 0.0;     ///< lognormal vol-of-vol, >= 0
  double t_ex = 0.0;   ///< expiry in years, > 0

  /// Throws Error{InvalidArgument} when an invariant is broken.
  void validate() const;
};

struct OptionPoint {
  double forward = 0.0;
  double strike = 0.0;

  void validate() const;
};

/// Below this |z| the z/x(z) ratio switches to its Taylor series.
inline constexpr double kZOverXSeriesThreshold = 1e-6;

/// z / x(z) with x(z) = log((sqrt(1 - 2 rho z + z^2) + z - rho) / (1 - rho)).
/// Continuous through z = 0 where it equals 1.
double z_over_x(double z, double rho);

/// Direct (non-series) evaluation of z / x(z); well conditioned for |z| > 0.
double z_over_x_direct(double z, double rho);

/// Black volatility of the beta = 1 SABR model.
/// Throws Error{NonPositiveResult} if the time-correction bracket drives it <= 0.
double black_vol_lognormal_sabr(const StdSabrParams& p, const OptionPoint& pt);

/// General-beta Hagan formula; identical to black_vol_lognormal_sabr at beta = 1.
double black_vol_full_beta(const StdSabrParams& p, double beta, const OptionPoint& pt);

}  // namespace mrsabr
