#pragma once

#include <optional>
#include <string_view>

namespace mrsabr {

enum class Model {
  HSABR,    ///< CIR variance (Heston) approximated by SABR
  MRSABR,   ///< mean-reverting lognormal volatility
  CIRZABR,  ///< mean-reverting CIR volatility (ZABR with gamma = 1/2)
};

std::string_view to_string(Model m) noexcept;

/// Accepts "hsabr", "mrsabr", "cirzabr" (case-insensitive).  Throws InvalidArgument.
Model parse_model(std::string_view name);

/// Five model parameters.  alpha and theta are volatilities for every model;
/// the hSABR closed forms square them internally.
struct ModelParams {
  Model model = Model::MRSABR;
  double alpha = 0.0;   ///< initial instantaneous volatility
  double theta = 0.0;   ///< long-run volatility
  double lambda = 0.0;  ///< mean-reversion speed, 1/years
  double nu = 0.0;      ///< vol-of-vol (CIR-scaled for HSABR and CIRZABR)
  double rho = 0.0;     ///< spot/vol correlation

  void validate() const;
};

/// Effective coefficients for one expiry.  g_int is present for MRSABR and CIRZABR.
template <class Real>
struct BasicEffectiveCoeffs {
  Real tau_ex{};
  Real b_bar{};
  Real c_bar{};
  std::optional<Real> g_int;
  double t_ex = 0.0;
};

using EffectiveCoeffs = BasicEffectiveCoeffs<double>;

template <class To, class From>
BasicEffectiveCoeffs<To> coeffs_cast(const BasicEffectiveCoeffs<From>& c) {
  BasicEffectiveCoeffs<To> out;
  out.tau_ex = static_cast<To>(c.tau_ex);
  out.b_bar = static_cast<To>(c.b_bar);
  out.c_bar = static_cast<To>(c.c_bar);
  if (c.g_int) out.g_int = static_cast<To>(*c.g_int);
  out.t_ex = c.t_ex;
  return out;
}

}  // namespace mrsabr
