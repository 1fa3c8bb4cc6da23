#pragma once

// Independent evaluation of the effective coefficients from their nested
// integral definitions.  The innermost integrals with elementary
// antiderivatives are done analytically; every other level runs through
// adaptive Gauss-Kronrod quadrature.

#include "mrsabr/model.hpp"
#include "mrsabr/quadrature.hpp"

namespace mrsabr {

/// Expected future variance / volatility under the mean-reverting drift.
struct ExpectedVolCurve {
  double alpha0 = 0.0;
  double theta0 = 0.0;
  double lambda = 0.0;

  /// alpha0^2 e^{-lambda T} + theta0^2 (1 - e^{-lambda T})
  template <class R>
  R variance(const R& t) const {
    using std::exp;
    const R e = exp(-R(lambda) * t);
    return R(alpha0) * R(alpha0) * e + R(theta0) * R(theta0) * (1 - e);
  }

  /// theta0 + (alpha0 - theta0) e^{-lambda T}
  template <class R>
  R vol(const R& t) const {
    using std::exp;
    return R(theta0) + (R(alpha0) - R(theta0)) * exp(-R(lambda) * t);
  }
};

/// CEV vol-of-vol nu * A^gamma; psi(A) = nu A^{gamma+1}, psi'(A) = (gamma+1) nu A^gamma.
struct ZabrSpec {
  double nu = 0.0;
  double gamma = 0.5;

  void validate() const;
};

template <class Real>
BasicEffectiveCoeffs<Real> oracle_coeffs_hsabr_as(const ModelParams& p, double t_ex,
                                                  const QuadratureConfig& cfg);
template <class Real>
BasicEffectiveCoeffs<Real> oracle_coeffs_mrsabr_as(const ModelParams& p, double t_ex,
                                                   const QuadratureConfig& cfg);
/// Uses alpha, theta, lambda, rho from `p` and nu, gamma from `spec`.
template <class Real>
BasicEffectiveCoeffs<Real> oracle_coeffs_mrzabr_as(const ModelParams& p, const ZabrSpec& spec,
                                                   double t_ex, const QuadratureConfig& cfg);

EffectiveCoeffs oracle_coeffs_hsabr(const ModelParams& p, double t_ex, const QuadratureConfig& cfg = {});
EffectiveCoeffs oracle_coeffs_mrsabr(const ModelParams& p, double t_ex, const QuadratureConfig& cfg = {});
EffectiveCoeffs oracle_coeffs_mrzabr(const ModelParams& p, const ZabrSpec& spec, double t_ex,
                                     const QuadratureConfig& cfg = {});

/// Dispatch on p.model; CIRZABR maps to the mrZABR oracle with gamma = 1/2.
EffectiveCoeffs oracle_coeffs(const ModelParams& p, double t_ex, const QuadratureConfig& cfg = {});

/// Quadrature settings suited to the quad-precision instantiation.
QuadratureConfig extended_quadrature_config();

}  // namespace mrsabr
