#pragma once

// Closed-form effective coefficients of the mean-reverting SABR family and
// their mapping onto per-expiry standard SABR parameters.
//
// Every coefficient is a ratio of two polynomials in the model parameters,
// the expiry and z = exp(lambda * T).  The z-form is used for small
// lambda * T; for larger values numerator and denominator are rescaled by
// w^d (w = 1/z, d the top z-degree) so every term is a power of w in (0, 1].
// Near lambda * T -> 0 the polynomials cancel to O((lambda T)^4), so below
// kDoubleEvaluationSwitch the ratios are evaluated in quad precision.

#include "mrsabr/model.hpp"
#include "mrsabr/sabr_kernel.hpp"

namespace mrsabr {

enum class RatioForm { Automatic, ZForm, WForm };

/// Automatic form selection switches from z to w above this lambda * T.
inline constexpr double kWFormSwitch = 20.0;
/// z-form evaluation is refused when z^degree would exceed exp(kZFormExponentLimit).
inline constexpr double kZFormExponentLimit = 700.0;
/// Double results at or above this lambda * T come from double arithmetic
/// (relative error about 1e-14); below it from quad precision.
inline constexpr double kDoubleEvaluationSwitch = 2.0;
/// Every ratio is 0/0 at lambda = 0; smaller reversion speeds are rejected.
inline constexpr double kLambdaMin = 1e-4;
/// CIR-ZABR ratios divide by powers of sqrt(theta).
inline constexpr double kThetaFloor = 1e-6;
/// c-bar values in [-kCbarTolerance * max(1, b^2), 0) are treated as zero.
inline constexpr double kCbarTolerance = 1e-12;

/// z = e^{lambda T} and w = e^{-lambda T}.
struct ExpTerm {
  double z = 1.0;
  double w = 1.0;

  static ExpTerm make(double lambda, double t_ex);
};

/// Top z-degree of the model's ratios.
int z_degree(Model m) noexcept;

/// Closed-form coefficients evaluated and returned in `Real`
/// (instantiated for double and boost::multiprecision::float128).
template <class Real>
BasicEffectiveCoeffs<Real> effective_coeffs_as(const ModelParams& p, double t_ex,
                                               RatioForm form = RatioForm::Automatic);

EffectiveCoeffs effective_coeffs(const ModelParams& p, double t_ex,
                                 RatioForm form = RatioForm::Automatic);
EffectiveCoeffs effective_coeffs_hsabr(const ModelParams& p, double t_ex,
                                       RatioForm form = RatioForm::Automatic);
EffectiveCoeffs effective_coeffs_mrsabr(const ModelParams& p, double t_ex,
                                        RatioForm form = RatioForm::Automatic);
EffectiveCoeffs effective_coeffs_cirzabr(const ModelParams& p, double t_ex,
                                         RatioForm form = RatioForm::Automatic);

/// Constant-expected-volatility (alpha = theta = sigma) coefficients.
/// `gamma` selects the CEV exponent of the ZABR branch and is ignored otherwise.
template <class Real>
BasicEffectiveCoeffs<Real> special_case_coeffs_as(Model model, double sigma, double lambda, double nu,
                                                  double rho, double t_ex, double gamma = 0.5);

EffectiveCoeffs special_case_coeffs(Model model, double sigma, double lambda, double nu, double rho,
                                    double t_ex, double gamma = 0.5);

struct StdSabrMapping {
  StdSabrParams params;
  bool rho_clamped = false;  ///< |b / sqrt(c)| >= 1, clamped to +-0.999
};

/// alpha_std = sqrt(tau/T) exp(-c tau / 4 [+ G / (2 tau)]), rho_std = b / sqrt(c),
/// nu_std = sqrt(tau c / T).  Throws NegativeCbar for materially negative c.
StdSabrMapping to_std_sabr(const EffectiveCoeffs& c);

/// Black implied volatility of the five-parameter model (beta = 1).
double implied_vol(const ModelParams& p, double t_ex, const OptionPoint& pt);

}  // namespace mrsabr
