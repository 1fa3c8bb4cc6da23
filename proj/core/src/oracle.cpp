#include "mrsabr/oracle.hpp"

#include <cmath>
#include <sstream>

#include "mrsabr/errors.hpp"
#include "mrsabr/extended.hpp"

namespace mrsabr {

namespace {

// (1 - e^{-lambda d}) / lambda
template <class R>
R decay_integral(const R& lambda, const R& d) {
  using std::expm1;
  return -expm1(-lambda * d) / lambda;
}

template <class R, class F>
R quad(F&& f, const R& a, const R& b, const QuadratureConfig& cfg) {
  return integrate<R>(std::forward<F>(f), a, b, cfg).value;
}

void check_inputs(const ModelParams& p, double t_ex, const QuadratureConfig& cfg) {
  p.validate();
  cfg.validate();
  if (!(t_ex > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_ex must be > 0");
}

}  // namespace

void ZabrSpec::validate() const {
  if (!(nu >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ZABR nu must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.5)) throw Error(ErrorCode::InvalidArgument, "ZABR gamma must lie in [0, 1.5]");
}

QuadratureConfig extended_quadrature_config() {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-26;
  cfg.abs_tol = 1e-40;
  cfg.max_subdivisions = 400;
  return cfg;
}

// hSABR:
//   tau  = int_0^Tex V
//   I2   = rho nu int_0^Tex V(T1) int_T1^Tex e^{-lambda (T2 - T1)} dT2 dT1
//   D(T) = int_T^Tex e^{-lambda (T1 - T)} dT1
//   I4   = rho^2 nu^2 int_0^T V(T1) e^{-lambda (T - T1)} dT1
//   b = I2 / tau^2
//   c = 3 nu^2 / (4 tau^3) int V D^2 + 3 / tau^3 int I4 D - 3 b^2
template <class Real>
BasicEffectiveCoeffs<Real> oracle_coeffs_hsabr_as(const ModelParams& p, double t_ex,
                                                  const QuadratureConfig& cfg) {
  using std::exp;
  check_inputs(p, t_ex, cfg);
  const ExpectedVolCurve curve{p.alpha, p.theta, p.lambda};
  const Real lam(p.lambda), nu(p.nu), rho(p.rho), T(t_ex);
  const auto inner = cfg.nested();
  const auto V = [&](const Real& t) { return curve.variance(t); };
  const auto D = [&](const Real& t) { return decay_integral(lam, T - t); };

  const Real tau = quad<Real>(V, Real(0), T, cfg);
  const Real i2 = quad<Real>([&](const Real& t1) { return V(t1) * D(t1); }, Real(0), T, cfg);
  const Real vol_term = quad<Real>([&](const Real& t) { return V(t) * D(t) * D(t); }, Real(0), T, cfg);
  const Real skew_term = quad<Real>(
      [&](const Real& t) {
        const Real i4 = quad<Real>([&](const Real& t1) { return V(t1) * exp(-lam * (t - t1)); }, Real(0), t, inner);
        return i4 * D(t);
      },
      Real(0), T, cfg);

  BasicEffectiveCoeffs<Real> c;
  c.t_ex = t_ex;
  c.tau_ex = tau;
  c.b_bar = rho * nu * i2 / (tau * tau);
  const Real tau3 = tau * tau * tau;
  c.c_bar = Real(3) / 4 * nu * nu * vol_term / tau3 + 3 * rho * rho * nu * nu * skew_term / tau3 -
            3 * c.b_bar * c.b_bar;
  return c;
}

// mrSABR, coded straight from the five intermediate integrals:
//   I1 = rho nu   int_0^T a^2(T1) e^{-lambda (T - T1)}
//   I2 = nu^2     int_0^T a^2(T1) e^{-lambda (T - T1)} int_T1^T a(T2) e^{-lambda (T2 - T1)}
//   I3 = rho nu   int_0^T a^2(T1) int_T1^T a(T2) e^{-lambda (T2 - T1)}
//   I4 = rho^2 nu^2 int_0^T a^2(T1) e^{-lambda (T - T1)} int_T1^T a(T2)
//   I5 = nu^2     int_0^T a^2(T1) e^{-2 lambda (T - T1)}
template <class Real>
BasicEffectiveCoeffs<Real> oracle_coeffs_mrsabr_as(const ModelParams& p, double t_ex,
                                                   const QuadratureConfig& cfg) {
  using std::exp;
  check_inputs(p, t_ex, cfg);
  const ExpectedVolCurve curve{p.alpha, p.theta, p.lambda};
  const Real lam(p.lambda), nu(p.nu), rho(p.rho), T(t_ex), theta(p.theta), delta = Real(p.alpha) - Real(p.theta);
  const auto inner = cfg.nested();
  const auto a = [&](const Real& t) { return curve.vol(t); };
  const auto a2 = [&](const Real& t) { const Real v = curve.vol(t); return v * v; };
  // int_t1^t a(T2) e^{-lambda (T2 - t1)} dT2
  const auto j_exp = [&](const Real& t1, const Real& t) {
    return theta * decay_integral(lam, t - t1) + delta * exp(-lam * t1) * decay_integral(Real(2) * lam, t - t1);
  };
  // int_t1^t a(T2) dT2
  const auto j_plain = [&](const Real& t1, const Real& t) {
    return theta * (t - t1) + delta * exp(-lam * t1) * decay_integral(lam, t - t1);
  };

  const Real tau = quad<Real>(a2, Real(0), T, cfg);
  const Real i3 = quad<Real>([&](const Real& t1) { return a2(t1) * j_exp(t1, T); }, Real(0), T, cfg);
  const Real assembled = quad<Real>(
      [&](const Real& t) {
        const Real i1 =
            quad<Real>([&](const Real& t1) { return a2(t1) * exp(-lam * (t - t1)); }, Real(0), t, inner);
        const Real i2 = quad<Real>(
            [&](const Real& t1) { return a2(t1) * exp(-lam * (t - t1)) * j_exp(t1, t); }, Real(0), t, inner);
        const Real i4 = quad<Real>(
            [&](const Real& t1) { return a2(t1) * exp(-lam * (t - t1)) * j_plain(t1, t); }, Real(0), t, inner);
        const Real rn = rho * nu;
        return 2 * a(t) * nu * nu * i2 + rn * rn * i1 * i1 + 4 * a(t) * rn * rn * i4;
      },
      Real(0), T, cfg);
  const Real g = quad<Real>(
      [&](const Real& t) {
        return quad<Real>([&](const Real& t1) { return a2(t1) * exp(-2 * lam * (t - t1)); }, Real(0), t, inner);
      },
      Real(0), T, cfg);

  BasicEffectiveCoeffs<Real> c;
  c.t_ex = t_ex;
  c.tau_ex = tau;
  c.b_bar = 2 * rho * nu * i3 / (tau * tau);
  c.c_bar = 3 * assembled / (tau * tau * tau) - 3 * c.b_bar * c.b_bar;
  c.g_int = nu * nu * g;
  return c;
}

// General mrZABR with psi(A) = nu A^{gamma+1}, v(A) = nu A^gamma:
//   I1 = rho int psi(a(T1)) e^{-lambda (T - T1)}
//   I2 = int v^2(a(T1)) e^{-2 lambda (T - T1)} int_T1^T a(T2) e^{lambda (T - T2)}
//   I3 = rho int psi(a(T1)) e^{-lambda (T - T1)} int_T1^T a(T2) e^{lambda (T - T2)}
//   I4 = rho^2 / 2 int psi(a(T1)) e^{-lambda (T - T1)} int_T1^T psi'(a(T2))
//   I5 = int v^2(a(T1)) e^{-2 lambda (T - T1)}
// and the mrSABR assembly of tau, b, c, G.  nu is factored out of psi and v.
template <class Real>
BasicEffectiveCoeffs<Real> oracle_coeffs_mrzabr_as(const ModelParams& p, const ZabrSpec& spec, double t_ex,
                                                   const QuadratureConfig& cfg) {
  using std::exp;
  using std::pow;
  check_inputs(p, t_ex, cfg);
  spec.validate();
  const ExpectedVolCurve curve{p.alpha, p.theta, p.lambda};
  const Real lam(p.lambda), nu(spec.nu), rho(p.rho), T(t_ex), gamma(spec.gamma);
  const auto inner = cfg.nested();
  const auto inner2 = inner.nested();
  const auto a = [&](const Real& t) { return curve.vol(t); };
  const auto psi = [&](const Real& t) { return pow(curve.vol(t), gamma + 1); };
  const auto dpsi = [&](const Real& t) { return (gamma + 1) * pow(curve.vol(t), gamma); };
  const auto v2 = [&](const Real& t) { return pow(curve.vol(t), 2 * gamma); };
  // int_t1^t a(T2) e^{lambda (t - T2)} dT2, times the e^{-lambda (t - t1)} weight of the outer integrand.
  const auto weighted_j = [&](const Real& t1, const Real& t) {
    return quad<Real>([&](const Real& t2) { return a(t2) * exp(-lam * (t2 - t1)); }, t1, t, inner);
  };

  const Real tau = quad<Real>([&](const Real& t) { const Real v = a(t); return v * v; }, Real(0), T, cfg);
  const Real i3 = quad<Real>([&](const Real& t1) { return psi(t1) * weighted_j(t1, T); }, Real(0), T, cfg);
  const Real assembled = quad<Real>(
      [&](const Real& t) {
        const Real i1 = quad<Real>([&](const Real& t1) { return psi(t1) * exp(-lam * (t - t1)); }, Real(0), t, inner);
        const Real i2 = quad<Real>(
            [&](const Real& t1) {
              const Real j = quad<Real>([&](const Real& t2) { return a(t2) * exp(-lam * (t2 - t1)); }, t1, t, inner2);
              return v2(t1) * exp(-lam * (t - t1)) * j;
            },
            Real(0), t, inner);
        const Real i4 = quad<Real>(
            [&](const Real& t1) {
              const Real j = quad<Real>(dpsi, t1, t, inner2);
              return psi(t1) * exp(-lam * (t - t1)) * j;
            },
            Real(0), t, inner);
        const Real rn = rho * nu;
        return 2 * a(t) * nu * nu * i2 + rn * rn * i1 * i1 + 2 * a(t) * rn * rn * i4;
      },
      Real(0), T, cfg);
  const Real g = quad<Real>(
      [&](const Real& t) {
        return quad<Real>([&](const Real& t1) { return v2(t1) * exp(-2 * lam * (t - t1)); }, Real(0), t, inner);
      },
      Real(0), T, cfg);

  BasicEffectiveCoeffs<Real> c;
  c.t_ex = t_ex;
  c.tau_ex = tau;
  c.b_bar = 2 * rho * nu * i3 / (tau * tau);
  c.c_bar = 3 * assembled / (tau * tau * tau) - 3 * c.b_bar * c.b_bar;
  c.g_int = nu * nu * g;
  return c;
}

template BasicEffectiveCoeffs<double> oracle_coeffs_hsabr_as<double>(const ModelParams&, double,
                                                                     const QuadratureConfig&);
template BasicEffectiveCoeffs<Quad> oracle_coeffs_hsabr_as<Quad>(const ModelParams&, double,
                                                                 const QuadratureConfig&);
template BasicEffectiveCoeffs<double> oracle_coeffs_mrsabr_as<double>(const ModelParams&, double,
                                                                      const QuadratureConfig&);
template BasicEffectiveCoeffs<Quad> oracle_coeffs_mrsabr_as<Quad>(const ModelParams&, double,
                                                                  const QuadratureConfig&);
template BasicEffectiveCoeffs<double> oracle_coeffs_mrzabr_as<double>(const ModelParams&, const ZabrSpec&,
                                                                      double, const QuadratureConfig&);
template BasicEffectiveCoeffs<Quad> oracle_coeffs_mrzabr_as<Quad>(const ModelParams&, const ZabrSpec&, double,
                                                                  const QuadratureConfig&);

EffectiveCoeffs oracle_coeffs_hsabr(const ModelParams& p, double t_ex, const QuadratureConfig& cfg) {
  return oracle_coeffs_hsabr_as<double>(p, t_ex, cfg);
}

EffectiveCoeffs oracle_coeffs_mrsabr(const ModelParams& p, double t_ex, const QuadratureConfig& cfg) {
  return oracle_coeffs_mrsabr_as<double>(p, t_ex, cfg);
}

EffectiveCoeffs oracle_coeffs_mrzabr(const ModelParams& p, const ZabrSpec& spec, double t_ex,
                                     const QuadratureConfig& cfg) {
  return oracle_coeffs_mrzabr_as<double>(p, spec, t_ex, cfg);
}

EffectiveCoeffs oracle_coeffs(const ModelParams& p, double t_ex, const QuadratureConfig& cfg) {
  switch (p.model) {
    case Model::HSABR: return oracle_coeffs_hsabr(p, t_ex, cfg);
    case Model::MRSABR: return oracle_coeffs_mrsabr(p, t_ex, cfg);
    case Model::CIRZABR: return oracle_coeffs_mrzabr(p, ZabrSpec{p.nu, 0.5}, t_ex, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model");
}

}  // namespace mrsabr
