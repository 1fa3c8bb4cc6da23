#include "mrsabr/closed_forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <type_traits>

#include "mrsabr/errors.hpp"
#include "mrsabr/extended.hpp"

#include "closed_form_ratios.inc"

namespace mrsabr {

namespace {

namespace gen = detail::generated;

template <class R>
gen::Vars<R> make_vars(R a, R t, R lam, R nu, R rho, R T) {
  gen::Vars<R> v;
  auto fill = [](std::array<R, gen::kMaxPower + 1>& arr, const R& x) {
    arr[0] = R(1);
    for (int k = 1; k <= gen::kMaxPower; ++k) arr[k] = arr[k - 1] * x;
  };
  fill(v.a, a);
  fill(v.t, t);
  fill(v.lam, lam);
  fill(v.nu, nu);
  fill(v.rho, rho);
  fill(v.T, T);
  return v;
}

template <class R>
R value(const gen::Ratio<R>& r) {
  return r.num / r.den;
}

void check_common(const ModelParams& p, double t_ex) {
  p.validate();
  if (!(t_ex > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_ex must be > 0");
  if (p.lambda < kLambdaMin) {
    std::ostringstream os;
    os << "lambda " << p.lambda << " below the supported minimum " << kLambdaMin;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

// Resolves Automatic and returns e = z or w evaluated in R.
template <class R>
R exp_term(Model m, double lambda, double t_ex, RatioForm& form) {
  using std::exp;
  const double u = lambda * t_ex;
  if (form == RatioForm::Automatic) form = u > kWFormSwitch ? RatioForm::WForm : RatioForm::ZForm;
  if (form == RatioForm::ZForm) {
    if (u * z_degree(m) > kZFormExponentLimit) {
      std::ostringstream os;
      os << "lambda*T = " << u << " overflows the z-form (degree " << z_degree(m) << "); use the w-form";
      throw Error(ErrorCode::OverflowDomain, os.str());
    }
    return exp(R(lambda) * R(t_ex));
  }
  return exp(-(R(lambda) * R(t_ex)));
}

template <class R>
BasicEffectiveCoeffs<R> hsabr(const ModelParams& p, double t_ex, RatioForm form) {
  const R e = exp_term<R>(Model::HSABR, p.lambda, t_ex, form);
  const R alpha(p.alpha), theta(p.theta);
  const auto v = make_vars<R>(alpha * alpha, theta * theta, R(p.lambda), R(p.nu), R(p.rho), R(t_ex));
  const bool z = form == RatioForm::ZForm;
  BasicEffectiveCoeffs<R> c;
  c.t_ex = t_ex;
  c.tau_ex = value(z ? gen::hsabr_tau_z(v, e) : gen::hsabr_tau_w(v, e));
  c.b_bar = value(z ? gen::hsabr_b_z(v, e) : gen::hsabr_b_w(v, e));
  c.c_bar = value(z ? gen::hsabr_c_z(v, e) : gen::hsabr_c_w(v, e));
  return c;
}

template <class R>
BasicEffectiveCoeffs<R> mrsabr(const ModelParams& p, double t_ex, RatioForm form) {
  const R e = exp_term<R>(Model::MRSABR, p.lambda, t_ex, form);
  const auto v = make_vars<R>(R(p.alpha), R(p.theta), R(p.lambda), R(p.nu), R(p.rho), R(t_ex));
  const bool z = form == RatioForm::ZForm;
  BasicEffectiveCoeffs<R> c;
  c.t_ex = t_ex;
  c.tau_ex = value(z ? gen::mrsabr_tau_z(v, e) : gen::mrsabr_tau_w(v, e));
  c.b_bar = value(z ? gen::mrsabr_b_z(v, e) : gen::mrsabr_b_w(v, e));
  c.c_bar = value(z ? gen::mrsabr_c_z(v, e) : gen::mrsabr_c_w(v, e));
  c.g_int = value(z ? gen::mrsabr_g_z(v, e) : gen::mrsabr_g_w(v, e));
  return c;
}

template <class R>
BasicEffectiveCoeffs<R> cirzabr(const ModelParams& p, double t_ex, RatioForm form) {
  using std::sqrt;
  if (p.theta < kThetaFloor) {
    std::ostringstream os;
    os << "theta " << p.theta << " below the CIR-ZABR floor " << kThetaFloor;
    throw Error(ErrorCode::DegenerateTheta, os.str());
  }
  const R e = exp_term<R>(Model::CIRZABR, p.lambda, t_ex, form);
  const auto v = make_vars<R>(R(p.alpha), sqrt(R(p.theta)), R(p.lambda), R(p.nu), R(p.rho), R(t_ex));
  const bool z = form == RatioForm::ZForm;
  BasicEffectiveCoeffs<R> c;
  c.t_ex = t_ex;
  c.tau_ex = value(z ? gen::cirzabr_tau_z(v, e) : gen::cirzabr_tau_w(v, e));
  c.b_bar = value(z ? gen::cirzabr_b_z(v, e) : gen::cirzabr_b_w(v, e));
  c.c_bar = value(z ? gen::cirzabr_c_z(v, e) : gen::cirzabr_c_w(v, e));
  c.g_int = value(z ? gen::cirzabr_g_z(v, e) : gen::cirzabr_g_w(v, e));
  return c;
}

EffectiveCoeffs checked_model(const ModelParams& p, Model expected, double t_ex, RatioForm form) {
  if (p.model != expected) {
    throw Error(ErrorCode::InvalidArgument,
                "expected " + std::string(to_string(expected)) + " parameters, got " +
                    std::string(to_string(p.model)));
  }
  return effective_coeffs(p, t_ex, form);
}

}  // namespace

ExpTerm ExpTerm::make(double lambda, double t_ex) {
  const double u = lambda * t_ex;
  return {std::exp(u), std::exp(-u)};
}

int z_degree(Model m) noexcept {
  switch (m) {
    case Model::HSABR: return gen::kHsabrDegree;
    case Model::MRSABR: return gen::kMrsabrDegree;
    case Model::CIRZABR: return gen::kCirzabrDegree;
  }
  return 0;
}

namespace {

template <class R>
BasicEffectiveCoeffs<R> evaluate(const ModelParams& p, double t_ex, RatioForm form) {
  switch (p.model) {
    case Model::HSABR: return hsabr<R>(p, t_ex, form);
    case Model::MRSABR: return mrsabr<R>(p, t_ex, form);
    case Model::CIRZABR: return cirzabr<R>(p, t_ex, form);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model");
}

}  // namespace

template <class Real>
BasicEffectiveCoeffs<Real> effective_coeffs_as(const ModelParams& p, double t_ex, RatioForm form) {
  check_common(p, t_ex);
  if constexpr (std::is_same_v<Real, double>) {
    if (p.lambda * t_ex >= kDoubleEvaluationSwitch) {
      return evaluate<double>(p, t_ex, form);
    }
  }
  return coeffs_cast<Real>(evaluate<Quad>(p, t_ex, form));
}

template BasicEffectiveCoeffs<double> effective_coeffs_as<double>(const ModelParams&, double, RatioForm);
template BasicEffectiveCoeffs<Quad> effective_coeffs_as<Quad>(const ModelParams&, double, RatioForm);

EffectiveCoeffs effective_coeffs(const ModelParams& p, double t_ex, RatioForm form) {
  return effective_coeffs_as<double>(p, t_ex, form);
}

EffectiveCoeffs effective_coeffs_hsabr(const ModelParams& p, double t_ex, RatioForm form) {
  return checked_model(p, Model::HSABR, t_ex, form);
}

EffectiveCoeffs effective_coeffs_mrsabr(const ModelParams& p, double t_ex, RatioForm form) {
  return checked_model(p, Model::MRSABR, t_ex, form);
}

EffectiveCoeffs effective_coeffs_cirzabr(const ModelParams& p, double t_ex, RatioForm form) {
  return checked_model(p, Model::CIRZABR, t_ex, form);
}

template <class Real>
BasicEffectiveCoeffs<Real> special_case_coeffs_as(Model model, double sigma, double lambda, double nu,
                                                  double rho, double t_ex, double gamma) {
  using std::exp;
  using std::pow;
  if (!(sigma > 0.0) || !(lambda > 0.0) || !(t_ex > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "special case needs sigma, lambda, t_ex > 0");
  }
  using R = Quad;
  const R s(sigma), l(lambda), n(nu), r(rho), T(t_ex);
  const R u = l * T;
  const R e = exp(-u);
  const R u2 = u * u, u3 = u2 * u, u4 = u2 * u2;
  const R phi = (u - 1 + e) / u2;  // (lambda T - 1 + e^{-lambda T}) / (lambda T)^2

  BasicEffectiveCoeffs<R> c;
  c.t_ex = t_ex;
  c.tau_ex = s * s * T;
  switch (model) {
    case Model::HSABR: {
      const R s4 = s * s * s * s;
      c.b_bar = r * n / (s * s) * phi;
      c.c_bar = 3 * n * n / s4 * (1 + 2 * u - (2 - e) * (2 - e)) / (8 * u3) +
                3 * r * r * n * n / s4 * (u2 * e - (1 - e) * (1 - e)) / u4;
      break;
    }
    case Model::MRSABR: {
      c.b_bar = 2 * r * n / s * phi;
      c.c_bar = 3 * n * n / (s * s) * (1 + r * r) * (1 + 2 * u - (2 - e) * (2 - e)) / (2 * u3) +
                12 * r * r * n * n / (s * s) * (u2 * e - (1 - e) * (1 - e)) / u4;
      c.g_int = n * n * s * s * (2 * u - 1 + exp(-2 * u)) / (4 * l * l);
      break;
    }
    case Model::CIRZABR: {
      const R g(gamma);
      const R p = pow(s, 2 * (g - 1) - 2);
      c.b_bar = 2 * r * n * pow(s, g - 2) * phi;
      c.c_bar = 3 * (1 + r * r) * n * n * p / (2 * u3) * (2 * u + 4 * e - 3 - e * e) +
                6 * (1 + g) * r * r * n * n * p / u3 * (u + 2 * e - 2 + u * e) -
                12 * r * r * n * n * p * phi * phi;
      c.g_int = n * n * pow(s, 2 * g) * (2 * u - 1 + exp(-2 * u)) / (4 * l * l);
      break;
    }
  }
  return coeffs_cast<Real>(c);
}

template BasicEffectiveCoeffs<double> special_case_coeffs_as<double>(Model, double, double, double, double,
                                                                     double, double);
template BasicEffectiveCoeffs<Quad> special_case_coeffs_as<Quad>(Model, double, double, double, double,
                                                                 double, double);

EffectiveCoeffs special_case_coeffs(Model model, double sigma, double lambda, double nu, double rho,
                                    double t_ex, double gamma) {
  return special_case_coeffs_as<double>(model, sigma, lambda, nu, rho, t_ex, gamma);
}

StdSabrMapping to_std_sabr(const EffectiveCoeffs& c) {
  if (!(c.tau_ex > 0.0) || !(c.t_ex > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "to_std_sabr needs tau_ex > 0 and t_ex > 0");
  }
  const double tol = kCbarTolerance * std::max(1.0, c.b_bar * c.b_bar);
  if (c.c_bar < -tol || !std::isfinite(c.c_bar)) {
    std::ostringstream os;
    os << "c_bar = " << c.c_bar << " is negative";
    throw Error(ErrorCode::NegativeCbar, os.str());
  }
  const double cbar = std::max(c.c_bar, 0.0);
  const double ratio = c.tau_ex / c.t_ex;
  double exponent = -0.25 * cbar * c.tau_ex;
  if (c.g_int) exponent += *c.g_int / (2.0 * c.tau_ex);

  StdSabrMapping m;
  m.params.t_ex = c.t_ex;
  m.params.alpha = std::sqrt(ratio) * std::exp(exponent);
  m.params.nu = std::sqrt(ratio * cbar);
  if (cbar == 0.0) {
    m.params.rho = 0.0;
    if (c.b_bar != 0.0) {
      m.params.rho = std::copysign(0.999, c.b_bar);
      m.rho_clamped = true;
    }
    return m;
  }
  const double rho = c.b_bar / std::sqrt(cbar);
  if (std::abs(rho) >= 1.0) {
    m.params.rho = std::copysign(0.999, rho);
    m.rho_clamped = true;
  } else {
    m.params.rho = rho;
  }
  return m;
}

double implied_vol(const ModelParams& p, double t_ex, const OptionPoint& pt) {
  return black_vol_lognormal_sabr(to_std_sabr(effective_coeffs(p, t_ex)).params, pt);
}

}  // namespace mrsabr
