#include "mrsabr/sabr_kernel.hpp"

#include <cmath>
#include <sstream>

#include "mrsabr/errors.hpp"

namespace mrsabr {

namespace {

[[noreturn]] void invalid(const char* what, double value) {
  std::ostringstream os;
  os << what << " (got " << value << ")";
  throw Error(ErrorCode::InvalidArgument, os.str());
}

// log((sqrt(1 - 2 rho z + z^2) + z - rho) / (1 - rho)), free of cancellation
// near z = 0 and for large negative z.
double x_of_z(double z, double rho) {
  const double s = std::sqrt(1.0 - 2.0 * rho * z + z * z);
  if (std::abs(z) < 0.5) {
    // s - 1 = (z^2 - 2 rho z) / (s + 1)
    const double y = z * ((z - 2.0 * rho) / (s + 1.0) + 1.0) / (1.0 - rho);
    return std::log1p(y);
  }
  const double d = z - rho;
  const double num = d >= 0.0 ? s + d : (1.0 - rho * rho) / (s - d);
  return std::log(num / (1.0 - rho));
}

double checked_vol(double vol) {
  if (!(vol > 0.0) || !std::isfinite(vol)) {
    std::ostringstream os;
    os << "implied volatility " << vol << " outside the approximation's validity";
    throw Error(ErrorCode::NonPositiveResult, os.str());
  }
  return vol;
}

}  // namespace

void StdSabrParams::validate() const {
  if (!(alpha > 0.0)) invalid("alpha_std must be > 0", alpha);
  if (!(nu >= 0.0)) invalid("nu_std must be >= 0", nu);
  if (!(rho > -1.0 && rho < 1.0)) invalid("rho_std must lie in (-1, 1)", rho);
  if (!(t_ex > 0.0)) invalid("t_ex must be > 0", t_ex);
}

void OptionPoint::validate() const {
  if (!(forward > 0.0)) invalid("forward must be > 0", forward);
  if (!(strike > 0.0)) invalid("strike must be > 0", strike);
}

double z_over_x_direct(double z, double rho) {
  if (z == 0.0) return 1.0;
  return z / x_of_z(z, rho);
}

double z_over_x(double z, double rho) {
  if (std::abs(z) < kZOverXSeriesThreshold) {
    return 1.0 - 0.5 * rho * z + (2.0 - 3.0 * rho * rho) * z * z / 12.0;
  }
  return z_over_x_direct(z, rho);
}

double black_vol_lognormal_sabr(const StdSabrParams& p, const OptionPoint& pt) {
  p.validate();
  pt.validate();
  const double bracket =
      1.0 + (0.25 * p.rho * p.nu * p.alpha + (2.0 - 3.0 * p.rho * p.rho) * p.nu * p.nu / 24.0) * p.t_ex;
  if (pt.strike == pt.forward || p.nu == 0.0) {
    return checked_vol(p.alpha * bracket);
  }
  const double z = p.nu / p.alpha * std::log(pt.forward / pt.strike);
  return checked_vol(z_over_x(z, p.rho) * p.alpha * bracket);
}

double black_vol_full_beta(const StdSabrParams& p, double beta, const OptionPoint& pt) {
  p.validate();
  pt.validate();
  if (!(beta >= 0.0 && beta <= 1.0)) invalid("beta must lie in [0, 1]", beta);
  if (beta == 1.0) return black_vol_lognormal_sabr(p, pt);

  const double omb = 1.0 - beta;
  const double f = pt.forward;
  const double k = pt.strike;
  if (f == k) {
    const double fp = std::pow(f, omb);
    const double bracket = 1.0 + (omb * omb / 24.0 * p.alpha * p.alpha / (fp * fp) +
                                  0.25 * p.rho * beta * p.nu * p.alpha / fp +
                                  (2.0 - 3.0 * p.rho * p.rho) / 24.0 * p.nu * p.nu) *
                                     p.t_ex;
    return checked_vol(p.alpha * bracket / fp);
  }
  const double fav = std::sqrt(f * k);
  const double fav_p = std::pow(fav, omb);
  const double log_fk = std::log(f / k);
  const double z = p.nu / p.alpha * fav_p * log_fk;
  const double l2 = log_fk * log_fk;
  const double denom = 1.0 + omb * omb / 24.0 * l2 + std::pow(omb, 4) / 1920.0 * l2 * l2;
  const double bracket = 1.0 + (omb * omb / 24.0 * p.alpha * p.alpha / (fav_p * fav_p) +
                                0.25 * beta * p.rho * p.nu * p.alpha / fav_p +
                                (2.0 - 3.0 * p.rho * p.rho) / 24.0 * p.nu * p.nu) *
                                   p.t_ex;
  const double zx = p.nu == 0.0 ? 1.0 : z_over_x(z, p.rho);
  return checked_vol(zx * p.alpha / fav_p * bracket / denom);
}

}  // namespace mrsabr
