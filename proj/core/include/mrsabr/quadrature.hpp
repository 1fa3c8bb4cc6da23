#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature, generic over the real type.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mrsabr/errors.hpp"

namespace mrsabr {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_subdivisions = 200;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1) {
      throw Error(ErrorCode::InvalidArgument, "quadrature config needs rel_tol > 0, abs_tol >= 0, max_subdivisions >= 1");
    }
  }

  /// Tolerances for an integral nested inside another one.
  QuadratureConfig nested() const {
    QuadratureConfig c = *this;
    c.rel_tol = rel_tol * 1e-2;
    c.abs_tol = abs_tol * 1e-2;
    return c;
  }
};

template <class Real>
struct QuadratureResult {
  Real value{};
  Real error{};
  int subdivisions = 0;
};

namespace detail {

template <class Real>
struct GkPanel {
  Real a, b, value, error, resabs;
  bool operator<(const GkPanel& o) const { return error < o.error; }
};

template <class Real, class F>
GkPanel<Real> gauss_kronrod_15(F& f, Real a, Real b) {
  using std::abs;
  using std::pow;
  using Rule = boost::math::quadrature::gauss_kronrod<Real, 15>;
  static const auto& x = Rule::abscissa();
  static const auto& wk = Rule::weights();
  static const auto& wg = boost::math::quadrature::gauss<Real, 7>::weights();

  const Real half = (b - a) / 2;
  const Real mid = (a + b) / 2;
  const Real fc = f(mid);
  Real kron = fc * wk[0];
  Real gauss = fc * wg[0];
  Real resabs = abs(kron);
  Real fv1[7], fv2[7];
  for (std::size_t j = 1; j < x.size(); ++j) {
    const Real dx = half * x[j];
    const Real f1 = f(mid - dx);
    const Real f2 = f(mid + dx);
    fv1[j - 1] = f1;
    fv2[j - 1] = f2;
    kron += wk[j] * (f1 + f2);
    resabs += wk[j] * (abs(f1) + abs(f2));
    // Gauss nodes sit at the even Kronrod positions.
    if (j % 2 == 0) gauss += wg[j / 2] * (f1 + f2);
  }
  const Real mean = kron / 2;
  Real resasc = wk[0] * abs(fc - mean);
  for (std::size_t j = 1; j < x.size(); ++j) {
    resasc += wk[j] * (abs(fv1[j - 1] - mean) + abs(fv2[j - 1] - mean));
  }
  resasc *= abs(half);
  resabs *= abs(half);

  Real err = abs((kron - gauss) * half);
  if (resasc != 0 && err != 0) {
    err = resasc * std::min(Real(1), Real(pow(Real(200) * err / resasc, Real(1.5))));
  }
  const Real eps = std::numeric_limits<Real>::epsilon();
  if (resabs > std::numeric_limits<Real>::min() / (50 * eps)) {
    err = std::max(Real(eps * 50 * resabs), err);
  }
  return {a, b, kron * half, err, resabs};
}

}  // namespace detail

/// Integrates f over [a, b].  Throws Error{QuadratureFailure} when the error
/// estimate cannot be brought below max(abs_tol, rel_tol |I|, 100 eps int |f|);
/// the last term is the roundoff floor of the per-panel error estimate.
template <class Real, class F>
QuadratureResult<Real> integrate(F&& f, Real a, Real b, const QuadratureConfig& cfg) {
  using std::abs;
  if (a == b) return {Real(0), Real(0), 0};
  std::priority_queue<detail::GkPanel<Real>> panels;
  panels.push(detail::gauss_kronrod_15<Real>(f, a, b));
  Real value = panels.top().value;
  Real error = panels.top().error;
  Real resabs = panels.top().resabs;
  int subdivisions = 1;
  const Real floor = Real(100) * std::numeric_limits<Real>::epsilon();
  const auto target = [&] { return std::max({Real(cfg.abs_tol), Real(cfg.rel_tol) * abs(value), floor * resabs}); };
  while (error > target()) {
    if (subdivisions >= cfg.max_subdivisions) {
      std::ostringstream os;
      os << "error estimate " << static_cast<double>(error) << " above target "
         << static_cast<double>(target()) << " after " << subdivisions << " panels";
      throw Error(ErrorCode::QuadratureFailure, os.str());
    }
    const auto worst = panels.top();
    panels.pop();
    const Real mid = (worst.a + worst.b) / 2;
    const auto left = detail::gauss_kronrod_15<Real>(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15<Real>(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    resabs += left.resabs + right.resabs - worst.resabs;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
  }
  // Re-sum to shed the accumulated update rounding.
  value = 0;
  error = 0;
  while (!panels.empty()) {
    value += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  return {value, error, subdivisions};
}

}  // namespace mrsabr
