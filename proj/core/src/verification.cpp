#include "mrsabr/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mrsabr/closed_forms.hpp"
#include "mrsabr/errors.hpp"
#include "mrsabr/extended.hpp"
#include "mrsabr/oracle.hpp"

namespace mrsabr {

namespace {

template <class R>
R rel(const R& a, const R& b) {
  using std::abs;
  return b == 0 ? abs(a - b) : abs((a - b) / b);
}

}  // namespace

std::vector<GridPoint> random_grid(Model model, std::size_t count, std::uint64_t seed, bool alpha_eq_theta,
                                   const GridRanges& r) {
  std::mt19937_64 rng(seed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<GridPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    GridPoint g;
    g.params.model = model;
    g.params.alpha = u(r.vol_lo, r.vol_hi);
    g.params.theta = u(r.vol_lo, r.vol_hi);
    if (alpha_eq_theta) g.params.theta = g.params.alpha;
    g.params.lambda = u(r.lambda_lo, r.lambda_hi);
    g.params.nu = u(r.nu_lo, r.nu_hi);
    g.params.rho = u(r.rho_lo, r.rho_hi);
    g.t_ex = u(r.t_lo, r.t_hi);
    out.push_back(g);
  }
  return out;
}

double max_relative_error(const EffectiveCoeffs& v, const EffectiveCoeffs& ref) {
  double e = std::max({rel(v.tau_ex, ref.tau_ex), rel(v.b_bar, ref.b_bar), rel(v.c_bar, ref.c_bar)});
  if (v.g_int.has_value() != ref.g_int.has_value()) return std::numeric_limits<double>::infinity();
  if (v.g_int) e = std::max(e, rel(*v.g_int, *ref.g_int));
  return e;
}

VerifyReport verify_closed_forms(Model model, const std::vector<GridPoint>& grid, const QuadratureConfig& cfg) {
  VerifyReport rep;
  for (const auto& g : grid) {
    if (g.params.model != model) throw Error(ErrorCode::InvalidArgument, "grid point model mismatch");
    const auto closed = effective_coeffs(g.params, g.t_ex);
    const auto oracle = oracle_coeffs(g.params, g.t_ex, cfg);
    rep.rows.push_back(VerifyRow{g, max_relative_error(closed, oracle)});
    if (rep.rows.back().error > rep.max_error || rep.rows.size() == 1) {
      rep.max_error = rep.rows.back().error;
      rep.worst = rep.rows.size() - 1;
    }
  }
  return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "slope needs >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ExpansionPoint cirzabr_expansion_slope(const GridPoint& base, const std::vector<double>& displacements) {
  ExpansionPoint ep;
  ep.base = base;
  ep.base.params.model = Model::CIRZABR;
  ep.base.params.alpha = ep.base.params.theta;
  ep.displacements = displacements;
  const auto cfg = extended_quadrature_config();
  for (double d : displacements) {
    ModelParams p = ep.base.params;
    p.alpha = p.theta * (1.0 + d);
    const auto closed = effective_coeffs_as<Quad>(p, base.t_ex);
    const auto oracle = oracle_coeffs_mrzabr_as<Quad>(p, ZabrSpec{p.nu, 0.5}, base.t_ex, cfg);
    const Quad e = std::max(rel(closed.b_bar, oracle.b_bar), rel(closed.c_bar, oracle.c_bar));
    ep.errors.push_back(static_cast<double>(e));
  }
  ep.slope = loglog_slope(ep.displacements, ep.errors);
  return ep;
}

}  // namespace mrsabr
