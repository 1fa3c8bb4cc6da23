#include "mrsabr/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "mrsabr/closed_forms.hpp"
#include "mrsabr/errors.hpp"
#include "mrsabr/optimizer.hpp"
#include "mrsabr/sabr_kernel.hpp"

namespace mrsabr {

namespace {

constexpr std::size_t index(Param p) { return static_cast<std::size_t>(p); }

bool contains(const std::vector<Param>& v, Param p) { return std::find(v.begin(), v.end(), p) != v.end(); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Runs fn(0..n-1) on up to worker_threads() threads; rethrows the first failure by index.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, worker_threads());
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Quotes grouped by expiry so each coefficient set is evaluated once.
struct ExpiryGroups {
  std::vector<double> expiries;
  std::vector<std::size_t> group_of;  // per quote

  explicit ExpiryGroups(const VolSurface& s) {
    for (const auto& q : s.quotes) expiries.push_back(q.t_ex);
    std::sort(expiries.begin(), expiries.end());
    expiries.erase(std::unique(expiries.begin(), expiries.end()), expiries.end());
    for (const auto& q : s.quotes) {
      const auto it = std::lower_bound(expiries.begin(), expiries.end(), q.t_ex);
      group_of.push_back(static_cast<std::size_t>(it - expiries.begin()));
    }
  }
};

std::vector<double> vols_grouped(const ModelParams& p, const VolSurface& s, const ExpiryGroups& g) {
  std::vector<StdSabrParams> per_expiry;
  per_expiry.reserve(g.expiries.size());
  for (double t : g.expiries) per_expiry.push_back(to_std_sabr(effective_coeffs(p, t)).params);
  std::vector<double> out;
  out.reserve(s.quotes.size());
  for (std::size_t i = 0; i < s.quotes.size(); ++i) {
    const auto& q = s.quotes[i];
    out.push_back(black_vol_lognormal_sabr(per_expiry[g.group_of[i]], OptionPoint{q.forward, q.strike}));
  }
  return out;
}

// Sum of w r^2 and sum of w; residuals appended when requested.
struct SquaredError {
  double sse = 0.0;
  double weight = 0.0;
};

SquaredError squared_error(const ModelParams& p, const VolSurface& s, const ExpiryGroups& g,
                           std::vector<double>* residuals = nullptr) {
  const auto vols = vols_grouped(p, s, g);
  SquaredError e;
  for (std::size_t i = 0; i < vols.size(); ++i) {
    const double r = vols[i] - s.quotes[i].market_vol;
    if (!std::isfinite(r)) throw Error(ErrorCode::NonPositiveResult, "non-finite model vol");
    e.sse += s.quotes[i].weight * r * r;
    e.weight += s.quotes[i].weight;
    if (residuals) residuals->push_back(r);
  }
  return e;
}

// Maps unit-cube coordinates onto the free parameters of a base point.
class ParamMap {
 public:
  ParamMap(const CalibrationSpec& spec, std::vector<Param> free, ModelParams base)
      : spec_(spec), free_(std::move(free)), base_(base) {}

  std::size_t size() const { return free_.size(); }
  const std::vector<Param>& free() const { return free_; }

  ModelParams operator()(const double* x) const {
    ModelParams p = base_;
    for (std::size_t i = 0; i < free_.size(); ++i) {
      const auto& b = spec_.bounds[index(free_[i])];
      set(p, free_[i], b.lo + std::clamp(x[i], 0.0, 1.0) * (b.hi - b.lo));
    }
    if (spec_.tie_alpha_theta) p.theta = p.alpha;
    return p;
  }

  double unit(const ModelParams& p, std::size_t i) const {
    const auto& b = spec_.bounds[index(free_[i])];
    return (get(p, free_[i]) - b.lo) / (b.hi - b.lo);
  }

 private:
  const CalibrationSpec& spec_;
  std::vector<Param> free_;
  ModelParams base_;
};

// Latin-hypercube starting points in [0, 1]^dim.
std::vector<std::vector<double>> latin_hypercube(std::size_t count, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  std::vector<std::size_t> strata(count);
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t i = 0; i < count; ++i) strata[i] = i;
    std::shuffle(strata.begin(), strata.end(), rng);
    for (std::size_t i = 0; i < count; ++i)
      pts[i][d] = (static_cast<double>(strata[i]) + u(rng)) / static_cast<double>(count);
  }
  return pts;
}

ModelParams base_params(const CalibrationSpec& spec) {
  ModelParams p;
  p.model = spec.model;
  for (Param q : kAllParams) {
    const auto& b = spec.bounds[index(q)];
    set(p, q, 0.5 * (b.lo + b.hi));
  }
  for (const auto& [q, v] : spec.fixed_values) set(p, q, v);
  if (spec.tie_alpha_theta) p.theta = p.alpha;
  return p;
}

NelderMeadOptions nm_options(const CalibrationSpec& spec) {
  NelderMeadOptions o;
  o.x_tol = spec.simplex_tol;
  o.max_evals = spec.max_evals_per_start;
  return o;
}

struct StartOutcome {
  NelderMeadResult nm;
  std::size_t start = 0;
};

// Runs one bounded Nelder-Mead per start point and returns the best (ties by start index).
StartOutcome best_of_starts(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<std::vector<double>>& starts, const NelderMeadOptions& opt,
                            int& total_evals, bool& any_converged) {
  std::vector<NelderMeadResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { runs[i] = nelder_mead_box(f, starts[i], opt); });
  StartOutcome best;
  best.nm.f = std::numeric_limits<double>::infinity();
  total_evals = 0;
  any_converged = false;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    total_evals += runs[i].evals;
    any_converged = any_converged || runs[i].converged;
    if (runs[i].f < best.nm.f) {
      best.nm = runs[i];
      best.start = i;
    }
  }
  return best;
}

CalibrationResult finish(const VolSurface& s, const ModelParams& p, bool converged, int evals) {
  const ExpiryGroups g(s);
  CalibrationResult r;
  r.as_of = s.as_of;
  r.params = p;
  const auto e = squared_error(p, s, g, &r.residuals);
  r.rmse = std::sqrt(e.sse / e.weight);
  r.feller = feller_check(p);
  r.converged = converged;
  r.objective_evals = evals;
  return r;
}

void check_fit_size(const VolSurface& s, std::size_t free_count) {
  if (s.quotes.size() < 6 || free_count + 1 > s.quotes.size()) {
    std::ostringstream os;
    os << "surface '" << s.as_of << "' has " << s.quotes.size() << " quotes for " << free_count
       << " free parameters (need >= 6 and > free count)";
    throw Error(ErrorCode::InsufficientQuotes, os.str());
  }
}

void require_feasible(double best, bool converged, const std::string& what) {
  if (!converged) throw Error(ErrorCode::NonConvergence, what + ": evaluation cap hit on every start");
  if (!(best < kPenalty)) throw Error(ErrorCode::NonConvergence, what + ": no feasible parameter point found");
}

}  // namespace

void VolQuote::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(t_ex) || !positive(forward) || !positive(strike) || !positive(market_vol)) {
    throw Error(ErrorCode::InvalidArgument, "quote fields t_ex, forward, strike, market_vol must be finite and > 0");
  }
  if (!(std::isfinite(weight) && weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "quote weight must be >= 0");
}

void VolSurface::validate() const {
  for (const auto& q : quotes) q.validate();
  if (quotes.size() < 6) {
    std::ostringstream os;
    os << "surface '" << as_of << "' has " << quotes.size() << " quotes; at least 6 are required";
    throw Error(ErrorCode::InsufficientQuotes, os.str());
  }
  double w = 0.0;
  for (const auto& q : quotes) w += q.weight;
  if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "surface '" + as_of + "' has zero total weight");
}

std::string_view to_string(Param p) noexcept {
  switch (p) {
    case Param::Alpha: return "alpha";
    case Param::Theta: return "theta";
    case Param::Lambda: return "lambda";
    case Param::Nu: return "nu";
    case Param::Rho: return "rho";
  }
  return "unknown";
}

Param parse_param(std::string_view name) {
  const auto n = lower(name);
  for (Param p : kAllParams)
    if (n == to_string(p)) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + std::string(name) + "'");
}

std::vector<Param> parse_param_list(std::string_view list) {
  std::vector<Param> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    auto item = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) {
      const Param p = parse_param(item);
      if (!contains(out, p)) out.push_back(p);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double get(const ModelParams& p, Param which) noexcept {
  switch (which) {
    case Param::Alpha: return p.alpha;
    case Param::Theta: return p.theta;
    case Param::Lambda: return p.lambda;
    case Param::Nu: return p.nu;
    case Param::Rho: return p.rho;
  }
  return 0.0;
}

void set(ModelParams& p, Param which, double value) noexcept {
  switch (which) {
    case Param::Alpha: p.alpha = value; break;
    case Param::Theta: p.theta = value; break;
    case Param::Lambda: p.lambda = value; break;
    case Param::Nu: p.nu = value; break;
    case Param::Rho: p.rho = value; break;
  }
}

std::array<Bounds, 5> default_bounds() noexcept {
  return {Bounds{0.01, 2.0}, Bounds{0.01, 2.0}, Bounds{0.05, 50.0}, Bounds{0.01, 10.0}, Bounds{-0.999, 0.999}};
}

std::vector<Param> CalibrationSpec::effective_free() const {
  std::vector<Param> out;
  for (Param p : free_params)
    if (!(tie_alpha_theta && p == Param::Theta) && !contains(out, p)) out.push_back(p);
  return out;
}

void CalibrationSpec::validate() const {
  for (Param p : kAllParams) {
    const auto& b = bounds[index(p)];
    if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
      throw Error(ErrorCode::InvalidArgument, "invalid bounds for " + std::string(to_string(p)));
    }
    const bool tied = tie_alpha_theta && p == Param::Theta;
    const bool free = contains(free_params, p) && !tied;
    const bool fixed = fixed_values.count(p) > 0;
    if (free && fixed) {
      throw Error(ErrorCode::InvalidArgument, std::string(to_string(p)) + " is both free and fixed");
    }
    if (!free && !fixed && !tied) {
      throw Error(ErrorCode::InvalidArgument, std::string(to_string(p)) + " is neither free nor fixed");
    }
  }
  if (tie_alpha_theta && fixed_values.count(Param::Theta)) {
    throw Error(ErrorCode::InvalidArgument, "theta cannot be fixed when tied to alpha");
  }
  if (effective_free().empty()) throw Error(ErrorCode::InvalidArgument, "no free parameters");
  if (multistart_count < 1) throw Error(ErrorCode::InvalidArgument, "multistart_count must be >= 1");
  if (max_evals_per_start < 1) throw Error(ErrorCode::InvalidArgument, "max_evals_per_start must be >= 1");
  if (!(simplex_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "simplex_tol must be > 0");
  base_params(*this).validate();
}

FellerDiagnostic feller_check(const ModelParams& p) {
  FellerDiagnostic d;
  d.model = p.model;
  switch (p.model) {
    case Model::HSABR:
      d.condition = "2*lambda*theta^2 > nu^2";
      d.lhs = 2.0 * p.lambda * p.theta * p.theta;
      d.rhs = p.nu * p.nu;
      break;
    case Model::MRSABR:
      d.condition = "lambda > nu^2/2";
      d.lhs = p.lambda;
      d.rhs = 0.5 * p.nu * p.nu;
      break;
    case Model::CIRZABR:
      d.condition = "2*lambda*theta > nu^2";
      d.lhs = 2.0 * p.lambda * p.theta;
      d.rhs = p.nu * p.nu;
      break;
  }
  d.satisfied = d.lhs > d.rhs;
  return d;
}

std::vector<double> model_vols(const ModelParams& p, const VolSurface& surface) {
  return vols_grouped(p, surface, ExpiryGroups(surface));
}

double rmse_objective(const ModelParams& p, const VolSurface& surface) {
  try {
    const auto e = squared_error(p, surface, ExpiryGroups(surface));
    return std::sqrt(e.sse / e.weight);
  } catch (const Error&) {
    return kPenalty;
  }
}

CalibrationResult calibrate(const VolSurface& surface, const CalibrationSpec& spec) {
  spec.validate();
  surface.validate();
  const auto free = spec.effective_free();
  check_fit_size(surface, free.size());

  const ParamMap map(spec, free, base_params(spec));
  const ExpiryGroups groups(surface);
  const auto objective = [&](const std::vector<double>& x) {
    try {
      const auto e = squared_error(map(x.data()), surface, groups);
      return std::sqrt(e.sse / e.weight);
    } catch (const Error&) {
      return kPenalty;
    }
  };
  const auto starts =
      latin_hypercube(static_cast<std::size_t>(spec.multistart_count), map.size(), spec.seed);
  int evals = 0;
  bool converged = false;
  const auto best = best_of_starts(objective, starts, nm_options(spec), evals, converged);
  require_feasible(best.nm.f, converged, "calibration of '" + surface.as_of + "'");
  return finish(surface, map(best.nm.x.data()), best.nm.converged, evals);
}

namespace {

// Profile fit: an outer Nelder-Mead over the shared parameters, and for every
// candidate an independent small fit of each date's own parameters.
std::vector<CalibrationResult> calibrate_global(const std::vector<VolSurface>& surfaces,
                                                const CalibrationSpec& spec) {
  const auto free = spec.effective_free();
  std::vector<Param> per_date, shared;
  for (Param p : free) (contains(spec.per_date_params, p) ? per_date : shared).push_back(p);
  if (per_date.empty()) {
    throw Error(ErrorCode::InvalidArgument, "global mode needs at least one free per-date parameter");
  }
  for (const auto& s : surfaces) check_fit_size(s, per_date.size());

  std::vector<ExpiryGroups> groups;
  for (const auto& s : surfaces) groups.emplace_back(s);
  const ParamMap shared_map(spec, shared, base_params(spec));
  // Starts for multi-parameter dates; used one by one until a feasible fit appears.
  const auto inner_starts =
      latin_hypercube(static_cast<std::size_t>(std::min(spec.multistart_count, 3)), per_date.size(), spec.seed + 1);
  const auto inner_opt = nm_options(spec);

  struct DateFit {
    ModelParams params;
    SquaredError error;
    bool converged = false;
    int evals = 0;
  };
  const auto fit_date = [&](const ModelParams& shared_point, std::size_t d) {
    const ParamMap map(spec, per_date, shared_point);
    const auto objective = [&](const std::vector<double>& x) {
      try {
        const auto e = squared_error(map(x.data()), surfaces[d], groups[d]);
        return std::sqrt(e.sse / e.weight);
      } catch (const Error&) {
        return kPenalty;
      }
    };
    DateFit fit;
    NelderMeadResult best;
    best.f = std::numeric_limits<double>::infinity();
    if (per_date.size() == 1) {
      // Brent to sqrt(epsilon) in the unit coordinate.
      std::uintmax_t iters = 200;
      const auto [x, f] = boost::math::tools::brent_find_minima(
          [&](double u) { return objective({u}); }, 0.0, 1.0, std::numeric_limits<double>::digits / 2, iters);
      best = {{x}, f, static_cast<int>(iters), iters < 200};
      fit.evals = best.evals;
      fit.converged = best.converged;
    }
    for (const auto& x0 : inner_starts) {
      if (best.f < kPenalty) break;
      auto r = nelder_mead_box(objective, x0, inner_opt);
      fit.evals += r.evals;
      fit.converged = fit.converged || r.converged;
      if (r.f < best.f) best = std::move(r);
    }
    fit.params = map(best.x.data());
    if (best.f < kPenalty) {
      fit.error = squared_error(fit.params, surfaces[d], groups[d]);
    } else {
      fit.error = {kPenalty * kPenalty, 1.0};
    }
    return fit;
  };
  const auto fit_all = [&](const ModelParams& shared_point) {
    std::vector<DateFit> fits;
    for (std::size_t d = 0; d < surfaces.size(); ++d) fits.push_back(fit_date(shared_point, d));
    return fits;
  };
  const auto pooled = [](const std::vector<DateFit>& fits) {
    SquaredError total;
    for (const auto& f : fits) {
      if (!(f.error.sse < kPenalty)) return kPenalty;
      total.sse += f.error.sse;
      total.weight += f.error.weight;
    }
    return std::sqrt(total.sse / total.weight);
  };

  std::vector<DateFit> fits;
  int evals = 0;
  bool converged = true;
  if (shared.empty()) {
    fits = fit_all(base_params(spec));
  } else {
    std::atomic<int> inner_evals{0};
    const auto objective = [&](const std::vector<double>& x) {
      const auto f = fit_all(shared_map(x.data()));
      int n = 0;
      for (const auto& df : f) n += df.evals;
      inner_evals += n;
      return pooled(f);
    };
    const auto starts = latin_hypercube(static_cast<std::size_t>(spec.multistart_count), shared.size(), spec.seed);
    bool any = false;
    const auto best = best_of_starts(objective, starts, nm_options(spec), evals, any);
    require_feasible(best.nm.f, any, "global calibration");
    converged = best.nm.converged;
    evals += inner_evals.load();
    fits = fit_all(shared_map(best.nm.x.data()));
  }

  std::vector<CalibrationResult> out;
  for (std::size_t d = 0; d < surfaces.size(); ++d) {
    if (!(fits[d].error.sse < kPenalty)) {
      throw Error(ErrorCode::NonConvergence, "global calibration: no feasible point for '" + surfaces[d].as_of + "'");
    }
    out.push_back(finish(surfaces[d], fits[d].params, converged && fits[d].converged, evals));
  }
  return out;
}

}  // namespace

std::string_view to_string(BatchMode m) noexcept {
  switch (m) {
    case BatchMode::PerDate: return "per-date";
    case BatchMode::GlobalExceptFree: return "global";
    case BatchMode::PreviousPeriod: return "previous";
  }
  return "unknown";
}

BatchMode parse_batch_mode(std::string_view name) {
  const auto n = lower(name);
  if (n == "per-date" || n == "per_date") return BatchMode::PerDate;
  if (n == "global" || n == "global_except_free") return BatchMode::GlobalExceptFree;
  if (n == "previous" || n == "previous_period") return BatchMode::PreviousPeriod;
  throw Error(ErrorCode::InvalidArgument, "unknown batch mode '" + std::string(name) + "'");
}

std::vector<CalibrationResult> batch_calibrate(const std::vector<VolSurface>& surfaces,
                                               const CalibrationSpec& spec, BatchMode mode) {
  spec.validate();
  if (surfaces.empty()) throw Error(ErrorCode::InvalidArgument, "batch_calibrate needs at least one surface");
  for (const auto& s : surfaces) s.validate();
  if (surfaces.size() == 1) return {calibrate(surfaces.front(), spec)};

  switch (mode) {
    case BatchMode::PerDate: {
      std::vector<CalibrationResult> out;
      for (const auto& s : surfaces) out.push_back(calibrate(s, spec));
      return out;
    }
    case BatchMode::GlobalExceptFree:
      return calibrate_global(surfaces, spec);
    case BatchMode::PreviousPeriod: {
      for (std::size_t i = 1; i < surfaces.size(); ++i) {
        if (surfaces[i].as_of < surfaces[i - 1].as_of) {
          throw Error(ErrorCode::InvalidArgument, "previous-period mode needs date-ordered surfaces");
        }
      }
      const auto free = spec.effective_free();
      std::vector<CalibrationResult> out;
      CalibrationResult prev = calibrate(surfaces.front(), spec);
      out.push_back(prev);
      for (std::size_t i = 1; i < surfaces.size(); ++i) {
        CalibrationSpec restricted = spec;
        restricted.free_params.clear();
        for (Param p : free) {
          if (contains(spec.per_date_params, p)) {
            restricted.free_params.push_back(p);
          } else {
            restricted.fixed_values[p] = get(prev.params, p);
          }
        }
        if (restricted.free_params.empty()) {
          throw Error(ErrorCode::InvalidArgument, "previous-period mode needs at least one free per-date parameter");
        }
        out.push_back(calibrate(surfaces[i], restricted));
        // The next date is priced with parameters from an unrestricted fit of this one.
        if (i + 1 < surfaces.size()) prev = calibrate(surfaces[i], spec);
      }
      return out;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown batch mode");
}

VolSurface synthetic_surface(const ModelParams& p, std::string as_of, const std::vector<double>& expiries,
                             const std::vector<double>& strikes, double forward) {
  VolSurface s;
  s.as_of = std::move(as_of);
  for (double t : expiries) {
    const auto sabr = to_std_sabr(effective_coeffs(p, t)).params;
    for (double k : strikes) {
      s.quotes.push_back(VolQuote{t, forward, k, black_vol_lognormal_sabr(sabr, OptionPoint{forward, k}), 1.0});
    }
  }
  return s;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("MRSABR_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace mrsabr
