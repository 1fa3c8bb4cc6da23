#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "mrsabr/calibration.hpp"
#include "mrsabr/closed_forms.hpp"
#include "mrsabr/errors.hpp"
#include "mrsabr/panel_stats.hpp"
#include "mrsabr/sabr_kernel.hpp"
#include "mrsabr/surface_io.hpp"
#include "mrsabr/verification.hpp"

namespace mrsabr::cli {

namespace {

using mrsabr::format_double;

std::vector<double> parse_doubles(const std::string& list, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorCode::InvalidArgument, std::string(flag) + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, std::string(flag) + " is empty");
  return out;
}

std::vector<std::string> parse_strings(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct ModelOptions {
  std::string model = "mrsabr";
  double alpha = 0.2, theta = 0.2, lambda = 5.0, nu = 1.0, rho = -0.5;

  void add(CLI::App& app) {
    app.add_option("--model", model, "hsabr, mrsabr or cirzabr")->capture_default_str();
    app.add_option("--alpha", alpha, "initial volatility")->capture_default_str();
    app.add_option("--theta", theta, "long-run volatility")->capture_default_str();
    app.add_option("--lambda", lambda, "mean-reversion speed (1/years)")->capture_default_str();
    app.add_option("--nu", nu, "vol-of-vol")->capture_default_str();
    app.add_option("--rho", rho, "spot/vol correlation")->capture_default_str();
  }

  ModelParams params() const {
    ModelParams p{parse_model(model), alpha, theta, lambda, nu, rho};
    p.validate();
    return p;
  }
};

// ---------------------------------------------------------------- vol / coeffs

struct VolOptions {
  ModelOptions m;
  double t_ex = 1.0;
  double forward = 100.0;
  std::string strikes;
  double k_min = 80.0, k_max = 120.0;
  int k_count = 9;
  bool show_coeffs = false;
};

void add_vol_options(CLI::App& app, VolOptions& o, bool coeffs_alias) {
  o.m.add(app);
  app.add_option("--t-ex", o.t_ex, "expiry in years")->capture_default_str();
  app.add_option("--forward", o.forward, "forward price")->capture_default_str();
  app.add_option("--strikes", o.strikes, "comma-separated strikes (overrides the range)");
  app.add_option("--k-min", o.k_min, "lowest strike of the range")->capture_default_str();
  app.add_option("--k-max", o.k_max, "highest strike of the range")->capture_default_str();
  app.add_option("--k-count", o.k_count, "number of strikes in the range")->capture_default_str();
  if (!coeffs_alias) app.add_flag("--show-coeffs", o.show_coeffs, "print effective and standard SABR coefficients");
}

int cmd_vol(const VolOptions& o, std::ostream& out) {
  const auto p = o.m.params();
  std::vector<double> strikes;
  if (!o.strikes.empty()) {
    strikes = parse_doubles(o.strikes, "--strikes");
  } else {
    if (o.k_count < 1 || !(o.k_min > 0.0) || !(o.k_max >= o.k_min)) {
      throw Error(ErrorCode::InvalidArgument, "strike range needs 0 < k-min <= k-max and k-count >= 1");
    }
    for (int i = 0; i < o.k_count; ++i) {
      strikes.push_back(o.k_count == 1 ? o.k_min : o.k_min + (o.k_max - o.k_min) * i / (o.k_count - 1));
    }
  }
  const auto coeffs = effective_coeffs(p, o.t_ex);
  const auto mapping = to_std_sabr(coeffs);
  if (o.show_coeffs) {
    out << "# model=" << to_string(p.model) << " t_ex=" << format_double(o.t_ex) << '\n';
    out << "# tau_ex=" << format_double(coeffs.tau_ex) << '\n';
    out << "# b_bar=" << format_double(coeffs.b_bar) << '\n';
    out << "# c_bar=" << format_double(coeffs.c_bar) << '\n';
    out << "# g_int=" << (coeffs.g_int ? format_double(*coeffs.g_int) : std::string("none")) << '\n';
    out << "# alpha_std=" << format_double(mapping.params.alpha) << '\n';
    out << "# rho_std=" << format_double(mapping.params.rho) << (mapping.rho_clamped ? " (clamped)" : "") << '\n';
    out << "# nu_std=" << format_double(mapping.params.nu) << '\n';
  }
  out << "strike,implied_vol\n";
  for (double k : strikes) {
    out << format_double(k) << ',' << format_double(black_vol_lognormal_sabr(mapping.params, {o.forward, k}))
        << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  std::string model = "mrsabr";
  int points = 0;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  bool alpha_eq_theta = false;
  std::string displacements = "0.01,0.02,0.04";
  double slope_target = 6.0;
  double slope_tol = 0.5;
  int worst_rows = 5;
};

void print_point(std::ostream& out, const GridPoint& g) {
  const auto& p = g.params;
  out << format_double(p.alpha) << ',' << format_double(p.theta) << ',' << format_double(p.lambda) << ','
      << format_double(p.nu) << ',' << format_double(p.rho) << ',' << format_double(g.t_ex);
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  const Model model = parse_model(o.model);
  const bool sweep = model == Model::CIRZABR && !o.alpha_eq_theta;
  if (sweep) {
    const auto d = parse_doubles(o.displacements, "--displacements");
    const auto grid = random_grid(model, static_cast<std::size_t>(o.points > 0 ? o.points : 3), o.seed, true);
    out << "# cirzabr expansion-order sweep, target slope " << format_double(o.slope_target) << " +- "
        << format_double(o.slope_tol) << '\n';
    out << "theta,lambda,nu,rho,t_ex";
    for (double x : d) out << ",err@" << format_double(x);
    out << ",slope\n";
    bool ok = true;
    for (const auto& g : grid) {
      const auto ep = cirzabr_expansion_slope(g, d);
      const auto& p = ep.base.params;
      out << format_double(p.theta) << ',' << format_double(p.lambda) << ',' << format_double(p.nu) << ','
          << format_double(p.rho) << ',' << format_double(g.t_ex);
      for (double e : ep.errors) out << ',' << format_double(e);
      out << ',' << format_double(ep.slope) << '\n';
      ok = ok && std::abs(ep.slope - o.slope_target) <= o.slope_tol;
    }
    out << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kOk : kValidationFailed;
  }

  const double tol = o.tol.value_or(model == Model::CIRZABR ? 1e-10 : 1e-7);
  const auto n = static_cast<std::size_t>(o.points > 0 ? o.points : (model == Model::CIRZABR ? 20 : 200));
  const auto grid = random_grid(model, n, o.seed, o.alpha_eq_theta || model == Model::CIRZABR);
  const auto rep = verify_closed_forms(model, grid);

  std::vector<std::size_t> order(rep.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rep.rows[a].error > rep.rows[b].error; });
  out << "# " << to_string(model) << " closed forms vs oracle, " << n << " points, tolerance " << format_double(tol)
      << '\n';
  out << "alpha,theta,lambda,nu,rho,t_ex,max_rel_error\n";
  for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < o.worst_rows; ++i) {
    print_point(out, rep.rows[order[i]].point);
    out << ',' << format_double(rep.rows[order[i]].error) << '\n';
  }
  const bool ok = rep.max_error <= tol;
  out << "max_rel_error=" << format_double(rep.max_error) << ' ' << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kOk : kValidationFailed;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOptions {
  std::string input;
  std::string output = "results.json";
  std::string format;
  std::string model = "mrsabr";
  std::string mode = "per-date";
  std::string free = "alpha,theta,lambda,nu,rho";
  std::string fix;
  std::string per_date = "alpha";
  bool tie = false;
  std::uint64_t seed = 42;
  int starts = 8;
  int max_evals = 2000;
};

CalibrationSpec make_spec(const CalibrateOptions& o) {
  CalibrationSpec spec;
  spec.model = parse_model(o.model);
  spec.free_params = parse_param_list(o.free);
  spec.tie_alpha_theta = o.tie;
  spec.seed = o.seed;
  spec.multistart_count = o.starts;
  spec.max_evals_per_start = o.max_evals;
  spec.per_date_params = parse_param_list(o.per_date);
  for (const auto& item : parse_strings(o.fix)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--fix expects name=value, got '" + item + "'");
    const Param p = parse_param(item.substr(0, eq));
    spec.fixed_values[p] = parse_doubles(item.substr(eq + 1), "--fix").front();
    spec.free_params.erase(std::remove(spec.free_params.begin(), spec.free_params.end(), p), spec.free_params.end());
  }
  return spec;
}

std::string feller_text(const FellerDiagnostic& f) {
  std::ostringstream os;
  os << (f.satisfied ? "satisfied" : "violated") << " (" << f.condition << ": " << std::setprecision(6) << f.lhs
     << (f.satisfied ? " > " : " <= ") << f.rhs << ")";
  return os.str();
}

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out) {
  const auto surfaces = load_surfaces(o.input);
  const auto spec = make_spec(o);
  const auto mode = parse_batch_mode(o.mode);
  const auto results = batch_calibrate(surfaces, spec, mode);
  ResultFormat fmt = format_for(o.output);
  if (!o.format.empty()) {
    if (o.format == "json") fmt = ResultFormat::JSON;
    else if (o.format == "csv") fmt = ResultFormat::CSV;
    else throw Error(ErrorCode::InvalidArgument, "--format must be json or csv");
  }
  write_results(results, o.output, fmt);

  const auto ev = explained_variance(surfaces, results);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << r.as_of << " model=" << to_string(r.params.model) << " rmse=" << format_double(r.rmse)
        << " r2=" << format_double(ev.per_surface[i]) << " feller=" << feller_text(r.feller) << '\n';
  }
  out << "pooled_r2=" << format_double(ev.pooled) << " results=" << o.output << '\n';
  return kOk;
}

// ---------------------------------------------------------------- stats

std::string cell(double v, int width = 12) {
  std::ostringstream os;
  os << std::setw(width) << std::setprecision(4) << v;
  return os.str();
}

int cmd_stats(const std::string& input, std::ostream& out) {
  const auto results = read_results(input);
  const auto st = panel_stats(results);
  out << "observations: " << st.count << '\n';
  out << std::left << std::setw(8) << "" << std::right << std::setw(12) << "Min" << std::setw(12) << "Median"
      << std::setw(12) << "Max" << std::setw(16) << "StdDev/Avg %" << '\n';
  for (Param p : kAllParams) {
    const auto& s = st[p];
    out << std::left << std::setw(8) << to_string(p) << std::right << cell(s.min) << cell(s.median) << cell(s.max)
        << (s.stddev_over_avg ? cell(*s.stddev_over_avg, 16) : std::string(12, ' ') + "null") << '\n';
  }
  out << "Correlations:\n" << std::left << std::setw(8) << "";
  for (std::size_t j = 0; j + 1 < kAllParams.size(); ++j) out << std::right << std::setw(10) << to_string(kAllParams[j]);
  out << '\n';
  for (std::size_t i = 1; i < kAllParams.size(); ++i) {
    out << std::left << std::setw(8) << to_string(kAllParams[i]) << std::right;
    for (std::size_t j = 0; j < i; ++j) {
      const auto c = st.corr(kAllParams[i], kAllParams[j]);
      if (c) {
        out << std::setw(10) << std::fixed << std::setprecision(3) << *c << std::defaultfloat;
      } else {
        out << std::setw(10) << "null";
      }
    }
    out << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  ModelOptions m;
  std::string as_of = "2024-01-02";
  std::string expiries = "0.25,0.5,1";
  std::string strikes = "80,90,100,110,120";
  double forward = 100.0;
  double alpha_step = 0.0;
  double theta_step = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 7;
  std::string output;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  const auto base = o.m.params();
  const auto dates = parse_strings(o.as_of);
  if (dates.empty()) throw Error(ErrorCode::InvalidArgument, "--as-of is empty");
  const auto expiries = parse_doubles(o.expiries, "--expiries");
  const auto strikes = parse_doubles(o.strikes, "--strikes");
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<VolSurface> surfaces;
  for (std::size_t d = 0; d < dates.size(); ++d) {
    ModelParams p = base;
    p.alpha += o.alpha_step * static_cast<double>(d);
    p.theta += o.theta_step * static_cast<double>(d);
    auto s = synthetic_surface(p, dates[d], expiries, strikes, o.forward);
    if (o.noise > 0.0)
      for (auto& q : s.quotes) q.market_vol += o.noise * normal(rng);
    surfaces.push_back(std::move(s));
  }
  std::sort(surfaces.begin(), surfaces.end(), [](const auto& a, const auto& b) { return a.as_of < b.as_of; });
  if (o.output.empty()) {
    out << format_surfaces(surfaces);
  } else {
    write_surfaces(surfaces, o.output);
  }
  return kOk;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::EmptyFile: return kParseError;
    case ErrorCode::NonConvergence: return kNonConvergence;
    default: return kFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-reverting SABR family: implied vols, closed-form verification, calibration"};
  app.name("mrsabr");
  app.require_subcommand(1);

  VolOptions vol, coeffs;
  auto* vol_cmd = app.add_subcommand("vol", "implied-vol smile for one expiry");
  add_vol_options(*vol_cmd, vol, false);
  auto* coeffs_cmd = app.add_subcommand("coeffs", "same as vol --show-coeffs");
  add_vol_options(*coeffs_cmd, coeffs, true);

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "compare closed forms with the quadrature oracle");
  verify_cmd->add_option("--model", verify.model, "hsabr, mrsabr or cirzabr")->capture_default_str();
  verify_cmd->add_option("--points", verify.points, "grid size (default 200; cirzabr 20, sweep 3)");
  verify_cmd->add_option("--seed", verify.seed, "grid seed")->capture_default_str();
  verify_cmd->add_option("--tol", verify.tol, "relative tolerance (default 1e-7; cirzabr alpha=theta 1e-10)");
  verify_cmd->add_flag("--alpha-eq-theta", verify.alpha_eq_theta, "restrict the grid to alpha = theta");
  verify_cmd->add_option("--displacements", verify.displacements, "cirzabr sweep |alpha-theta|/theta values")
      ->capture_default_str();
  verify_cmd->add_option("--slope-target", verify.slope_target, "expected log-log error slope")->capture_default_str();
  verify_cmd->add_option("--slope-tol", verify.slope_tol, "allowed slope deviation")->capture_default_str();
  verify_cmd->add_option("--worst", verify.worst_rows, "rows in the worst-case table")->capture_default_str();

  CalibrateOptions cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit model parameters to a quote file");
  cal_cmd->add_option("--input", cal.input, "quote CSV")->required();
  cal_cmd->add_option("--out", cal.output, "result file (.json or .csv)")->capture_default_str();
  cal_cmd->add_option("--format", cal.format, "json or csv (default from --out extension)");
  cal_cmd->add_option("--model", cal.model, "hsabr, mrsabr or cirzabr")->capture_default_str();
  cal_cmd->add_option("--mode", cal.mode, "per-date, global or previous")->capture_default_str();
  cal_cmd->add_option("--free", cal.free, "free parameters")->capture_default_str();
  cal_cmd->add_option("--fix", cal.fix, "fixed parameters, e.g. lambda=5,rho=-0.5");
  cal_cmd->add_option("--per-date", cal.per_date, "parameters refit per date in global/previous modes")
      ->capture_default_str();
  cal_cmd->add_flag("--tie-alpha-theta", cal.tie, "impose alpha = theta");
  cal_cmd->add_option("--seed", cal.seed, "multistart seed")->capture_default_str();
  cal_cmd->add_option("--starts", cal.starts, "multistart count")->capture_default_str();
  cal_cmd->add_option("--max-evals", cal.max_evals, "objective evaluations per start")->capture_default_str();

  std::string stats_input;
  auto* stats_cmd = app.add_subcommand("stats", "parameter statistics of a result file");
  stats_cmd->add_option("--input", stats_input, "result JSON or CSV")->required();

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic quote file");
  gen.m.add(*gen_cmd);
  gen_cmd->add_option("--as-of", gen.as_of, "comma-separated dates")->capture_default_str();
  gen_cmd->add_option("--expiries", gen.expiries, "expiries in years")->capture_default_str();
  gen_cmd->add_option("--strikes", gen.strikes, "strikes")->capture_default_str();
  gen_cmd->add_option("--forward", gen.forward, "forward price")->capture_default_str();
  gen_cmd->add_option("--alpha-step", gen.alpha_step, "alpha increment per date")->capture_default_str();
  gen_cmd->add_option("--theta-step", gen.theta_step, "theta increment per date")->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "Gaussian vol noise (standard deviation)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "noise seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.output, "output CSV (stdout when omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kFailure;
  }

  try {
    if (*vol_cmd) return cmd_vol(vol, out);
    if (*coeffs_cmd) {
      coeffs.show_coeffs = true;
      return cmd_vol(coeffs, out);
    }
    if (*verify_cmd) return cmd_verify(verify, out);
    if (*cal_cmd) return cmd_calibrate(cal, out);
    if (*stats_cmd) return cmd_stats(stats_input, out);
    if (*gen_cmd) return cmd_gen(gen, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return kFailure;
}

}  // namespace mrsabr::cli
