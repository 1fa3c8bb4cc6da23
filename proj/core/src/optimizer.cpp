#include "mrsabr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrsabr/errors.hpp"

namespace mrsabr {

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<std::vector<double>> x2;
    std::vector<double> f2;
    for (auto i : idx) {
      x2.push_back(std::move(x[i]));
      f2.push_back(f[i]);
    }
    x = std::move(x2);
    f = std::move(f2);
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t j = 1; j < x.size(); ++j)
      for (std::size_t i = 0; i < x[0].size(); ++i) d = std::max(d, std::abs(x[j][i] - x[0][i]));
    return d;
  }
};

void project(std::vector<double>& x) {
  for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
}

class Run {
 public:
  Run(const std::function<double(const std::vector<double>&)>& f, const NelderMeadOptions& opt, int& evals)
      : f_(f), opt_(opt), evals_(evals) {}

  double eval(std::vector<double>& x) {
    project(x);
    ++evals_;
    const double v = f_(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  }

  bool done(const Simplex& s) const {
    return s.diameter() < opt_.x_tol &&
           s.f.back() - s.f.front() <= opt_.f_tol_abs + opt_.f_tol_rel * std::abs(s.f.front());
  }

  // One Nelder-Mead descent from x0.  Returns true on convergence before the budget ran out.
  bool descend(std::vector<double> x0, Simplex& s) {
    const std::size_t n = x0.size();
    s.x.assign(1, x0);
    s.f.assign(1, eval(s.x[0]));
    for (std::size_t i = 0; i < n; ++i) {
      auto v = s.x[0];
      v[i] += v[i] + opt_.initial_step <= 1.0 ? opt_.initial_step : -opt_.initial_step;
      const double fv = eval(v);
      s.x.push_back(std::move(v));
      s.f.push_back(fv);
    }
    while (true) {
      s.sort();
      if (done(s)) return true;
      if (evals_ >= opt_.max_evals) return false;

      std::vector<double> c(n, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) c[i] += s.x[j][i] / static_cast<double>(n);
      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = c[i] + t * (s.x[n][i] - c[i]);
        return p;
      };

      auto xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < s.f[0]) {
        auto xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          s.x[n] = std::move(xe);
          s.f[n] = fe;
        } else {
          s.x[n] = std::move(xr);
          s.f[n] = fr;
        }
        continue;
      }
      if (fr < s.f[n - 1]) {
        s.x[n] = std::move(xr);
        s.f[n] = fr;
        continue;
      }
      const bool outside = fr < s.f[n];
      auto xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : s.f[n])) {
        s.x[n] = std::move(xc);
        s.f[n] = fc;
        continue;
      }
      for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t i = 0; i < n; ++i) s.x[j][i] = s.x[0][i] + 0.5 * (s.x[j][i] - s.x[0][i]);
        s.f[j] = eval(s.x[j]);
      }
    }
  }

 private:
  const std::function<double(const std::vector<double>&)>& f_;
  const NelderMeadOptions& opt_;
  int& evals_;
};

}  // namespace

NelderMeadResult nelder_mead_box(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, const NelderMeadOptions& opt) {
  if (x0.empty()) throw Error(ErrorCode::InvalidArgument, "nelder_mead_box needs at least one dimension");
  if (!(opt.initial_step > 0.0 && opt.initial_step <= 0.5) || opt.max_evals <= 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid Nelder-Mead options");
  }
  NelderMeadResult res;
  Run run(f, opt, res.evals);
  Simplex s;
  project(x0);
  res.converged = run.descend(x0, s);
  res.x = s.x[0];
  res.f = s.f[0];
  // A converged simplex can be stuck on a face of the box or collapsed in a
  // flat valley; restarting from the best vertex costs n + 1 evaluations and
  // stops as soon as it no longer improves.
  for (int r = 0; r < opt.max_restarts && res.converged && res.evals < opt.max_evals; ++r) {
    const bool ok = run.descend(res.x, s);
    const bool improved = s.f[0] < res.f - (opt.f_tol_abs + opt.f_tol_rel * std::abs(res.f));
    if (s.f[0] < res.f) {
      res.x = s.x[0];
      res.f = s.f[0];
    }
    res.converged = ok;
    if (!improved) break;
  }
  return res;
}

}  // namespace mrsabr
