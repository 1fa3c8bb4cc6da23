#include "mrsabr/panel_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrsabr/errors.hpp"

namespace mrsabr {

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

ParamPanelStats panel_stats(const std::vector<CalibrationResult>& results) {
  if (results.size() < 3) {
    throw Error(ErrorCode::InsufficientPanel,
                "panel statistics need at least 3 results, got " + std::to_string(results.size()));
  }
  std::array<std::vector<double>, 5> cols;
  for (const auto& r : results)
    for (Param p : kAllParams) cols[static_cast<std::size_t>(p)].push_back(get(r.params, p));

  ParamPanelStats st;
  st.count = results.size();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto& c = cols[k];
    auto& s = st.params[k];
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    s.min = *lo;
    s.max = *hi;
    s.median = median(c);
    const double n = static_cast<double>(c.size());
    s.mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : c) ss += (v - s.mean) * (v - s.mean);
    // Identical values can leave a rounding-level spread; report those as exactly zero.
    const double sd = *lo == *hi ? 0.0 : std::sqrt(ss / (n - 1.0));
    if (s.mean != 0.0) s.stddev_over_avg = 100.0 * sd / std::abs(s.mean);
  }
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b) {
      const bool flat_a = st.params[a].min == st.params[a].max;
      const bool flat_b = st.params[b].min == st.params[b].max;
      if (flat_a || flat_b) continue;
      st.correlation[a][b] = a == b ? std::optional<double>(1.0) : pearson(cols[a], cols[b]);
    }
  return st;
}

ExplainedVariance explained_variance(const std::vector<VolSurface>& surfaces,
                                     const std::vector<CalibrationResult>& results) {
  if (surfaces.size() != results.size()) {
    throw Error(ErrorCode::InvalidArgument, "explained_variance needs one result per surface");
  }
  ExplainedVariance ev;
  double pooled_w = 0.0, pooled_wv = 0.0, pooled_sse = 0.0;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const auto& q = surfaces[i].quotes;
    const auto& r = results[i].residuals;
    if (q.size() != r.size()) throw Error(ErrorCode::InvalidArgument, "residual count does not match quotes");
    double w = 0.0, wv = 0.0, sse = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      w += q[k].weight;
      wv += q[k].weight * q[k].market_vol;
      sse += q[k].weight * r[k] * r[k];
    }
    const double mean = wv / w;
    double sst = 0.0;
    for (const auto& quote : q) sst += quote.weight * (quote.market_vol - mean) * (quote.market_vol - mean);
    ev.per_surface.push_back(sst > 0.0 ? 1.0 - sse / sst : std::nan(""));
    pooled_w += w;
    pooled_wv += wv;
    pooled_sse += sse;
  }
  const double mean = pooled_wv / pooled_w;
  double sst = 0.0;
  for (const auto& s : surfaces)
    for (const auto& q : s.quotes) sst += q.weight * (q.market_vol - mean) * (q.market_vol - mean);
  ev.pooled = sst > 0.0 ? 1.0 - pooled_sse / sst : std::nan("");
  return ev;
}

}  // namespace mrsabr
