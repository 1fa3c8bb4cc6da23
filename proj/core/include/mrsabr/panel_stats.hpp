#pragma once

// Descriptive statistics of parameter estimates across a panel of dates.

#include <array>
#include <optional>
#include <vector>

#include "mrsabr/calibration.hpp"

namespace mrsabr {

struct ParamSummary {
  double min = 0.0;
  double median = 0.0;  ///< mean of the two central order statistics for even counts
  double max = 0.0;
  double mean = 0.0;
  /// Sample standard deviation over |mean|, in percent; empty when the mean is zero.
  std::optional<double> stddev_over_avg;
};

struct ParamPanelStats {
  std::size_t count = 0;
  std::array<ParamSummary, 5> params;  ///< indexed like kAllParams
  /// Pearson correlations across dates; empty where a column has zero variance.
  std::array<std::array<std::optional<double>, 5>, 5> correlation;

  const ParamSummary& operator[](Param p) const { return params[static_cast<std::size_t>(p)]; }
  std::optional<double> corr(Param a, Param b) const {
    return correlation[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
};

/// Throws InsufficientPanel for fewer than three results.
ParamPanelStats panel_stats(const std::vector<CalibrationResult>& results);

double median(std::vector<double> values);
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Share of implied-vol variance explained by the fits, 1 - SSE / SST (weighted).
struct ExplainedVariance {
  std::vector<double> per_surface;  ///< one entry per surface, SST taken about that surface's mean
  double pooled = 0.0;              ///< SSE and SST summed over all quotes, SST about the pooled mean
};

/// results[i] must be the fit of surfaces[i].
ExplainedVariance explained_variance(const std::vector<VolSurface>& surfaces,
                                     const std::vector<CalibrationResult>& results);

}  // namespace mrsabr
