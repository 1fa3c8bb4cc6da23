#pragma once

// Quote CSV ingestion and calibration-result persistence.
//
// Quote files: header `as_of,expiry_years,forward,strike,implied_vol[,weight]`,
// comma-delimited, '.' decimals, as_of an ISO-8601 date (YYYY-MM-DD).
//
// Result JSON: an array of objects
//   {"as_of", "model", "params": {alpha, theta, lambda, nu, rho}, "rmse",
//    "converged", "objective_evals", "feller": {condition, lhs, rhs, margin,
//    satisfied}, "residuals": [...]}
// Result CSV columns, in order:
//   as_of,model,alpha,theta,lambda,nu,rho,rmse,converged,objective_evals,
//   feller_lhs,feller_rhs,feller_satisfied,residuals
// with residuals joined by ';'.  Every number is written with 17 significant digits.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mrsabr/calibration.hpp"

namespace mrsabr {

/// Rows grouped by as_of into date-ordered surfaces; quote order within a date is file order.
/// Throws ParseError (with row and column), EmptyFile, IoError.
std::vector<VolSurface> load_surfaces(const std::filesystem::path& path);
std::vector<VolSurface> parse_surfaces(std::string_view text);

/// Writes the quote CSV (weight column always present).
void write_surfaces(const std::vector<VolSurface>& surfaces, const std::filesystem::path& path);
std::string format_surfaces(const std::vector<VolSurface>& surfaces);

enum class ResultFormat { JSON, CSV };

/// From the file extension: ".csv" is CSV, anything else JSON.
ResultFormat format_for(const std::filesystem::path& path) noexcept;

void write_results(const std::vector<CalibrationResult>& results, const std::filesystem::path& path,
                   ResultFormat format);
std::string format_results(const std::vector<CalibrationResult>& results, ResultFormat format);

/// Reads either format (detected from content).  Throws ParseError, EmptyFile, IoError.
std::vector<CalibrationResult> read_results(const std::filesystem::path& path);
std::vector<CalibrationResult> parse_results(std::string_view text);

/// "%.17g" formatting used by every writer.
std::string format_double(double v);

}  // namespace mrsabr
