#pragma once

// Box-constrained Nelder-Mead on the unit cube with restarts from the best vertex.

#include <functional>
#include <vector>

namespace mrsabr {

struct NelderMeadOptions {
  double initial_step = 0.1;    ///< simplex edge in unit-cube coordinates
  double x_tol = 1e-8;          ///< converged once every vertex lies within x_tol of the best (inf-norm)
  double f_tol_abs = 1e-14;     ///< and f_worst - f_best <= f_tol_abs + f_tol_rel * |f_best|
  double f_tol_rel = 1e-10;
  int max_evals = 2000;
  int max_restarts = 4;         ///< restarts after convergence while they keep improving
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Minimizes f over [0, 1]^n; trial points are projected onto the cube.
NelderMeadResult nelder_mead_box(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, const NelderMeadOptions& opt = {});

}  // namespace mrsabr
