#pragma once

#include <utility>
#include <vector>

#include "oose/kernel.hpp"
#include "oose/types.hpp"

namespace oose::hyperopt {

// Initialization grid for the multi-start optimizer, expressed relative to
// the data: tau candidates are tau_scales * median pairwise distance, noise
// candidates are noise_fracs * var(y).  Restarts run in row-major order
// (tau_scales outer), which is also the tie-break order.
struct InitGrid {
  std::vector<double> tau_scales = {0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> noise_fracs = {1e-4, 1e-2, 1e-1};

  std::size_t size() const { return tau_scales.size() * noise_fracs.size(); }
};

// A leaner default for repeated benchmark fits.
InitGrid lean_grid();

struct TracePoint {
  int restart = 0;
  int iteration = 0;  // 0 = at the initialization
  double objective = 0.0;
};

struct HyperOptReport {
  KernelParams best_params;
  double best_objective = 0.0;
  int restarts_used = 0;
  // Every restart failed its first line search; best_params is then the best
  // evaluated grid point.
  bool line_search_failed = false;
  std::vector<TracePoint> trace;
};

// Sum over i of the log density of y_i under the model trained without point
// i, evaluated in closed form from one factorization of K + sigma^2 I
// (predictive variance of the held-out target includes the noise term).
// Larger is better.  Throws InputError for m < 2 or bad params,
// NumericalError if the factorization fails or the result is not finite.
double loocv_objective(const Matrix& X, const Vector& y, const KernelParams& p);

// Gradient of the objective with respect to (log tau, log noise_var).
std::pair<double, double> loocv_gradient(const Matrix& X, const Vector& y,
                                         const KernelParams& p);

// Multi-start Polak-Ribiere conjugate-gradient ascent of the objective in
// (log tau, log noise_var): Armijo backtracking, at most 100 iterations per
// restart, stop at gradient norm 1e-6, direction reset to steepest ascent
// whenever the proposed direction is not an ascent direction.  Steps whose
// factorization has reciprocal condition below 1e-12 are rejected by the
// line search.  Restarts are independent (and run in parallel); the winner
// is the highest objective, ties to the lowest grid index.
HyperOptReport optimize(const Matrix& X, const Vector& y, const InitGrid& grid = {});

}  // namespace oose::hyperopt
