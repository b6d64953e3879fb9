#pragma once

#include <cstdint>
#include <vector>

#include "coinfer/rate_distortion.hpp"

namespace coinfer {

// Numerical oracle for the distortion-rate function of the exponential source
// under absolute-error distortion: the source is discretized on a uniform
// grid and the standard alternating-minimization update is run on the test
// channel for each slope of the sweep.

struct BaConfig {
  int grid_points = 1024;              // >= 64
  double theta_max_multiplier = 12.0;  // grid spans [0, multiplier/lambda]
  // Curve slopes dR/dD (bits per unit distortion) for a unit-rate source
  // (lambda = 1); scaled by lambda internally so that sweeps are
  // scale-invariant. All entries must be negative. Empty = default sweep.
  std::vector<double> slope_sweep;
  double convergence_tol = 1e-9;  // on the per-slope Lagrangian, bits
  int max_iters = 50000;
};

/// The sweep used when BaConfig::slope_sweep is empty: 40 log-spaced slopes
/// whose realized rates stay within the grid resolution of the default
/// 1024-point discretization.
std::vector<double> default_slope_sweep();

/// Discretized source: cell centers and renormalized cell masses.
struct BaSourceGrid {
  std::vector<double> centers;
  std::vector<double> masses;
  double cell_width = 0.0;
};

BaSourceGrid ba_source_grid(double lambda, const BaConfig& config);

/// Runs the sweep and returns the curve sorted by rate, deduplicated, with
/// non-converged slopes dropped (counted in RdCurve::dropped_slopes).
RdCurve ba_distortion_rate(double lambda, const BaConfig& config);

/// Single-slope solve, exposed for calibration and tests. Returns false if
/// the Lagrangian did not settle within max_iters.
struct BaPointResult {
  RdPoint point;
  int iterations = 0;
  bool converged = false;
};

BaPointResult ba_solve_slope(const BaSourceGrid& grid, double slope_bits_per_distortion,
                             double convergence_tol, int max_iters);

}  // namespace coinfer
