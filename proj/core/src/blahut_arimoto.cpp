#include "coinfer/blahut_arimoto.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coinfer {

namespace {

constexpr double kTinyMass = 1e-300;

void validate(const BaConfig& config) {
  if (config.grid_points < 64) throw std::invalid_argument("grid_points must be >= 64");
  if (!(config.theta_max_multiplier > 0.0)) {
    throw std::invalid_argument("theta_max_multiplier must be positive");
  }
  if (!(config.convergence_tol > 0.0)) {
    throw std::invalid_argument("convergence_tol must be positive");
  }
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  for (double s : config.slope_sweep) {
    if (!(s < 0.0)) throw std::invalid_argument("slope_sweep entries must be negative");
  }
}

// y_i = sum_j x_j * r^|i-j| in O(n) via forward/backward geometric recursions.
void geometric_convolve(const std::vector<double>& x, double r, std::vector<double>& fwd,
                        std::vector<double>& bwd, std::vector<double>& out) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc = acc * r + x[i];
    fwd[i] = acc;
  }
  acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    acc = acc * r + x[i];
    bwd[i] = acc;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd[i] + bwd[i] - x[i];
}

// t_i = sum_j x_j * |i-j| * r^|i-j| (in index units).
void geometric_distance_convolve(const std::vector<double>& x, double r,
                                 std::vector<double>& s_fwd, std::vector<double>& s_bwd,
                                 std::vector<double>& out) {
  const std::size_t n = x.size();
  double s = 0.0, u = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    u = r * (u + s);
    s = s * r + x[i];
    s_fwd[i] = u;
  }
  s = 0.0;
  u = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    u = r * (u + s);
    s = s * r + x[i];
    s_bwd[i] = u;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = s_fwd[i] + s_bwd[i];
}

}  // namespace

std::vector<double> default_slope_sweep() {
  // 40 log-spaced magnitudes, realized rates ~0.12..4.3 bits. The steep end
  // is capped where the 1024-point default grid still tracks the continuous
  // source to within ~1%; beyond that the discrete alphabet saturates and BA
  // points stop being meaningful estimates of D(R).
  constexpr int kCount = 40;
  constexpr double kShallowest = 1.7;
  constexpr double kSteepest = 55.0;
  std::vector<double> sweep(kCount);
  const double ratio = std::log(kSteepest / kShallowest) / (kCount - 1);
  for (int i = 0; i < kCount; ++i) {
    sweep[i] = -kShallowest * std::exp(ratio * i);
  }
  return sweep;
}

BaSourceGrid ba_source_grid(double lambda, const BaConfig& config) {
  validate(config);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const int n = config.grid_points;
  const double range = config.theta_max_multiplier / lambda;
  const double width = range / n;

  BaSourceGrid grid;
  grid.cell_width = width;
  grid.centers.resize(n);
  grid.masses.resize(n);
  const double total_mass = -std::expm1(-lambda * range);
  for (int i = 0; i < n; ++i) {
    grid.centers[i] = (i + 0.5) * width;
    const double lo = std::exp(-lambda * i * width);
    const double hi = std::exp(-lambda * (i + 1) * width);
    grid.masses[i] = (lo - hi) / total_mass;
  }
  return grid;
}

BaPointResult ba_solve_slope(const BaSourceGrid& grid, double slope_bits_per_distortion,
                             double convergence_tol, int max_iters) {
  const std::size_t n = grid.centers.size();
  const double width = grid.cell_width;
  // Kernel 2^(s*d(i,j)) with d(i,j) = width*|i-j| is geometric in |i-j|.
  const double r = std::exp2(slope_bits_per_distortion * width);

  const std::vector<double>& p = grid.masses;
  std::vector<double> q = p;  // output marginal, initialized at the source
  std::vector<double> a(n), c(n), m(n), buf1(n), buf2(n);

  BaPointResult result;
  double lagrangian_prev = 0.0;
  bool have_prev = false;

  for (int iter = 1; iter <= max_iters; ++iter) {
    geometric_convolve(q, r, buf1, buf2, a);
    double lagrangian = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::max(a[i], kTinyMass);
      c[i] = p[i] / a[i];
      lagrangian -= p[i] * std::log2(a[i]);
    }
    geometric_convolve(c, r, buf1, buf2, m);
    double q_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      q[i] *= m[i];
      q_sum += q[i];
    }
    for (std::size_t i = 0; i < n; ++i) q[i] /= q_sum;

    result.iterations = iter;
    if (have_prev && std::abs(lagrangian_prev - lagrangian) < convergence_tol) {
      result.converged = true;
      break;
    }
    lagrangian_prev = lagrangian;
    have_prev = true;
  }

  // Evaluate (R, D) of the converged test channel.
  geometric_convolve(q, r, buf1, buf2, a);
  geometric_distance_convolve(q, r, buf1, buf2, m);
  double distortion = 0.0;
  double log_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::max(a[i], kTinyMass);
    distortion += p[i] * (m[i] * width) / a[i];
    log_term += p[i] * std::log2(a[i]);
  }
  const double rate = std::max(0.0, slope_bits_per_distortion * distortion - log_term);
  result.point = RdPoint{rate, distortion};
  return result;
}

RdCurve ba_distortion_rate(double lambda, const BaConfig& config) {
  validate(config);
  const BaSourceGrid grid = ba_source_grid(lambda, config);
  const std::vector<double> sweep =
      config.slope_sweep.empty() ? default_slope_sweep() : config.slope_sweep;

  RdCurve curve;
  curve.source_lambda = lambda;
  curve.provenance = RdProvenance::BlahutArimoto;
  curve.points.reserve(sweep.size());

  for (double s : sweep) {
    // Slopes are specified for the unit-rate source; dR/dD scales with lambda.
    const BaPointResult res =
        ba_solve_slope(grid, s * lambda, config.convergence_tol, config.max_iters);
    if (!res.converged) {
      ++curve.dropped_slopes;
      continue;
    }
    curve.points.push_back(res.point);
  }

  std::sort(curve.points.begin(), curve.points.end(),
            [](const RdPoint& lhs, const RdPoint& rhs) { return lhs.rate < rhs.rate; });
  // Deduplicate: keep strict monotonicity in both coordinates.
  std::vector<RdPoint> kept;
  kept.reserve(curve.points.size());
  for (const RdPoint& pt : curve.points) {
    if (!kept.empty() &&
        (pt.rate - kept.back().rate < 1e-9 || pt.distortion >= kept.back().distortion)) {
      continue;
    }
    kept.push_back(pt);
  }
  curve.points = std::move(kept);
  return curve;
}

}  // namespace coinfer
