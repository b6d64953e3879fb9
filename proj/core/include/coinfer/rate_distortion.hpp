#pragma once

#include <string>
#include <vector>

namespace coinfer {

// Closed-form bounds on the rate-distortion function of an exponential
// magnitude source under absolute-error distortion, plus the quantities used
// to derive them. Rates are in bits per parameter, distortions in magnitude
// units.

/// Lower bound on the distortion-rate function: D(R) >= 1/(lambda * 2^(R+1)).
double d_lower(double rate, double lambda);

/// Shannon-type lower bound on R(D), clamped at zero: max(0, -log2(2*lambda*D)).
double r_lower(double distortion, double lambda);

/// Test-channel upper bound on R(D): log2(1/(lambda*D) + lambda*D/(lambda*D + 1)).
double r_upper(double distortion, double lambda);

/// Upper bound on D(R), the exact inverse of r_upper. Pole at rate 0.
double d_upper(double rate, double lambda);

/// E|Theta + Z| for Theta ~ Exp(lambda) and independent Laplacian Z with
/// E|Z| = d: returns 1/lambda + lambda*d^2/(lambda*d + 1).
double expected_abs_sum(double lambda, double d);

/// Differential entropy (bits) of the Laplacian maximizing h(Z) under
/// E|Z| <= d: log2(2*e*d).
double laplacian_entropy(double d);

enum class RdProvenance { LowerBound, UpperBound, BlahutArimoto };

std::string to_string(RdProvenance p);

struct RdPoint {
  double rate = 0.0;        // bits/parameter, >= 0
  double distortion = 0.0;  // magnitude units, > 0
};

/// A rate-distortion curve: points strictly increasing in rate, strictly
/// decreasing in distortion.
struct RdCurve {
  std::vector<RdPoint> points;
  double source_lambda = 0.0;
  RdProvenance provenance = RdProvenance::LowerBound;
  int dropped_slopes = 0;  // slopes excluded for non-convergence
};

}  // namespace coinfer
