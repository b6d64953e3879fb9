#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace coinfer {

enum class QuantKind { Uniform, PotLog };

/// Sign-preserving magnitude quantizer configuration. bit_width_total counts
/// the sign bit, so bit_width_total - 1 bits encode the magnitude.
struct QuantScheme {
  QuantKind kind = QuantKind::Uniform;
  int bit_width_total = 8;
  double theta_max = 1.0;  // clipping magnitude
};

struct QuantReport {
  double total_l1 = 0.0;
  double mean_l1 = 0.0;
  std::size_t n_params = 0;
};

/// Mid-rise uniform quantizer with bin-center reconstruction. Magnitudes above
/// theta_max clip to the top level; bit_width_total = 1 maps everything to 0;
/// an exactly-zero weight stays 0.
std::vector<double> quantize_uniform(std::span<const double> weights, const QuantScheme& scheme);

/// Power-of-two logarithmic quantizer: magnitude levels are
/// {0} u {theta_max * 2^-k : k = 0..2^(b-1)-2}, nearest level chosen in the
/// log2 domain (geometric-mean bin edges); magnitudes below the smallest
/// positive level divided by sqrt(2) map to 0. Requires bit_width_total >= 2.
std::vector<double> quantize_pot_log(std::span<const double> weights, const QuantScheme& scheme);

std::vector<double> quantize(std::span<const double> weights, const QuantScheme& scheme);

/// Entrywise L1 distortion between a weight sequence and its quantized copy.
QuantReport param_distortion(std::span<const double> original,
                             std::span<const double> quantized);

/// Nearest-rank percentile of the magnitudes, the default clipping magnitude
/// (q = 0.999 bounds level waste under exponential tails).
double magnitude_percentile(std::span<const double> weights, double q);

std::string to_json(const QuantReport& report);

}  // namespace coinfer
