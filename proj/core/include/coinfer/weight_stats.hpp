#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace coinfer {

enum class MagnitudeFormat { RawF32LE, Csv };

/// Non-negative parameter magnitudes, |w| per entry.
struct MagnitudeSample {
  std::vector<double> values;

  std::size_t count() const { return values.size(); }
};

/// Fitted exponential model of a magnitude population.
struct WeightStats {
  double lambda = 0.0;            // 1 / mean magnitude (MLE)
  double mean_magnitude = 0.0;
  std::size_t n_params = 0;
  double differential_entropy_bits = 0.0;  // log2(e / lambda)
};

struct HistogramBin {
  double center = 0.0;
  double density = 0.0;
};

/// Parses magnitudes from a raw little-endian float32 stream or a CSV with
/// one value per line, taking absolute values. NaN/Inf entries and malformed
/// bytes raise parse_error with the offending byte offset.
MagnitudeSample load_magnitudes(std::istream& stream, MagnitudeFormat format);
MagnitudeSample load_magnitudes_file(const std::string& path, MagnitudeFormat format);

/// Infers RawF32LE for ".f32" and Csv for ".csv"; anything else is an error.
MagnitudeFormat format_from_extension(const std::string& path);

WeightStats fit_exponential(const MagnitudeSample& sample);

/// Equal-width bins over [0, max(sample)]; densities integrate to 1 under the
/// rectangle rule. Bins must be >= 2.
std::vector<HistogramBin> histogram(const MagnitudeSample& sample, int bins);

}  // namespace coinfer
