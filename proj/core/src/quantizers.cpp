#include "coinfer/quantizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace coinfer {

namespace {

void validate(const QuantScheme& scheme) {
  if (scheme.bit_width_total < 1) {
    throw std::invalid_argument("bit_width_total must be >= 1");
  }
  if (!(scheme.theta_max > 0.0)) {
    throw std::invalid_argument("theta_max must be positive");
  }
}

}  // namespace

std::vector<double> quantize_uniform(std::span<const double> weights,
                                     const QuantScheme& scheme) {
  validate(scheme);
  if (scheme.kind != QuantKind::Uniform) {
    throw std::invalid_argument("scheme kind must be Uniform");
  }
  std::vector<double> out(weights.size());
  if (scheme.bit_width_total == 1) return out;  // magnitudes collapse to 0

  const double levels = std::exp2(scheme.bit_width_total - 1);
  const double step = scheme.theta_max / levels;
  const double top_bin = levels - 1.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const double bin = std::min(std::floor(std::abs(w) / step), top_bin);
    out[i] = std::copysign((bin + 0.5) * step, w);
  }
  return out;
}

std::vector<double> quantize_pot_log(std::span<const double> weights,
                                     const QuantScheme& scheme) {
  validate(scheme);
  if (scheme.kind != QuantKind::PotLog) {
    throw std::invalid_argument("scheme kind must be PotLog");
  }
  if (scheme.bit_width_total < 2) {
    throw std::invalid_argument("pot-log needs bit_width_total >= 2 for a positive level");
  }
  // Positive levels theta_max * 2^-k for k = 0..n_positive-1; 0 is explicit.
  const double n_positive = std::exp2(scheme.bit_width_total - 1) - 1.0;
  const double max_exponent = n_positive - 1.0;

  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const double log_gap = -std::log2(std::abs(w) / scheme.theta_max);
    if (log_gap >= max_exponent + 0.5) continue;  // below smallest level / sqrt(2)
    const double k = std::clamp(std::round(log_gap), 0.0, max_exponent);
    out[i] = std::copysign(scheme.theta_max * std::exp2(-k), w);
  }
  return out;
}

std::vector<double> quantize(std::span<const double> weights, const QuantScheme& scheme) {
  return scheme.kind == QuantKind::Uniform ? quantize_uniform(weights, scheme)
                                           : quantize_pot_log(weights, scheme);
}

QuantReport param_distortion(std::span<const double> original,
                             std::span<const double> quantized) {
  if (original.size() != quantized.size()) {
    throw std::invalid_argument("sequence lengths differ");
  }
  if (original.empty()) throw std::invalid_argument("sequences are empty");
  QuantReport report;
  report.n_params = original.size();
  for (std::size_t i = 0; i < original.size(); ++i) {
    report.total_l1 += std::abs(original[i] - quantized[i]);
  }
  report.mean_l1 = report.total_l1 / static_cast<double>(report.n_params);
  return report;
}

double magnitude_percentile(std::span<const double> weights, double q) {
  if (weights.empty()) throw std::invalid_argument("empty weight sequence");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("q must be in (0, 1]");
  std::vector<double> magnitudes(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) magnitudes[i] = std::abs(weights[i]);
  std::sort(magnitudes.begin(), magnitudes.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(magnitudes.size())));
  return magnitudes[std::max<std::size_t>(rank, 1) - 1];
}

std::string to_json(const QuantReport& report) {
  nlohmann::json j;
  j["total_l1"] = report.total_l1;
  j["mean_l1"] = report.mean_l1;
  j["n_params"] = report.n_params;
  return j.dump(2);
}

}  // namespace coinfer
