#include "coinfer/weight_stats.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "coinfer/errors.hpp"

namespace coinfer {

namespace {

static_assert(std::endian::native == std::endian::little,
              "raw-f32-le parsing assumes a little-endian host");

MagnitudeSample load_raw_f32(std::istream& stream) {
  MagnitudeSample sample;
  char buf[4];
  std::size_t offset = 0;
  while (stream.read(buf, 4)) {
    float value;
    std::memcpy(&value, buf, 4);
    if (!std::isfinite(value)) {
      throw parse_error("non-finite float32 value", offset);
    }
    sample.values.push_back(std::abs(static_cast<double>(value)));
    offset += 4;
  }
  if (stream.gcount() != 0) {
    throw parse_error("trailing bytes do not form a float32", offset);
  }
  if (sample.values.empty()) {
    throw parse_error("empty input", 0);
  }
  return sample;
}

MagnitudeSample load_csv(std::istream& stream) {
  MagnitudeSample sample;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(stream, line)) {
    std::size_t line_start = offset;
    offset += line.size() + 1;
    // Tolerate a trailing carriage return and blank lines.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t");
    const std::string token = line.substr(begin, end - begin + 1);

    char* parse_end = nullptr;
    const double value = std::strtod(token.c_str(), &parse_end);
    if (parse_end == token.c_str() || *parse_end != '\0') {
      throw parse_error("malformed numeric token '" + token + "'", line_start + begin);
    }
    if (!std::isfinite(value)) {
      throw parse_error("non-finite value '" + token + "'", line_start + begin);
    }
    sample.values.push_back(std::abs(value));
  }
  if (sample.values.empty()) {
    throw parse_error("empty input", 0);
  }
  return sample;
}

}  // namespace

MagnitudeSample load_magnitudes(std::istream& stream, MagnitudeFormat format) {
  switch (format) {
    case MagnitudeFormat::RawF32LE: return load_raw_f32(stream);
    case MagnitudeFormat::Csv: return load_csv(stream);
  }
  throw std::invalid_argument("unknown magnitude format");
}

MagnitudeSample load_magnitudes_file(const std::string& path, MagnitudeFormat format) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  return load_magnitudes(stream, format);
}

MagnitudeFormat format_from_extension(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".f32") == 0) {
    return MagnitudeFormat::RawF32LE;
  }
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return MagnitudeFormat::Csv;
  }
  throw std::invalid_argument("cannot infer format from '" + path +
                              "' (expected .f32 or .csv)");
}

WeightStats fit_exponential(const MagnitudeSample& sample) {
  if (sample.values.empty()) throw std::invalid_argument("sample is empty");
  double sum = 0.0;
  for (double v : sample.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("magnitudes must be non-negative");
    sum += v;
  }
  if (!(sum > 0.0)) {
    throw std::invalid_argument("degenerate fit: all magnitudes are zero");
  }
  WeightStats stats;
  stats.n_params = sample.values.size();
  stats.lambda = static_cast<double>(stats.n_params) / sum;
  stats.mean_magnitude = sum / static_cast<double>(stats.n_params);
  constexpr double e = 2.718281828459045235360287471353;
  stats.differential_entropy_bits = std::log2(e / stats.lambda);
  return stats;
}

std::vector<HistogramBin> histogram(const MagnitudeSample& sample, int bins) {
  if (bins < 2) throw std::invalid_argument("bins must be >= 2");
  if (sample.values.empty()) throw std::invalid_argument("sample is empty");

  double max_value = 0.0;
  for (double v : sample.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("magnitudes must be non-negative");
    max_value = std::max(max_value, v);
  }
  // Degenerate all-zero samples get a unit range so densities stay finite.
  const double range = max_value > 0.0 ? max_value : 1.0;
  const double width = range / bins;

  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : sample.values) {
    auto idx = static_cast<std::size_t>(v / width);
    if (idx >= counts.size()) idx = counts.size() - 1;  // right edge inclusive
    ++counts[idx];
  }

  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  const double norm = 1.0 / (static_cast<double>(sample.values.size()) * width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].center = (static_cast<double>(i) + 0.5) * width;
    out[i].density = static_cast<double>(counts[i]) * norm;
  }
  return out;
}

}  // namespace coinfer
