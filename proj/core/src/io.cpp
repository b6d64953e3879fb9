#include "coinfer/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "coinfer/errors.hpp"

namespace coinfer {

std::vector<double> read_f32(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<double> out;
  char buf[4];
  std::size_t offset = 0;
  while (stream.read(buf, 4)) {
    float value;
    std::memcpy(&value, buf, 4);
    if (!std::isfinite(value)) throw parse_error("non-finite float32 in " + path, offset);
    out.push_back(static_cast<double>(value));
    offset += 4;
  }
  if (stream.gcount() != 0) {
    throw parse_error("trailing bytes do not form a float32 in " + path, offset);
  }
  return out;
}

void write_f32(const std::string& path, std::span<const double> values) {
  std::ofstream stream(path, std::ios::binary | std::ios::trunc);
  if (!stream) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (double v : values) {
    const auto f = static_cast<float>(v);
    char buf[4];
    std::memcpy(buf, &f, 4);
    stream.write(buf, 4);
  }
  if (!stream) throw std::runtime_error("write failed for '" + path + "'");
}

std::string format_full(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream stream(path, std::ios::binary | std::ios::trunc);
  if (!stream) throw std::runtime_error("cannot open '" + path + "' for writing");
  stream.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!stream) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream out;
  out << stream.rdbuf();
  return out.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace coinfer
