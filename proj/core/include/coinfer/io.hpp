#pragma once

#include <span>
#include <string>
#include <vector>

namespace coinfer {

/// Signed little-endian float32 blob. Rejects NaN/Inf with the byte offset.
std::vector<double> read_f32(const std::string& path);
void write_f32(const std::string& path, std::span<const double> values);

/// Shortest text form that round-trips a double (17 significant digits).
std::string format_full(double value);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// FNV-1a 64-bit digest as 16 hex chars, for run-manifest config hashes.
std::string fnv1a_hex(const std::string& data);

}  // namespace coinfer
