#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coinfer {

/// Malformed input data. Carries the byte offset at which parsing failed.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Incompatible tensor/vector dimensions.
class shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace coinfer
