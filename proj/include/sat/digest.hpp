#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sat {

/// SHA-256 accumulator for byte-equality checks over parameter slices.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const uint8_t> bytes);
  void update(std::span<const double> values);
  /// Finalizes and returns the lowercase hex digest. The accumulator is
  /// spent afterwards.
  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::span<const uint8_t> bytes);

}  // namespace sat
