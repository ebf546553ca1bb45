#pragma once

#include <cstdint>
#include <vector>

namespace sat {

/// One training batch: row-major B x n token ids plus next-token targets.
struct Batch {
  int64_t batch = 0;
  int64_t seq = 0;
  std::vector<int32_t> inputs;   // B*n
  std::vector<int32_t> targets;  // B*n, inputs shifted by one position
};

}  // namespace sat
