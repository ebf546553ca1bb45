#pragma once

#include <cstdint>
#include <ostream>

namespace sat {

/// Ladder omission-rate trajectory: a constant maximum rate until
/// `decrease_start`, then stepwise decrease to 0 over geometrically
/// lengthening segments, reaching 0 at `total_steps`.
struct LorsConfig {
  double max_rate = 0.0;        // r, in [0, 1)
  int64_t total_steps = 1;      // T
  int64_t decrease_start = 1;   // eta, 1 <= eta < T
  int64_t ladders = 1;          // L >= 1

  void validate() const;
};

struct LrConfig {
  double max_lr = 1e-3;
  int64_t warmup_steps = 0;  // < total_steps
  int64_t total_steps = 1;

  void validate() const;
};

/// Ladder rung for a step strictly inside the decrease window
/// (decrease_start < t < total_steps). Rung l covers the fraction
/// 2^(l-1)/(2^L - 1) of the window; each rung is twice as long as the last.
int64_t ladder_index(const LorsConfig& cfg, int64_t t);

/// Omission rate at 1-based step t. Piecewise constant, non-increasing;
/// 0 for t >= total_steps.
double lors_rate(const LorsConfig& cfg, int64_t t);

/// Linear warmup to max_lr over warmup_steps, then cosine decay to 0 at
/// total_steps.
double lr_at(const LrConfig& cfg, int64_t t);

/// CSV `step,omission_rate,ladder_index,lr` for t = 1..total_steps. The
/// ladder_index column is 0 during the constant phase and L from
/// total_steps onward.
void write_schedule_csv(std::ostream& os, const LorsConfig& lors, const LrConfig& lr);

}  // namespace sat
