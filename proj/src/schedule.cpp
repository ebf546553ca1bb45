#include "sat/schedule.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "sat/common.hpp"
#include "sat/util.hpp"

namespace sat {

void LorsConfig::validate() const {
  SAT_REQUIRE(max_rate >= 0.0 && max_rate < 1.0,
          "lors: max omission rate must be in [0,1), got " + std::to_string(max_rate));
  SAT_REQUIRE(total_steps >= 2, "lors: total_steps must be >= 2");
  SAT_REQUIRE(decrease_start >= 1 && decrease_start < total_steps,
          "lors: decrease_start must satisfy 1 <= eta < total_steps");
  SAT_REQUIRE(ladders >= 1 && ladders <= 62, "lors: ladder count must be in [1, 62]");
}

int64_t ladder_index(const LorsConfig& cfg, int64_t t) {
  cfg.validate();
  SAT_REQUIRE(t > cfg.decrease_start && t < cfg.total_steps,
          "ladder_index: step outside the decrease window");
  const uint64_t x = static_cast<uint64_t>(t - cfg.decrease_start);
  const uint64_t window = static_cast<uint64_t>(cfg.total_steps - cfg.decrease_start);
  const uint64_t rungs = (uint64_t{1} << cfg.ladders) - 1;
  // Rung l satisfies (2^(l-1)-1)/rungs <= x/window < (2^l-1)/rungs, which
  // collapses to l = bit_width(floor(x*rungs/window) + 1).
  const uint64_t z = static_cast<uint64_t>((static_cast<unsigned __int128>(x) * rungs) / window);
  return static_cast<int64_t>(std::bit_width(z + 1));
}

double lors_rate(const LorsConfig& cfg, int64_t t) {
  cfg.validate();
  SAT_REQUIRE(t >= 1, "lors_rate: steps are 1-based");
  if (t <= cfg.decrease_start) return cfg.max_rate;
  if (t >= cfg.total_steps) return 0.0;
  // r - (r/L)*l, computed as r*(L-l)/L so the last rung lands on 0 exactly.
  const int64_t rung = ladder_index(cfg, t);
  const double rate = cfg.max_rate * static_cast<double>(cfg.ladders - rung) /
                      static_cast<double>(cfg.ladders);
  return std::max(0.0, rate);
}

void LrConfig::validate() const {
  SAT_REQUIRE(max_lr > 0.0, "lr: max_lr must be positive");
  SAT_REQUIRE(total_steps >= 1, "lr: total_steps must be >= 1");
  SAT_REQUIRE(warmup_steps >= 0 && warmup_steps < total_steps,
          "lr: warmup_steps must satisfy 0 <= warmup < total_steps");
}

double lr_at(const LrConfig& cfg, int64_t t) {
  cfg.validate();
  SAT_REQUIRE(t >= 1, "lr_at: steps are 1-based");
  if (cfg.warmup_steps > 0 && t <= cfg.warmup_steps)
    return cfg.max_lr * static_cast<double>(t) / static_cast<double>(cfg.warmup_steps);
  if (t >= cfg.total_steps) return 0.0;
  const double progress = static_cast<double>(t - cfg.warmup_steps) /
                          static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.max_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

void write_schedule_csv(std::ostream& os, const LorsConfig& lors, const LrConfig& lr) {
  lors.validate();
  lr.validate();
  os << "step,omission_rate,ladder_index,lr\n";
  for (int64_t t = 1; t <= lors.total_steps; ++t) {
    int64_t rung = 0;
    if (t >= lors.total_steps)
      rung = lors.ladders;
    else if (t > lors.decrease_start)
      rung = ladder_index(lors, t);
    os << t << ',' << format_double(lors_rate(lors, t)) << ',' << rung << ','
       << format_double(lr_at(lr, t)) << '\n';
  }
}

}  // namespace sat
