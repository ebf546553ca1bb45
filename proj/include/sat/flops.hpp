#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace sat {

// Counted work is multiply-add FLOPs: a matmul of (m x k) by (k x n)
// contributes 2*m*k*n to exactly one category. Causal attention products
// count only the entries actually computed (the lower triangle).
enum class FlopCat : int {
  kMhaProj = 0,  // Q/K/V projections and the W_O mix
  kAttn,         // QK^T, A*V and their backward products
  kMlp,          // W_up / W_down products
  kLmHead,       // logits matmul against the tied embedding
  kOther,
};
inline constexpr int kNumFlopCats = 5;

/// Accumulates counted FLOPs by category for one unit of work (a forward,
/// a step, ...). Plain value type; comparisons are exact integer equality.
struct FlopsCounter {
  std::array<uint64_t, kNumFlopCats> counts{};

  void add(FlopCat cat, uint64_t flops) { counts[static_cast<int>(cat)] += flops; }

  uint64_t of(FlopCat cat) const { return counts[static_cast<int>(cat)]; }

  uint64_t total() const {
    uint64_t t = 0;
    for (uint64_t c : counts) t += c;
    return t;
  }

  /// Linear-layer work: projections plus MLP. The part the omission rate
  /// scales exactly.
  uint64_t linear() const { return of(FlopCat::kMhaProj) + of(FlopCat::kMlp); }

  FlopsCounter& operator+=(const FlopsCounter& o) {
    for (int i = 0; i < kNumFlopCats; ++i) counts[i] += o.counts[i];
    return *this;
  }

  bool operator==(const FlopsCounter& o) const { return counts == o.counts; }
};

/// Per-run ledger: for every step, the counted FLOPs of the executed (sparse)
/// path and of the hypothetical dense step on the same batch.
class FlopsLedger {
 public:
  void record_step(const FlopsCounter& executed, const FlopsCounter& dense) {
    executed_.push_back(executed);
    dense_.push_back(dense);
    cum_executed_ += executed;
    cum_dense_ += dense;
  }

  int64_t steps() const { return static_cast<int64_t>(executed_.size()); }
  const FlopsCounter& executed_at(int64_t i) const { return executed_[static_cast<size_t>(i)]; }
  const FlopsCounter& dense_at(int64_t i) const { return dense_[static_cast<size_t>(i)]; }
  const FlopsCounter& cumulative_executed() const { return cum_executed_; }
  const FlopsCounter& cumulative_dense() const { return cum_dense_; }

  /// 1 - executed/dense over the whole run, all categories.
  double savings_total() const {
    const double d = static_cast<double>(cum_dense_.total());
    return d == 0.0 ? 0.0 : 1.0 - static_cast<double>(cum_executed_.total()) / d;
  }

  /// 1 - executed/dense restricted to linear-layer categories.
  double savings_linear() const {
    const double d = static_cast<double>(cum_dense_.linear());
    return d == 0.0 ? 0.0 : 1.0 - static_cast<double>(cum_executed_.linear()) / d;
  }

 private:
  std::vector<FlopsCounter> executed_;
  std::vector<FlopsCounter> dense_;
  FlopsCounter cum_executed_;
  FlopsCounter cum_dense_;
};

}  // namespace sat
