#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sat/model.hpp"
#include "sat/rng.hpp"

namespace sat {

// Neuron-importance scoring and selection. A neuron is one column of a
// linear-layer weight matrix; heads are omitted or retained atomically.

enum class ImportanceMetric {
  kUniform,    // s_v = 1
  kMagnitude,  // s_v = ||v||_2
  kWanda,      // s_v = [||Z^1||_2, ..., ||Z^d||_2] . v   (signed)
  kMaxip,      // s_v = (sum_i Z_i / m) . v               (signed)
};

struct SelectionStrategy {
  enum class Kind { kTopK, kSampling };
  Kind kind = Kind::kTopK;
  double tau = 0.05;  // sampling temperature, > 0

  static SelectionStrategy topk() { return {Kind::kTopK, 0.05}; }
  static SelectionStrategy sampling(double tau) { return {Kind::kSampling, tau}; }
  void validate() const;
};

ImportanceMetric parse_metric(const std::string& name);
std::string metric_name(ImportanceMetric m);
SelectionStrategy::Kind parse_strategy(const std::string& name);
std::string strategy_name(SelectionStrategy::Kind k);

/// One importance score per column of w, given the layer input z (the
/// operand of the product z*w). Uniform ignores the values of both
/// arguments; magnitude ignores z.
std::vector<double> score_columns(ImportanceMetric metric, const Matrix& w, const Matrix& z);

/// Per-head scores: mean of the three per-matrix head means, with each
/// score vector laid out head-major (head i owns entries [i*d_k, (i+1)*d_k)).
std::vector<double> aggregate_head_scores(std::span<const double> sq, std::span<const double> sk,
                                          std::span<const double> sv, int64_t h, int64_t d_k);

/// Indices of the k largest scores; ties broken towards the lower index.
/// Output sorted ascending.
std::vector<int32_t> select_topk(std::span<const double> scores, int64_t k);

/// k distinct indices sampled without replacement from
/// p(i) ~ exp(s_i / tau) via the Gumbel-top-k equivalence. Deterministic
/// given the rng state. Output sorted ascending.
std::vector<int32_t> select_sampling(std::span<const double> scores, int64_t k, double tau,
                                     Rng& rng);

std::vector<int32_t> select(std::span<const double> scores, int64_t k,
                            const SelectionStrategy& strategy, Rng& rng);

/// Scores and selects layer by layer as the forward pass produces the layer
/// inputs. Each layer draws from its own (step, layer)-derived stream, so
/// plans do not depend on unrelated rng consumption.
class ScoringPlanSource final : public PlanSource {
 public:
  ScoringPlanSource(const TransformerParams& params, ImportanceMetric metric,
                    SelectionStrategy strategy, double rate, uint64_t stream_seed);

  std::vector<int32_t> heads_for_layer(int64_t layer, const Matrix& z_qkv) override;
  std::vector<int32_t> channels_for_layer(int64_t layer, const Matrix& z_mlp) override;

  const SparsityPlan& plan() const { return plan_; }

 private:
  const TransformerParams& params_;
  ImportanceMetric metric_;
  SelectionStrategy strategy_;
  double rate_;
  uint64_t stream_seed_;
  SparsityPlan plan_;
};

/// Plan for one iteration from recorded layer inputs: head scores select
/// floor(h*(1-r)) heads, W_up column scores select floor(4d*(1-r)) channels,
/// independent draws per layer.
SparsityPlan build_plan(const TransformerParams& params, const ForwardTrace& trace,
                        ImportanceMetric metric, SelectionStrategy strategy, double rate,
                        Rng& rng);

}  // namespace sat
