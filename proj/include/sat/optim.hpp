#pragma once

#include <cstdint>
#include <vector>

#include "sat/matrix.hpp"
#include "sat/model.hpp"

namespace sat {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.1;
  void validate() const;
};

/// Full dense moment buffers for one tensor; the optimizer always keeps the
/// complete state, selection only gates which slices an update touches.
struct TensorState {
  Matrix m;  // first moment
  Matrix v;  // second moment
  int64_t step = 0;
};

struct OptimizerState {
  AdamConfig cfg;
  std::vector<TensorState> tensors;  // in TransformerParams::tensor_refs order

  static OptimizerState init(const TransformerParams& params, const AdamConfig& cfg);
};

/// Global-norm gradient clipping. Returns the pre-clip norm. Serial
/// accumulation in canonical tensor order keeps the value reproducible.
double clip_gradients(TransformerParams& grads, double max_norm);

/// AdamW applied only to the slices the plan selects. Unselected head/channel
/// slices of W_Q/K/V/O/up/down keep parameters, moments, and decay untouched
/// (the whole update is skipped, not applied with a zero gradient).
/// Non-sparsified tensors always update fully.
void adamw_update(TransformerParams& params, OptimizerState& opt, const TransformerParams& grads,
                  const SparsityPlan& plan, double lr);

}  // namespace sat
