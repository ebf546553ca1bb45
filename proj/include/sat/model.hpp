#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sat/batch.hpp"
#include "sat/flops.hpp"
#include "sat/matrix.hpp"
#include "sat/rng.hpp"

namespace sat {

// Decoder-only transformer with a dense path and a sparse path that executes
// only the selected attention heads and MLP channels. Pre-layer-norm with
// learned gains, learned absolute position embeddings, tied input/output
// embedding. Attention loops over heads explicitly so row/column omission
// stays auditable.

struct ModelConfig {
  int64_t d = 0;        // hidden size
  int64_t h = 0;        // head count; h divides d
  int64_t layers = 0;
  int64_t vocab = 0;
  int64_t max_seq = 0;

  int64_t d_k() const { return d / h; }
  int64_t mlp_dim() const { return 4 * d; }
  void validate() const;
};

struct LayerParams {
  Matrix wq, wk, wv;      // d x d, logically h blocks of d x d_k
  Matrix wo;              // d x d, h blocks of d_k rows
  Matrix w_up;            // d x 4d
  Matrix w_down;          // 4d x d
  Matrix ln1_gain, ln2_gain;  // 1 x d
};

/// How masked updates treat a tensor: which slices a sparsity plan selects.
enum class TensorRole {
  kDense,     // never sparsified: embeddings, norm gains
  kHeadCols,  // W_Q/K/V: column block per head
  kHeadRows,  // W_O: row block per head
  kChanCols,  // W_up: one column per channel
  kChanRows,  // W_down: one row per channel
};

struct TensorRef {
  std::string name;
  Matrix* tensor;
  TensorRole role;
  int64_t layer;  // -1 for non-layer tensors
};

struct TransformerParams {
  ModelConfig cfg;
  Matrix tok_emb;   // vocab x d; also the output projection (transposed)
  Matrix pos_emb;   // max_seq x d
  std::vector<LayerParams> layers;
  Matrix final_gain;  // 1 x d

  /// GPT-style init: N(0, 0.02) weights, residual-output projections scaled
  /// by 1/sqrt(2*layers), unit gains. Fill order is fixed, so a seed pins
  /// every parameter bit.
  static TransformerParams init(const ModelConfig& cfg, Rng& rng);
  static TransformerParams zeros(const ModelConfig& cfg);

  /// Canonical tensor enumeration (also the checkpoint manifest order).
  std::vector<TensorRef> tensor_refs();
  std::vector<TensorRef> tensor_refs() const;
};

/// Per-layer selected head indices and MLP channel indices for one
/// iteration. Indices are sorted ascending and unique.
struct LayerPlan {
  std::vector<int32_t> head_indices;     // into [0, h)
  std::vector<int32_t> channel_indices;  // into [0, 4d)
  bool operator==(const LayerPlan&) const = default;
};

struct SparsityPlan {
  std::vector<LayerPlan> layers;

  static SparsityPlan full(const ModelConfig& cfg);
  bool is_full(const ModelConfig& cfg) const;
  /// Enforces sortedness, uniqueness, ranges and per-layer counts.
  void validate(const ModelConfig& cfg) const;
  bool operator==(const SparsityPlan&) const = default;
};

/// Retained counts under omission rate r: floor(h*(1-r)) heads and
/// floor(4d*(1-r)) channels. Rejects rates that would floor to zero.
int64_t retained_heads(const ModelConfig& cfg, double rate);
int64_t retained_channels(const ModelConfig& cfg, double rate);

/// Expands head indices to the covered column/row indices (d_k per head).
std::vector<int32_t> head_slice_indices(std::span<const int32_t> heads, int64_t d_k);

struct LayerTrace {
  Matrix attn_input;         // residual stream entering the block
  Matrix attn_input_normed;  // operand of W_Q/K/V; the Z for head scoring
  std::vector<Matrix> q, k, v;   // per selected head, (B*n) x d_k
  std::vector<Matrix> attn;      // per selected head, (B*n) x n causal rows
  std::vector<Matrix> head_out;  // per selected head, (B*n) x d_k
  Matrix mlp_input;          // residual stream entering the MLP
  Matrix mlp_input_normed;   // operand of W_up; the Z for channel scoring
  Matrix mlp_pre;            // (B*n) x c~, before the activation
  Matrix mlp_act;            // gelu(mlp_pre)
  Matrix mlp_tanh;           // tanh cache for the activation backward
};

struct ForwardTrace {
  int64_t batch = 0;
  int64_t seq = 0;
  std::vector<int32_t> tokens;  // flattened inputs, for embedding backward
  std::vector<LayerTrace> layers;
  Matrix final_input;   // residual stream before the final norm
  Matrix final_normed;
  SparsityPlan plan;    // the plan this trace was computed under
};

/// Supplies the selection for each layer as the forward pass reaches it.
/// The scoring pass plugs in here; a fixed plan is the trivial source.
class PlanSource {
 public:
  virtual ~PlanSource() = default;
  virtual std::vector<int32_t> heads_for_layer(int64_t layer, const Matrix& z_qkv) = 0;
  virtual std::vector<int32_t> channels_for_layer(int64_t layer, const Matrix& z_mlp) = 0;
};

/// Forward pass executing only the heads/channels the source selects.
/// Returns (B*n) x vocab logits; fills the trace when given.
Matrix forward_with_source(const TransformerParams& params, const Batch& batch,
                           PlanSource& source, ForwardTrace* trace = nullptr,
                           FlopsCounter* fc = nullptr);

Matrix sparse_forward(const TransformerParams& params, const Batch& batch,
                      const SparsityPlan& plan, ForwardTrace* trace = nullptr,
                      FlopsCounter* fc = nullptr);

Matrix dense_forward(const TransformerParams& params, const Batch& batch,
                     ForwardTrace* trace = nullptr, FlopsCounter* fc = nullptr);

/// Gradients for every parameter of the subnetwork the plan selected.
/// Slices of unselected heads/channels are exactly zero.
TransformerParams sparse_backward(const TransformerParams& params, const ForwardTrace& trace,
                                  const Matrix& dlogits, const SparsityPlan& plan,
                                  FlopsCounter* fc = nullptr);

/// Counted matmul FLOPs of one forward pass with h_sel heads and c_sel
/// channels per layer. Mirrors exactly what the kernels record.
FlopsCounter counted_forward_flops(const ModelConfig& cfg, int64_t batch, int64_t seq,
                                   int64_t h_sel, int64_t c_sel);
/// Same for forward plus backward (one optimizer step's worth of matmuls).
FlopsCounter counted_step_flops(const ModelConfig& cfg, int64_t batch, int64_t seq,
                                int64_t h_sel, int64_t c_sel);

}  // namespace sat
