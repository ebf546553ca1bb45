#include "sat/model.hpp"

#include <algorithm>
#include <cmath>

#include "sat/numerics.hpp"

namespace sat {

void ModelConfig::validate() const {
  SAT_REQUIRE(d >= 1, "model: d must be >= 1");
  SAT_REQUIRE(h >= 1, "model: h must be >= 1");
  SAT_REQUIRE(layers >= 1, "model: layers must be >= 1");
  SAT_REQUIRE(vocab >= 1, "model: vocab must be >= 1");
  SAT_REQUIRE(max_seq >= 1, "model: max_seq must be >= 1");
  SAT_REQUIRE(d % h == 0, "model: h must divide d (d=" + std::to_string(d) +
                          ", h=" + std::to_string(h) + ")");
}

TransformerParams TransformerParams::zeros(const ModelConfig& cfg) {
  cfg.validate();
  TransformerParams p;
  p.cfg = cfg;
  p.tok_emb = Matrix(cfg.vocab, cfg.d);
  p.pos_emb = Matrix(cfg.max_seq, cfg.d);
  p.layers.resize(static_cast<size_t>(cfg.layers));
  for (auto& l : p.layers) {
    l.wq = Matrix(cfg.d, cfg.d);
    l.wk = Matrix(cfg.d, cfg.d);
    l.wv = Matrix(cfg.d, cfg.d);
    l.wo = Matrix(cfg.d, cfg.d);
    l.w_up = Matrix(cfg.d, cfg.mlp_dim());
    l.w_down = Matrix(cfg.mlp_dim(), cfg.d);
    l.ln1_gain = Matrix(1, cfg.d);
    l.ln2_gain = Matrix(1, cfg.d);
  }
  p.final_gain = Matrix(1, cfg.d);
  return p;
}

namespace {

void fill_normal(Matrix& m, Rng& rng, double std_dev) {
  for (double& v : m.data) v = rng.normal() * std_dev;
}

void fill_ones(Matrix& m) {
  std::fill(m.data.begin(), m.data.end(), 1.0);
}

}  // namespace

TransformerParams TransformerParams::init(const ModelConfig& cfg, Rng& rng) {
  TransformerParams p = zeros(cfg);
  const double base_std = 0.02;
  const double resid_std = base_std / std::sqrt(2.0 * static_cast<double>(cfg.layers));
  fill_normal(p.tok_emb, rng, base_std);
  fill_normal(p.pos_emb, rng, base_std);
  for (auto& l : p.layers) {
    fill_normal(l.wq, rng, base_std);
    fill_normal(l.wk, rng, base_std);
    fill_normal(l.wv, rng, base_std);
    fill_normal(l.wo, rng, resid_std);
    fill_normal(l.w_up, rng, base_std);
    fill_normal(l.w_down, rng, resid_std);
    fill_ones(l.ln1_gain);
    fill_ones(l.ln2_gain);
  }
  fill_ones(p.final_gain);
  return p;
}

std::vector<TensorRef> TransformerParams::tensor_refs() {
  std::vector<TensorRef> refs;
  refs.push_back({"tok_emb", &tok_emb, TensorRole::kDense, -1});
  refs.push_back({"pos_emb", &pos_emb, TensorRole::kDense, -1});
  for (int64_t l = 0; l < static_cast<int64_t>(layers.size()); ++l) {
    auto& lp = layers[static_cast<size_t>(l)];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    refs.push_back({prefix + "wq", &lp.wq, TensorRole::kHeadCols, l});
    refs.push_back({prefix + "wk", &lp.wk, TensorRole::kHeadCols, l});
    refs.push_back({prefix + "wv", &lp.wv, TensorRole::kHeadCols, l});
    refs.push_back({prefix + "wo", &lp.wo, TensorRole::kHeadRows, l});
    refs.push_back({prefix + "w_up", &lp.w_up, TensorRole::kChanCols, l});
    refs.push_back({prefix + "w_down", &lp.w_down, TensorRole::kChanRows, l});
    refs.push_back({prefix + "ln1_gain", &lp.ln1_gain, TensorRole::kDense, l});
    refs.push_back({prefix + "ln2_gain", &lp.ln2_gain, TensorRole::kDense, l});
  }
  refs.push_back({"final_gain", &final_gain, TensorRole::kDense, -1});
  return refs;
}

std::vector<TensorRef> TransformerParams::tensor_refs() const {
  return const_cast<TransformerParams*>(this)->tensor_refs();
}

int64_t retained_heads(const ModelConfig& cfg, double rate) {
  SAT_REQUIRE(rate >= 0.0 && rate < 1.0, "omission rate must be in [0,1)");
  const int64_t n = static_cast<int64_t>(std::floor(static_cast<double>(cfg.h) * (1.0 - rate)));
  SAT_REQUIRE(n >= 1, "omission rate " + std::to_string(rate) + " leaves no head (h=" +
                      std::to_string(cfg.h) + ")");
  return n;
}

int64_t retained_channels(const ModelConfig& cfg, double rate) {
  SAT_REQUIRE(rate >= 0.0 && rate < 1.0, "omission rate must be in [0,1)");
  const int64_t n =
      static_cast<int64_t>(std::floor(static_cast<double>(cfg.mlp_dim()) * (1.0 - rate)));
  SAT_REQUIRE(n >= 1, "omission rate " + std::to_string(rate) + " leaves no MLP channel (4d=" +
                      std::to_string(cfg.mlp_dim()) + ")");
  return n;
}

SparsityPlan SparsityPlan::full(const ModelConfig& cfg) {
  SparsityPlan plan;
  plan.layers.resize(static_cast<size_t>(cfg.layers));
  for (auto& lp : plan.layers) {
    lp.head_indices.resize(static_cast<size_t>(cfg.h));
    for (int64_t i = 0; i < cfg.h; ++i) lp.head_indices[static_cast<size_t>(i)] = static_cast<int32_t>(i);
    lp.channel_indices.resize(static_cast<size_t>(cfg.mlp_dim()));
    for (int64_t i = 0; i < cfg.mlp_dim(); ++i)
      lp.channel_indices[static_cast<size_t>(i)] = static_cast<int32_t>(i);
  }
  return plan;
}

bool SparsityPlan::is_full(const ModelConfig& cfg) const {
  if (static_cast<int64_t>(layers.size()) != cfg.layers) return false;
  for (const auto& lp : layers)
    if (static_cast<int64_t>(lp.head_indices.size()) != cfg.h ||
        static_cast<int64_t>(lp.channel_indices.size()) != cfg.mlp_dim())
      return false;
  return true;
}

namespace {

void validate_indices(const std::vector<int32_t>& idx, int64_t limit, const std::string& what) {
  SAT_REQUIRE(!idx.empty(), "plan: no " + what + " selected");
  for (size_t i = 0; i < idx.size(); ++i) {
    SAT_REQUIRE(idx[i] >= 0 && idx[i] < limit, "plan: " + what + " index out of range");
    if (i > 0) SAT_REQUIRE(idx[i] > idx[i - 1], "plan: " + what + " indices must be sorted unique");
  }
}

}  // namespace

void SparsityPlan::validate(const ModelConfig& cfg) const {
  SAT_REQUIRE(static_cast<int64_t>(layers.size()) == cfg.layers,
          "plan: layer count mismatch (" + std::to_string(layers.size()) + " vs config " +
              std::to_string(cfg.layers) + ")");
  for (const auto& lp : layers) {
    validate_indices(lp.head_indices, cfg.h, "head");
    validate_indices(lp.channel_indices, cfg.mlp_dim(), "channel");
  }
}

std::vector<int32_t> head_slice_indices(std::span<const int32_t> heads, int64_t d_k) {
  std::vector<int32_t> cols;
  cols.reserve(heads.size() * static_cast<size_t>(d_k));
  for (int32_t head : heads)
    for (int64_t j = 0; j < d_k; ++j) cols.push_back(static_cast<int32_t>(head * d_k + j));
  return cols;
}

namespace {

class FixedPlanSource final : public PlanSource {
 public:
  explicit FixedPlanSource(const SparsityPlan& plan) : plan_(plan) {}
  std::vector<int32_t> heads_for_layer(int64_t layer, const Matrix&) override {
    return plan_.layers[static_cast<size_t>(layer)].head_indices;
  }
  std::vector<int32_t> channels_for_layer(int64_t layer, const Matrix&) override {
    return plan_.layers[static_cast<size_t>(layer)].channel_indices;
  }

 private:
  const SparsityPlan& plan_;
};

uint64_t causal_pair_flops(int64_t batch, int64_t seq, int64_t d_k) {
  // One triangular product (scores or mix): sum_j 2*d_k*(j+1) per sample.
  return static_cast<uint64_t>(batch) * static_cast<uint64_t>(d_k) *
         static_cast<uint64_t>(seq) * static_cast<uint64_t>(seq + 1);
}

/// Embedding lookup: X[row] = tok_emb[token] + pos_emb[position].
Matrix embed(const TransformerParams& params, const Batch& batch) {
  const ModelConfig& cfg = params.cfg;
  SAT_REQUIRE_DATA(batch.seq <= cfg.max_seq, "sequence length " + std::to_string(batch.seq) +
                                             " exceeds max_seq " + std::to_string(cfg.max_seq));
  SAT_REQUIRE_DATA(batch.batch >= 1 && batch.seq >= 1, "empty batch");
  SAT_REQUIRE_DATA(static_cast<int64_t>(batch.inputs.size()) == batch.batch * batch.seq,
               "batch token count mismatch");
  const int64_t m = batch.batch * batch.seq;
  Matrix x(m, cfg.d);
  for (int64_t r = 0; r < m; ++r) {
    const int32_t tok = batch.inputs[static_cast<size_t>(r)];
    SAT_REQUIRE_DATA(tok >= 0 && tok < cfg.vocab, "token id " + std::to_string(tok) +
                                                  " out of vocab range");
    const int64_t pos = r % batch.seq;
    const double* te = params.tok_emb.row(tok);
    const double* pe = params.pos_emb.row(pos);
    double* xr = x.row(r);
    for (int64_t j = 0; j < cfg.d; ++j) xr[j] = te[j] + pe[j];
  }
  return x;
}

}  // namespace

Matrix forward_with_source(const TransformerParams& params, const Batch& batch,
                           PlanSource& source, ForwardTrace* trace, FlopsCounter* fc) {
  const ModelConfig& cfg = params.cfg;
  cfg.validate();
  const int64_t B = batch.batch, n = batch.seq, d = cfg.d, d_k = cfg.d_k();
  const int64_t m = B * n;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(d_k));

  Matrix x = embed(params, batch);

  if (trace) {
    trace->batch = B;
    trace->seq = n;
    trace->tokens = batch.inputs;
    trace->layers.assign(static_cast<size_t>(cfg.layers), LayerTrace{});
    trace->plan.layers.assign(static_cast<size_t>(cfg.layers), LayerPlan{});
  }

  for (int64_t l = 0; l < cfg.layers; ++l) {
    const LayerParams& lp = params.layers[static_cast<size_t>(l)];
    LayerTrace* lt = trace ? &trace->layers[static_cast<size_t>(l)] : nullptr;

    // Attention block, pre-norm.
    Matrix xn1 = layer_norm(x, lp.ln1_gain);
    const std::vector<int32_t> heads = source.heads_for_layer(l, xn1);
    validate_indices(heads, cfg.h, "head");
    if (lt) {
      lt->attn_input = x;
      lt->attn_input_normed = xn1;
      lt->q.reserve(heads.size());
      lt->k.reserve(heads.size());
      lt->v.reserve(heads.size());
      lt->attn.reserve(heads.size());
      lt->head_out.reserve(heads.size());
    }
    if (trace) trace->plan.layers[static_cast<size_t>(l)].head_indices = heads;

    Matrix mha_out(m, d);
    for (int32_t head : heads) {
      std::vector<int32_t> cols = head_slice_indices(std::span(&head, 1), d_k);
      Matrix q = matmul(xn1, gather_columns(lp.wq, cols), fc, FlopCat::kMhaProj);
      Matrix k = matmul(xn1, gather_columns(lp.wk, cols), fc, FlopCat::kMhaProj);
      Matrix v = matmul(xn1, gather_columns(lp.wv, cols), fc, FlopCat::kMhaProj);

      // Causal attention: position j attends to keys 0..j of its own sample.
      Matrix attn(m, n);
      Matrix head_out(m, d_k);
#pragma omp parallel for schedule(static) if (B > 1)
      for (int64_t b = 0; b < B; ++b) {
        const int64_t r0 = b * n;
        for (int64_t j = 0; j < n; ++j) {
          const double* qr = q.row(r0 + j);
          double* ar = attn.row(r0 + j);
          double mx = -HUGE_VAL;
          for (int64_t t = 0; t <= j; ++t) {
            const double* kr = k.row(r0 + t);
            double s = 0.0;
            for (int64_t e = 0; e < d_k; ++e) s += qr[e] * kr[e];
            ar[t] = s * attn_scale;
            mx = std::max(mx, ar[t]);
          }
          double sum = 0.0;
          for (int64_t t = 0; t <= j; ++t) {
            ar[t] = std::exp(ar[t] - mx);
            sum += ar[t];
          }
          const double inv = 1.0 / sum;
          for (int64_t t = 0; t <= j; ++t) ar[t] *= inv;
          double* hr = head_out.row(r0 + j);
          for (int64_t e = 0; e < d_k; ++e) hr[e] = 0.0;
          for (int64_t t = 0; t <= j; ++t) {
            const double w = ar[t];
            const double* vr = v.row(r0 + t);
            for (int64_t e = 0; e < d_k; ++e) hr[e] += w * vr[e];
          }
        }
      }
      if (fc) fc->add(FlopCat::kAttn, 2 * causal_pair_flops(B, n, d_k));

      // Only the W_O rows of this head participate.
      Matrix wo_rows = gather_rows(lp.wo, cols);
      add_inplace(mha_out, matmul(head_out, wo_rows, fc, FlopCat::kMhaProj));

      if (lt) {
        lt->q.push_back(std::move(q));
        lt->k.push_back(std::move(k));
        lt->v.push_back(std::move(v));
        lt->attn.push_back(std::move(attn));
        lt->head_out.push_back(std::move(head_out));
      }
    }
    add_inplace(x, mha_out);

    // MLP block, pre-norm.
    Matrix xn2 = layer_norm(x, lp.ln2_gain);
    const std::vector<int32_t> channels = source.channels_for_layer(l, xn2);
    validate_indices(channels, cfg.mlp_dim(), "channel");
    if (trace) trace->plan.layers[static_cast<size_t>(l)].channel_indices = channels;

    Matrix up = matmul(xn2, gather_columns(lp.w_up, channels), fc, FlopCat::kMlp);
    Matrix tanh_cache;
    Matrix act = lt ? gelu_with_cache(up, tanh_cache) : gelu(up);
    Matrix down = matmul(act, gather_rows(lp.w_down, channels), fc, FlopCat::kMlp);
    if (lt) {
      lt->mlp_input = x;
      lt->mlp_input_normed = std::move(xn2);
      lt->mlp_pre = std::move(up);
      lt->mlp_act = std::move(act);
      lt->mlp_tanh = std::move(tanh_cache);
    }
    add_inplace(x, down);
  }

  Matrix xf = layer_norm(x, params.final_gain);
  Matrix logits = matmul_nt(xf, params.tok_emb, fc, FlopCat::kLmHead);
  if (trace) {
    trace->final_input = std::move(x);
    trace->final_normed = std::move(xf);
  }
  return logits;
}

Matrix sparse_forward(const TransformerParams& params, const Batch& batch,
                      const SparsityPlan& plan, ForwardTrace* trace, FlopsCounter* fc) {
  plan.validate(params.cfg);
  FixedPlanSource source(plan);
  return forward_with_source(params, batch, source, trace, fc);
}

Matrix dense_forward(const TransformerParams& params, const Batch& batch, ForwardTrace* trace,
                     FlopsCounter* fc) {
  const SparsityPlan plan = SparsityPlan::full(params.cfg);
  FixedPlanSource source(plan);
  return forward_with_source(params, batch, source, trace, fc);
}

TransformerParams sparse_backward(const TransformerParams& params, const ForwardTrace& trace,
                                  const Matrix& dlogits, const SparsityPlan& plan,
                                  FlopsCounter* fc) {
  const ModelConfig& cfg = params.cfg;
  SAT_CHECK_INTERNAL(trace.plan == plan, "sparse_backward: trace was produced under a different plan");
  SAT_CHECK_INTERNAL(static_cast<int64_t>(trace.layers.size()) == cfg.layers,
                 "sparse_backward: trace layer count mismatch");
  const int64_t B = trace.batch, n = trace.seq, d = cfg.d, d_k = cfg.d_k();
  const int64_t m = B * n;
  SAT_CHECK_INTERNAL(dlogits.rows == m && dlogits.cols == cfg.vocab,
                 "sparse_backward: dlogits shape mismatch");
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(d_k));

  TransformerParams grads = TransformerParams::zeros(cfg);

  // Tied embedding: output-projection gradient accumulates into tok_emb.
  Matrix dxf = matmul(dlogits, params.tok_emb, fc, FlopCat::kLmHead);
  add_inplace(grads.tok_emb, matmul_tn(dlogits, trace.final_normed, fc, FlopCat::kLmHead));

  LayerNormGrads fin = layer_norm_backward(trace.final_input, params.final_gain, dxf);
  grads.final_gain = std::move(fin.dgain);
  Matrix dx = std::move(fin.dx);

  for (int64_t l = cfg.layers - 1; l >= 0; --l) {
    const LayerParams& lp = params.layers[static_cast<size_t>(l)];
    const LayerTrace& lt = trace.layers[static_cast<size_t>(l)];
    LayerParams& gl = grads.layers[static_cast<size_t>(l)];
    const LayerPlan& lplan = plan.layers[static_cast<size_t>(l)];

    // MLP block backward. Residual: dx flows through both branches.
    const std::vector<int32_t>& channels = lplan.channel_indices;
    Matrix wdown_sel = gather_rows(lp.w_down, channels);
    Matrix dact = matmul_nt(dx, wdown_sel, fc, FlopCat::kMlp);
    Matrix dwdown_sel = matmul_tn(lt.mlp_act, dx, fc, FlopCat::kMlp);
    scatter_add_rows(gl.w_down, channels, dwdown_sel);

    Matrix dup = gelu_backward_cached(lt.mlp_pre, lt.mlp_tanh, dact);
    Matrix wup_sel = gather_columns(lp.w_up, channels);
    Matrix dxn2 = matmul_nt(dup, wup_sel, fc, FlopCat::kMlp);
    Matrix dwup_sel = matmul_tn(lt.mlp_input_normed, dup, fc, FlopCat::kMlp);
    scatter_add_columns(gl.w_up, channels, dwup_sel);

    LayerNormGrads ln2 = layer_norm_backward(lt.mlp_input, lp.ln2_gain, dxn2);
    gl.ln2_gain = std::move(ln2.dgain);
    add_inplace(dx, ln2.dx);

    // Attention block backward.
    Matrix dxn1(m, d);
    for (size_t slot = 0; slot < lplan.head_indices.size(); ++slot) {
      const int32_t head = lplan.head_indices[slot];
      std::vector<int32_t> cols = head_slice_indices(std::span(&head, 1), d_k);

      Matrix wo_rows = gather_rows(lp.wo, cols);
      Matrix dhead = matmul_nt(dx, wo_rows, fc, FlopCat::kMhaProj);
      Matrix dwo_rows = matmul_tn(lt.head_out[slot], dx, fc, FlopCat::kMhaProj);
      scatter_add_rows(gl.wo, cols, dwo_rows);

      const Matrix& q = lt.q[slot];
      const Matrix& k = lt.k[slot];
      const Matrix& v = lt.v[slot];
      const Matrix& attn = lt.attn[slot];
      Matrix dq(m, d_k), dk(m, d_k), dv(m, d_k);
#pragma omp parallel for schedule(static) if (B > 1)
      for (int64_t b = 0; b < B; ++b) {
        const int64_t r0 = b * n;
        std::vector<double> da(static_cast<size_t>(n));
        for (int64_t j = 0; j < n; ++j) {
          const double* ar = attn.row(r0 + j);
          const double* dh = dhead.row(r0 + j);
          // dA over the causal prefix, then softmax backward on that row.
          double dot = 0.0;
          for (int64_t t = 0; t <= j; ++t) {
            const double* vr = v.row(r0 + t);
            double s = 0.0;
            for (int64_t e = 0; e < d_k; ++e) s += dh[e] * vr[e];
            da[static_cast<size_t>(t)] = s;
            dot += s * ar[t];
          }
          double* dqr = dq.row(r0 + j);
          const double* qr = q.row(r0 + j);
          for (int64_t t = 0; t <= j; ++t) {
            const double ds = ar[t] * (da[static_cast<size_t>(t)] - dot) * attn_scale;
            const double w = ar[t];
            const double* kr = k.row(r0 + t);
            double* dkr = dk.row(r0 + t);
            double* dvr = dv.row(r0 + t);
            for (int64_t e = 0; e < d_k; ++e) {
              dqr[e] += ds * kr[e];
              dkr[e] += ds * qr[e];
              dvr[e] += w * dh[e];
            }
          }
        }
      }
      if (fc) fc->add(FlopCat::kAttn, 4 * causal_pair_flops(B, n, d_k));

      add_inplace(dxn1, matmul_nt(dq, gather_columns(lp.wq, cols), fc, FlopCat::kMhaProj));
      add_inplace(dxn1, matmul_nt(dk, gather_columns(lp.wk, cols), fc, FlopCat::kMhaProj));
      add_inplace(dxn1, matmul_nt(dv, gather_columns(lp.wv, cols), fc, FlopCat::kMhaProj));
      scatter_add_columns(gl.wq, cols, matmul_tn(lt.attn_input_normed, dq, fc, FlopCat::kMhaProj));
      scatter_add_columns(gl.wk, cols, matmul_tn(lt.attn_input_normed, dk, fc, FlopCat::kMhaProj));
      scatter_add_columns(gl.wv, cols, matmul_tn(lt.attn_input_normed, dv, fc, FlopCat::kMhaProj));
    }

    LayerNormGrads ln1 = layer_norm_backward(lt.attn_input, lp.ln1_gain, dxn1);
    gl.ln1_gain = std::move(ln1.dgain);
    add_inplace(dx, ln1.dx);
  }

  // Embedding backward: scatter rows by token id / position.
  for (int64_t r = 0; r < m; ++r) {
    const int32_t tok = trace.tokens[static_cast<size_t>(r)];
    const int64_t pos = r % n;
    double* te = grads.tok_emb.row(tok);
    double* pe = grads.pos_emb.row(pos);
    const double* dxr = dx.row(r);
    for (int64_t j = 0; j < d; ++j) {
      te[j] += dxr[j];
      pe[j] += dxr[j];
    }
  }
  return grads;
}

FlopsCounter counted_forward_flops(const ModelConfig& cfg, int64_t batch, int64_t seq,
                                   int64_t h_sel, int64_t c_sel) {
  const uint64_t m = static_cast<uint64_t>(batch) * static_cast<uint64_t>(seq);
  const uint64_t d = static_cast<uint64_t>(cfg.d);
  const uint64_t dk = static_cast<uint64_t>(cfg.d_k());
  const uint64_t L = static_cast<uint64_t>(cfg.layers);
  FlopsCounter fc;
  fc.add(FlopCat::kMhaProj, L * static_cast<uint64_t>(h_sel) * 8 * m * d * dk);
  fc.add(FlopCat::kAttn,
         L * static_cast<uint64_t>(h_sel) * 2 * causal_pair_flops(batch, seq, cfg.d_k()));
  fc.add(FlopCat::kMlp, L * static_cast<uint64_t>(c_sel) * 4 * m * d);
  fc.add(FlopCat::kLmHead, 2 * m * d * static_cast<uint64_t>(cfg.vocab));
  return fc;
}

FlopsCounter counted_step_flops(const ModelConfig& cfg, int64_t batch, int64_t seq,
                                int64_t h_sel, int64_t c_sel) {
  const uint64_t m = static_cast<uint64_t>(batch) * static_cast<uint64_t>(seq);
  const uint64_t d = static_cast<uint64_t>(cfg.d);
  const uint64_t dk = static_cast<uint64_t>(cfg.d_k());
  const uint64_t L = static_cast<uint64_t>(cfg.layers);
  FlopsCounter fc;
  fc.add(FlopCat::kMhaProj, L * static_cast<uint64_t>(h_sel) * 24 * m * d * dk);
  fc.add(FlopCat::kAttn,
         L * static_cast<uint64_t>(h_sel) * 6 * causal_pair_flops(batch, seq, cfg.d_k()));
  fc.add(FlopCat::kMlp, L * static_cast<uint64_t>(c_sel) * 12 * m * d);
  fc.add(FlopCat::kLmHead, 6 * m * d * static_cast<uint64_t>(cfg.vocab));
  return fc;
}

}  // namespace sat
