#include "sat/optim.hpp"

#include <cmath>

namespace sat {

void AdamConfig::validate() const {
  SAT_REQUIRE(beta1 >= 0.0 && beta1 < 1.0, "adam: beta1 must be in [0,1)");
  SAT_REQUIRE(beta2 >= 0.0 && beta2 < 1.0, "adam: beta2 must be in [0,1)");
  SAT_REQUIRE(eps > 0.0, "adam: eps must be positive");
  SAT_REQUIRE(weight_decay >= 0.0, "adam: weight_decay must be >= 0");
}

OptimizerState OptimizerState::init(const TransformerParams& params, const AdamConfig& cfg) {
  cfg.validate();
  OptimizerState st;
  st.cfg = cfg;
  for (const TensorRef& ref : params.tensor_refs()) {
    TensorState ts;
    ts.m = Matrix(ref.tensor->rows, ref.tensor->cols);
    ts.v = Matrix(ref.tensor->rows, ref.tensor->cols);
    st.tensors.push_back(std::move(ts));
  }
  return st;
}

double clip_gradients(TransformerParams& grads, double max_norm) {
  SAT_REQUIRE(max_norm > 0.0, "clip: max_norm must be positive");
  double sq = 0.0;
  for (const TensorRef& ref : grads.tensor_refs())
    for (double g : ref.tensor->data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (const TensorRef& ref : grads.tensor_refs())
      for (double& g : ref.tensor->data) g *= scale;
  }
  return norm;
}

namespace {

struct AdamScalars {
  double lr, beta1, beta2, eps, wd, bc1, bc2;
};

inline void update_element(double& p, double& m, double& v, double g, const AdamScalars& s) {
  m = s.beta1 * m + (1.0 - s.beta1) * g;
  v = s.beta2 * v + (1.0 - s.beta2) * g * g;
  const double mhat = m / s.bc1;
  const double vhat = v / s.bc2;
  p -= s.lr * (mhat / (std::sqrt(vhat) + s.eps) + s.wd * p);
}

void update_column_range(Matrix& p, TensorState& ts, const Matrix& g, int64_t col_begin,
                         int64_t col_end, const AdamScalars& s) {
  for (int64_t i = 0; i < p.rows; ++i) {
    double* pr = p.row(i);
    double* mr = ts.m.row(i);
    double* vr = ts.v.row(i);
    const double* gr = g.row(i);
    for (int64_t j = col_begin; j < col_end; ++j) update_element(pr[j], mr[j], vr[j], gr[j], s);
  }
}

void update_row_range(Matrix& p, TensorState& ts, const Matrix& g, int64_t row_begin,
                      int64_t row_end, const AdamScalars& s) {
  for (int64_t i = row_begin; i < row_end; ++i) {
    double* pr = p.row(i);
    double* mr = ts.m.row(i);
    double* vr = ts.v.row(i);
    const double* gr = g.row(i);
    for (int64_t j = 0; j < p.cols; ++j) update_element(pr[j], mr[j], vr[j], gr[j], s);
  }
}

}  // namespace

void adamw_update(TransformerParams& params, OptimizerState& opt, const TransformerParams& grads,
                  const SparsityPlan& plan, double lr) {
  plan.validate(params.cfg);
  const int64_t d_k = params.cfg.d_k();
  auto refs = params.tensor_refs();
  auto grad_refs = grads.tensor_refs();
  SAT_CHECK_INTERNAL(refs.size() == grad_refs.size() && refs.size() == opt.tensors.size(),
                 "adamw_update: tensor enumeration mismatch");

  for (size_t i = 0; i < refs.size(); ++i) {
    Matrix& p = *refs[i].tensor;
    const Matrix& g = *grad_refs[i].tensor;
    TensorState& ts = opt.tensors[i];
    SAT_CHECK_INTERNAL(p.same_shape(g) && p.same_shape(ts.m), "adamw_update: shape mismatch");
    ts.step += 1;
    // Norm gains and embeddings skip weight decay, as is conventional.
    const bool decay = refs[i].role != TensorRole::kDense;
    AdamScalars s{lr,
                  opt.cfg.beta1,
                  opt.cfg.beta2,
                  opt.cfg.eps,
                  decay ? opt.cfg.weight_decay : 0.0,
                  1.0 - std::pow(opt.cfg.beta1, static_cast<double>(ts.step)),
                  1.0 - std::pow(opt.cfg.beta2, static_cast<double>(ts.step))};

    switch (refs[i].role) {
      case TensorRole::kDense:
        update_column_range(p, ts, g, 0, p.cols, s);
        break;
      case TensorRole::kHeadCols:
        for (int32_t head : plan.layers[static_cast<size_t>(refs[i].layer)].head_indices)
          update_column_range(p, ts, g, head * d_k, (head + 1) * d_k, s);
        break;
      case TensorRole::kHeadRows:
        for (int32_t head : plan.layers[static_cast<size_t>(refs[i].layer)].head_indices)
          update_row_range(p, ts, g, head * d_k, (head + 1) * d_k, s);
        break;
      case TensorRole::kChanCols:
        for (int32_t ch : plan.layers[static_cast<size_t>(refs[i].layer)].channel_indices)
          update_column_range(p, ts, g, ch, ch + 1, s);
        break;
      case TensorRole::kChanRows:
        for (int32_t ch : plan.layers[static_cast<size_t>(refs[i].layer)].channel_indices)
          update_row_range(p, ts, g, ch, ch + 1, s);
        break;
    }
  }
}

}  // namespace sat
