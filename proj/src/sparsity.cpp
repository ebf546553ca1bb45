#include "sat/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sat/numerics.hpp"

namespace sat {

void SelectionStrategy::validate() const {
  if (kind == Kind::kSampling)
    SAT_REQUIRE(tau > 0.0, "sampling temperature must be positive, got " + std::to_string(tau));
}

ImportanceMetric parse_metric(const std::string& name) {
  if (name == "uniform") return ImportanceMetric::kUniform;
  if (name == "magnitude") return ImportanceMetric::kMagnitude;
  if (name == "wanda") return ImportanceMetric::kWanda;
  if (name == "maxip") return ImportanceMetric::kMaxip;
  throw ConfigError("unknown importance metric '" + name +
                    "' (expected uniform|magnitude|wanda|maxip)");
}

std::string metric_name(ImportanceMetric m) {
  switch (m) {
    case ImportanceMetric::kUniform: return "uniform";
    case ImportanceMetric::kMagnitude: return "magnitude";
    case ImportanceMetric::kWanda: return "wanda";
    case ImportanceMetric::kMaxip: return "maxip";
  }
  throw InternalError("bad metric enum");
}

SelectionStrategy::Kind parse_strategy(const std::string& name) {
  if (name == "topk") return SelectionStrategy::Kind::kTopK;
  if (name == "sampling") return SelectionStrategy::Kind::kSampling;
  throw ConfigError("unknown selection strategy '" + name + "' (expected topk|sampling)");
}

std::string strategy_name(SelectionStrategy::Kind k) {
  return k == SelectionStrategy::Kind::kTopK ? "topk" : "sampling";
}

std::vector<double> score_columns(ImportanceMetric metric, const Matrix& w, const Matrix& z) {
  if (metric != ImportanceMetric::kUniform && metric != ImportanceMetric::kMagnitude) {
    SAT_REQUIRE(z.cols == w.rows, "score_columns: z.cols (" + std::to_string(z.cols) +
                                  ") must equal w.rows (" + std::to_string(w.rows) + ")");
    SAT_REQUIRE(z.rows >= 1, "score_columns: empty input activations");
  }
  std::vector<double> scores(static_cast<size_t>(w.cols), 0.0);
  switch (metric) {
    case ImportanceMetric::kUniform: {
      std::fill(scores.begin(), scores.end(), 1.0);
      break;
    }
    case ImportanceMetric::kMagnitude: {
      for (int64_t i = 0; i < w.rows; ++i) {
        const double* r = w.row(i);
        for (int64_t j = 0; j < w.cols; ++j) scores[static_cast<size_t>(j)] += r[j] * r[j];
      }
      for (double& s : scores) s = std::sqrt(s);
      break;
    }
    case ImportanceMetric::kWanda: {
      const std::vector<double> norms = column_l2_norms(z);
      for (int64_t i = 0; i < w.rows; ++i) {
        const double* r = w.row(i);
        const double ni = norms[static_cast<size_t>(i)];
        for (int64_t j = 0; j < w.cols; ++j) scores[static_cast<size_t>(j)] += ni * r[j];
      }
      break;
    }
    case ImportanceMetric::kMaxip: {
      const std::vector<double> mean = row_mean(z);
      for (int64_t i = 0; i < w.rows; ++i) {
        const double* r = w.row(i);
        const double mi = mean[static_cast<size_t>(i)];
        for (int64_t j = 0; j < w.cols; ++j) scores[static_cast<size_t>(j)] += mi * r[j];
      }
      break;
    }
  }
  return scores;
}

std::vector<double> aggregate_head_scores(std::span<const double> sq, std::span<const double> sk,
                                          std::span<const double> sv, int64_t h, int64_t d_k) {
  const size_t expect = static_cast<size_t>(h * d_k);
  SAT_REQUIRE(sq.size() == expect && sk.size() == expect && sv.size() == expect,
          "aggregate_head_scores: score vectors must have length h*d_k");
  std::vector<double> out(static_cast<size_t>(h));
  for (int64_t i = 0; i < h; ++i) {
    double q = 0.0, k = 0.0, v = 0.0;
    for (int64_t j = 0; j < d_k; ++j) {
      const size_t idx = static_cast<size_t>(i * d_k + j);
      q += sq[idx];
      k += sk[idx];
      v += sv[idx];
    }
    const double dkf = static_cast<double>(d_k);
    out[static_cast<size_t>(i)] = (q / dkf + k / dkf + v / dkf) / 3.0;
  }
  return out;
}

namespace {

/// Indices of the k largest keys, ties to the lower index, sorted ascending.
std::vector<int32_t> top_indices(const std::vector<double>& keys, int64_t k) {
  std::vector<int32_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    if (keys[static_cast<size_t>(a)] != keys[static_cast<size_t>(b)])
      return keys[static_cast<size_t>(a)] > keys[static_cast<size_t>(b)];
    return a < b;
  });
  order.resize(static_cast<size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

void check_k(size_t len, int64_t k) {
  SAT_REQUIRE(k >= 1 && k <= static_cast<int64_t>(len),
          "selection: k=" + std::to_string(k) + " out of range for " + std::to_string(len) +
              " scores");
}

}  // namespace

std::vector<int32_t> select_topk(std::span<const double> scores, int64_t k) {
  check_k(scores.size(), k);
  return top_indices(std::vector<double>(scores.begin(), scores.end()), k);
}

std::vector<int32_t> select_sampling(std::span<const double> scores, int64_t k, double tau,
                                     Rng& rng) {
  check_k(scores.size(), k);
  SAT_REQUIRE(tau > 0.0, "selection: temperature must be positive");
  // Gumbel-top-k: the k largest of s_i/tau + G_i are a without-replacement
  // sample from softmax(s/tau). A single pass of noise per score keeps the
  // draw deterministic for a given rng state.
  std::vector<double> keys(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) keys[i] = scores[i] / tau + rng.gumbel();
  return top_indices(keys, k);
}

std::vector<int32_t> select(std::span<const double> scores, int64_t k,
                            const SelectionStrategy& strategy, Rng& rng) {
  strategy.validate();
  if (strategy.kind == SelectionStrategy::Kind::kTopK) return select_topk(scores, k);
  return select_sampling(scores, k, strategy.tau, rng);
}

ScoringPlanSource::ScoringPlanSource(const TransformerParams& params, ImportanceMetric metric,
                                     SelectionStrategy strategy, double rate,
                                     uint64_t stream_seed)
    : params_(params), metric_(metric), strategy_(strategy), rate_(rate),
      stream_seed_(stream_seed) {
  strategy_.validate();
  SAT_REQUIRE(rate >= 0.0 && rate < 1.0, "omission rate must be in [0,1)");
  plan_.layers.resize(static_cast<size_t>(params.cfg.layers));
}

std::vector<int32_t> ScoringPlanSource::heads_for_layer(int64_t layer, const Matrix& z_qkv) {
  const ModelConfig& cfg = params_.cfg;
  const LayerParams& lp = params_.layers[static_cast<size_t>(layer)];
  const int64_t k = retained_heads(cfg, rate_);
  std::vector<int32_t> heads;
  if (k == cfg.h) {
    heads.resize(static_cast<size_t>(cfg.h));
    std::iota(heads.begin(), heads.end(), 0);
  } else {
    const std::vector<double> sq = score_columns(metric_, lp.wq, z_qkv);
    const std::vector<double> sk = score_columns(metric_, lp.wk, z_qkv);
    const std::vector<double> sv = score_columns(metric_, lp.wv, z_qkv);
    const std::vector<double> head_scores = aggregate_head_scores(sq, sk, sv, cfg.h, cfg.d_k());
    Rng rng = Rng(stream_seed_).fork(static_cast<uint64_t>(layer), 0);
    heads = select(head_scores, k, strategy_, rng);
  }
  plan_.layers[static_cast<size_t>(layer)].head_indices = heads;
  return heads;
}

std::vector<int32_t> ScoringPlanSource::channels_for_layer(int64_t layer, const Matrix& z_mlp) {
  const ModelConfig& cfg = params_.cfg;
  const LayerParams& lp = params_.layers[static_cast<size_t>(layer)];
  const int64_t k = retained_channels(cfg, rate_);
  std::vector<int32_t> channels;
  if (k == cfg.mlp_dim()) {
    channels.resize(static_cast<size_t>(cfg.mlp_dim()));
    std::iota(channels.begin(), channels.end(), 0);
  } else {
    const std::vector<double> scores = score_columns(metric_, lp.w_up, z_mlp);
    Rng rng = Rng(stream_seed_).fork(static_cast<uint64_t>(layer), 1);
    channels = select(scores, k, strategy_, rng);
  }
  plan_.layers[static_cast<size_t>(layer)].channel_indices = channels;
  return channels;
}

SparsityPlan build_plan(const TransformerParams& params, const ForwardTrace& trace,
                        ImportanceMetric metric, SelectionStrategy strategy, double rate,
                        Rng& rng) {
  SAT_REQUIRE(static_cast<int64_t>(trace.layers.size()) == params.cfg.layers,
          "build_plan: trace does not cover every layer");
  ScoringPlanSource source(params, metric, strategy, rate, rng.next_u64());
  for (int64_t l = 0; l < params.cfg.layers; ++l) {
    const LayerTrace& lt = trace.layers[static_cast<size_t>(l)];
    SAT_REQUIRE(lt.attn_input_normed.rows >= 1 && lt.mlp_input_normed.rows >= 1,
            "build_plan: trace layer inputs missing");
    source.heads_for_layer(l, lt.attn_input_normed);
    source.channels_for_layer(l, lt.mlp_input_normed);
  }
  return source.plan();
}

}  // namespace sat
