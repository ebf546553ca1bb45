#include "sat/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sat/checkpoint.hpp"
#include "sat/data.hpp"
#include "sat/numerics.hpp"
#include "sat/util.hpp"

namespace sat {

namespace {

StepResult run_step(TransformerParams& params, OptimizerState& opt, const Batch& batch,
                    PlanSource& source, const LrConfig& lr_cfg, double clip_norm, int64_t t,
                    double rate, FlopsLedger& ledger) {
  StepResult res;
  res.rate = rate;
  FlopsCounter fc;
  ForwardTrace trace;
  Matrix logits = forward_with_source(params, batch, source, &trace, &fc);
  CrossEntropyResult ce = cross_entropy(logits, batch.targets);
  if (!std::isfinite(ce.loss))
    throw TrainAbort("non-finite loss at step " + std::to_string(t) +
                     " (rate=" + format_double(rate) + ")");
  res.loss = ce.loss;
  res.plan = trace.plan;

  TransformerParams grads = sparse_backward(params, trace, ce.dlogits, trace.plan, &fc);
  clip_gradients(grads, clip_norm);
  adamw_update(params, opt, grads, trace.plan, lr_at(lr_cfg, t));

  res.executed = fc;
  res.dense = counted_step_flops(params.cfg, batch.batch, batch.seq, params.cfg.h,
                                 params.cfg.mlp_dim());
  ledger.record_step(res.executed, res.dense);
  return res;
}

class FullPlanSource final : public PlanSource {
 public:
  explicit FullPlanSource(const ModelConfig& cfg) : plan_(SparsityPlan::full(cfg)) {}
  std::vector<int32_t> heads_for_layer(int64_t layer, const Matrix&) override {
    return plan_.layers[static_cast<size_t>(layer)].head_indices;
  }
  std::vector<int32_t> channels_for_layer(int64_t layer, const Matrix&) override {
    return plan_.layers[static_cast<size_t>(layer)].channel_indices;
  }

 private:
  SparsityPlan plan_;
};

}  // namespace

StepResult sat_step(TransformerParams& params, OptimizerState& opt, const Batch& batch,
                    const StepSettings& settings, int64_t t, Rng& rng, FlopsLedger& ledger) {
  SAT_REQUIRE(t >= 1 && t <= settings.lors.total_steps, "sat_step: t outside [1, T]");
  const double rate = lors_rate(settings.lors, t);
  // One draw per step seeds the per-layer selection streams; plan draws are
  // thus independent across layers and of any other rng use.
  ScoringPlanSource source(params, settings.metric, settings.strategy, rate, rng.next_u64());
  return run_step(params, opt, batch, source, settings.lr, settings.clip_norm, t, rate, ledger);
}

StepResult dense_step(TransformerParams& params, OptimizerState& opt, const Batch& batch,
                      const LrConfig& lr_cfg, double clip_norm, int64_t t, FlopsLedger& ledger) {
  FullPlanSource source(params.cfg);
  return run_step(params, opt, batch, source, lr_cfg, clip_norm, t, 0.0, ledger);
}

SavingsReport predicted_savings(const LorsConfig& lors, const ModelConfig& cfg, int64_t batch,
                                int64_t seq) {
  lors.validate();
  SavingsReport rep;
  const FlopsCounter dense = counted_step_flops(cfg, batch, seq, cfg.h, cfg.mlp_dim());
  unsigned __int128 exec_linear = 0, exec_total = 0;
  for (int64_t t = 1; t <= lors.total_steps; ++t) {
    const double rate = lors_rate(lors, t);
    const FlopsCounter step =
        counted_step_flops(cfg, batch, seq, retained_heads(cfg, rate), retained_channels(cfg, rate));
    exec_linear += step.linear();
    exec_total += step.total();
  }
  const unsigned __int128 steps = static_cast<unsigned __int128>(lors.total_steps);
  rep.predicted_linear =
      1.0 - static_cast<double>(exec_linear) / (static_cast<double>(dense.linear()) * static_cast<double>(steps));
  rep.predicted_total =
      1.0 - static_cast<double>(exec_total) / (static_cast<double>(dense.total()) * static_cast<double>(steps));
  rep.first_stage_approx = static_cast<double>(lors.decrease_start) * lors.max_rate /
                           static_cast<double>(lors.total_steps);
  return rep;
}

SavingsReport ledger_summary(const FlopsLedger& ledger, const LorsConfig& lors,
                             const ModelConfig& cfg, int64_t batch, int64_t seq) {
  SavingsReport rep = predicted_savings(lors, cfg, batch, seq);
  rep.measured_total = ledger.savings_total();
  rep.measured_linear = ledger.savings_linear();
  return rep;
}

void write_metrics_csv(std::ostream& os, const TrainReport& report) {
  os << kMetricsHeader << '\n';
  for (const StepRecord& r : report.steps) {
    os << r.step << ',' << format_double(r.loss) << ',' << format_double(r.lr) << ','
       << format_double(r.rate) << ',' << r.executed_flops << ',' << r.dense_flops << ','
       << r.elapsed_ns << '\n';
  }
}

TrainReport train(const RunConfig& cfg_in) {
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();

  RunConfig cfg = cfg_in;

  // Corpus and vocabulary.
  std::vector<uint8_t> corpus;
  if (cfg.data.synthetic) {
    corpus = synthetic_corpus(*cfg.data.synthetic);
  } else {
    corpus = read_file_bytes(cfg.data.path);
    SAT_REQUIRE_DATA(!corpus.empty(), "corpus file is empty: " + cfg.data.path);
  }
  const CharVocab vocab = CharVocab::build(corpus);
  if (cfg.model.vocab == 0) cfg.model.vocab = vocab.size();
  SAT_REQUIRE(cfg.model.vocab >= vocab.size(),
          "model.vocab (" + std::to_string(cfg.model.vocab) + ") smaller than corpus vocabulary (" +
              std::to_string(vocab.size()) + ")");
  cfg.model.validate();

  const fs::path out_dir(cfg.io.out_dir);
  fs::create_directories(out_dir);
  {
    std::ofstream resolved(out_dir / "config.resolved.json");
    SAT_REQUIRE_DATA(resolved.is_open(), "cannot write " + (out_dir / "config.resolved.json").string());
    resolved << cfg.to_json().dump(2) << '\n';
  }

  BatchIterator batches(vocab.encode(corpus), cfg.train.batch_size, cfg.train.seq_len,
                        cfg.train.seed);
  Rng init_rng = Rng(cfg.train.seed).fork(0x696E6974ULL, 0);  // "init"
  Rng plan_rng = Rng(cfg.train.seed).fork(0x706C616EULL, 0);  // "plan"
  TransformerParams params = TransformerParams::init(cfg.model, init_rng);
  OptimizerState opt = OptimizerState::init(params, cfg.train.adam);

  StepSettings settings;
  settings.metric = cfg.sat.metric;
  settings.strategy = cfg.strategy();
  settings.lors = cfg.lors();
  settings.lr = cfg.lr();
  settings.clip_norm = cfg.train.clip_norm;

  std::ofstream metrics(out_dir / "metrics.csv");
  SAT_REQUIRE_DATA(metrics.is_open(), "cannot write " + (out_dir / "metrics.csv").string());
  metrics << kMetricsHeader << '\n';

  FlopsLedger ledger;
  TrainReport report;
  report.steps.reserve(static_cast<size_t>(cfg.train.steps));

  for (int64_t t = 1; t <= cfg.train.steps; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const Batch batch = batches.next();
    StepResult res;
    if (cfg.sat.enabled) {
      res = sat_step(params, opt, batch, settings, t, plan_rng, ledger);
    } else {
      res = dense_step(params, opt, batch, settings.lr, settings.clip_norm, t, ledger);
    }
    const auto t1 = std::chrono::steady_clock::now();
    StepRecord rec{t,
                   res.loss,
                   lr_at(settings.lr, t),
                   res.rate,
                   res.executed.total(),
                   res.dense.total(),
                   static_cast<uint64_t>(
                       std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count())};
    report.steps.push_back(rec);
    metrics << rec.step << ',' << format_double(rec.loss) << ',' << format_double(rec.lr) << ','
            << format_double(rec.rate) << ',' << rec.executed_flops << ',' << rec.dense_flops
            << ',' << rec.elapsed_ns << '\n';

    if (cfg.io.checkpoint_every > 0 && t % cfg.io.checkpoint_every == 0 && t != cfg.train.steps) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%08lld.sat", static_cast<long long>(t));
      save_checkpoint((out_dir / name).string(), params);
    }
  }

  save_checkpoint((out_dir / "ckpt_final.sat").string(), params);

  report.final_loss = report.steps.empty() ? 0.0 : report.steps.back().loss;
  if (cfg.sat.enabled) {
    report.savings =
        ledger_summary(ledger, settings.lors, cfg.model, cfg.train.batch_size, cfg.train.seq_len);
  } else {
    report.savings.measured_total = ledger.savings_total();
    report.savings.measured_linear = ledger.savings_linear();
  }
  report.wall_ns = static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                             std::chrono::steady_clock::now() - t_start)
                                             .count());

  {
    nlohmann::ordered_json summary{
        {"final_loss", report.final_loss},
        {"steps", cfg.train.steps},
        {"savings",
         {{"measured_total", report.savings.measured_total},
          {"measured_linear", report.savings.measured_linear},
          {"predicted_linear", report.savings.predicted_linear},
          {"predicted_total", report.savings.predicted_total},
          {"first_stage_approx", report.savings.first_stage_approx}}},
        {"wall_seconds", static_cast<double>(report.wall_ns) * 1e-9}};
    std::ofstream sum(out_dir / "summary.json");
    SAT_REQUIRE_DATA(sum.is_open(), "cannot write " + (out_dir / "summary.json").string());
    sum << summary.dump(2) << '\n';
  }
  return report;
}

}  // namespace sat
