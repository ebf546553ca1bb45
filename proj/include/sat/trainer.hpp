#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sat/batch.hpp"
#include "sat/config.hpp"
#include "sat/flops.hpp"
#include "sat/model.hpp"
#include "sat/optim.hpp"
#include "sat/rng.hpp"
#include "sat/schedule.hpp"
#include "sat/sparsity.hpp"

namespace sat {

struct StepSettings {
  ImportanceMetric metric = ImportanceMetric::kMaxip;
  SelectionStrategy strategy = SelectionStrategy::sampling(0.05);
  LorsConfig lors;
  LrConfig lr;
  double clip_norm = 1.0;
};

struct StepResult {
  double loss = 0.0;
  double rate = 0.0;       // omission rate applied this step
  SparsityPlan plan;       // what was selected
  FlopsCounter executed;   // counted matmul FLOPs of this step
  FlopsCounter dense;      // hypothetical dense cost of the same batch
};

/// One SAT iteration: draw the plan at this step's omission rate, run the
/// sparse forward/backward, clip, and apply the masked optimizer update.
/// Unselected slices and their moments are bit-identical before and after.
StepResult sat_step(TransformerParams& params, OptimizerState& opt, const Batch& batch,
                    const StepSettings& settings, int64_t t, Rng& rng, FlopsLedger& ledger);

/// Standard dense AdamW step; the equivalence and loss-comparison baseline.
StepResult dense_step(TransformerParams& params, OptimizerState& opt, const Batch& batch,
                      const LrConfig& lr_cfg, double clip_norm, int64_t t, FlopsLedger& ledger);

struct StepRecord {
  int64_t step;
  double loss;
  double lr;
  double rate;
  uint64_t executed_flops;
  uint64_t dense_flops;
  uint64_t elapsed_ns;
};

struct SavingsReport {
  double measured_total = 0.0;      // 1 - executed/dense, all categories
  double measured_linear = 0.0;     // restricted to projections + MLP
  double predicted_linear = 0.0;    // from the LORS trajectory, exact floors
  double predicted_total = 0.0;
  double first_stage_approx = 0.0;  // eta*r/T
};

struct TrainReport {
  std::vector<StepRecord> steps;
  double final_loss = 0.0;
  SavingsReport savings;
  uint64_t wall_ns = 0;
};

/// Measured savings from a finished run alongside the schedule-implied
/// prediction and the eta*r/T first-stage approximation.
SavingsReport ledger_summary(const FlopsLedger& ledger, const LorsConfig& lors,
                             const ModelConfig& cfg, int64_t batch, int64_t seq);

/// Schedule-implied savings without running: per-step retained counts from
/// the LORS trajectory, exact integer FLOPs formulas.
SavingsReport predicted_savings(const LorsConfig& lors, const ModelConfig& cfg, int64_t batch,
                                int64_t seq);

inline constexpr const char* kMetricsHeader =
    "step,loss,lr,omission_rate,sparse_flops,dense_flops,elapsed_ns";

/// Full training run: resolves the corpus and vocab, trains for
/// train.steps, streams metrics CSV, writes checkpoints and a final
/// summary into io.out_dir. Deterministic given the seed (elapsed_ns
/// excepted; it is wall time).
TrainReport train(const RunConfig& cfg);

void write_metrics_csv(std::ostream& os, const TrainReport& report);

}  // namespace sat
