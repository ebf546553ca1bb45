#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sat/data.hpp"
#include "sat/model.hpp"
#include "sat/optim.hpp"
#include "sat/schedule.hpp"
#include "sat/sparsity.hpp"

namespace sat {

/// Full run configuration. `model.vocab` may be 0 ("auto" in JSON): it then
/// resolves to the corpus vocabulary size at training start.
struct RunConfig {
  ModelConfig model;

  struct Train {
    int64_t batch_size = 16;
    int64_t seq_len = 64;
    int64_t steps = 1000;
    uint64_t seed = 1;
    double max_lr = 3e-3;
    int64_t warmup_steps = 100;
    AdamConfig adam;
    double clip_norm = 1.0;
  } train;

  struct Sat {
    bool enabled = true;
    ImportanceMetric metric = ImportanceMetric::kMaxip;
    SelectionStrategy::Kind strategy = SelectionStrategy::Kind::kSampling;
    double tau = 0.05;
    double r = 0.5;
    int64_t eta = 1;
    int64_t ladders = 1;
  } sat;

  struct Data {
    std::string path;  // mutually exclusive with synthetic
    std::optional<SyntheticSpec> synthetic;
  } data;

  struct Io {
    std::string out_dir = "run";
    int64_t checkpoint_every = 0;  // 0 = final checkpoint only
    int64_t log_every = 50;
  } io;

  LorsConfig lors() const;
  LrConfig lr() const;
  SelectionStrategy strategy() const;

  /// Parses and validates; a ConfigError lists every violation, not just
  /// the first.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  /// File load + dotted-path overrides ("sat.r=0.25") + SAT_SEED env
  /// override, then validation.
  static RunConfig load(const std::string& path, const std::vector<std::string>& overrides);
};

/// Applies one "a.b.c=value" override onto a JSON document. Values parse as
/// JSON when possible, else as strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace sat
