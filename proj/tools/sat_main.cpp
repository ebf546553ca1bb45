// Command-line front end: train, dump-schedule, analyze-flops,
// inspect-checkpoint. All outputs UTF-8; exit codes: 0 ok, 2 bad
// configuration, 3 training aborted, 1 other failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sat/checkpoint.hpp"
#include "sat/common.hpp"
#include "sat/config.hpp"
#include "sat/model.hpp"
#include "sat/schedule.hpp"
#include "sat/trainer.hpp"
#include "sat/util.hpp"

namespace {

namespace fs = std::filesystem;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "JSON run configuration")->required();
  cmd->add_option("--set", args.overrides,
                  "dotted-path override, e.g. --set sat.r=0.25 (repeatable)");
}

int cmd_train(const ConfigArgs& args, bool force) {
  sat::RunConfig cfg = sat::RunConfig::load(args.path, args.overrides);
  const fs::path out(cfg.io.out_dir);
  if (fs::exists(out) && !fs::is_empty(out) && !force)
    throw sat::ConfigError("out_dir '" + cfg.io.out_dir +
                           "' already has contents; pass --force to reuse it");
  sat::TrainReport report = sat::train(cfg);
  std::cerr << "done: " << report.steps.size() << " steps, final loss "
            << sat::format_double(report.final_loss) << ", measured linear savings "
            << sat::format_double(report.savings.measured_linear) << ", wall "
            << sat::format_double(static_cast<double>(report.wall_ns) * 1e-9) << "s\n";
  return 0;
}

int cmd_dump_schedule(const ConfigArgs& args) {
  sat::RunConfig cfg = sat::RunConfig::load(args.path, args.overrides);
  sat::write_schedule_csv(std::cout, cfg.lors(), cfg.lr());
  return 0;
}

int cmd_analyze_flops(const ConfigArgs& args) {
  sat::RunConfig cfg = sat::RunConfig::load(args.path, args.overrides);
  sat::ModelConfig model = cfg.model;
  if (model.vocab == 0) {
    // Vocabulary only scales the LM-head term; without reading the corpus we
    // report the byte-level upper bound.
    model.vocab = 257;
  }
  const sat::FlopsCounter dense = sat::counted_step_flops(model, cfg.train.batch_size,
                                                          cfg.train.seq_len, model.h,
                                                          model.mlp_dim());
  const sat::SavingsReport pred =
      sat::predicted_savings(cfg.lors(), model, cfg.train.batch_size, cfg.train.seq_len);
  nlohmann::ordered_json out{
      {"per_step_dense_flops",
       {{"mha_projections", dense.of(sat::FlopCat::kMhaProj)},
        {"attention", dense.of(sat::FlopCat::kAttn)},
        {"mlp", dense.of(sat::FlopCat::kMlp)},
        {"lm_head", dense.of(sat::FlopCat::kLmHead)},
        {"total", dense.total()}}},
      {"predicted_savings",
       {{"linear_layers", pred.predicted_linear}, {"total", pred.predicted_total}}},
      {"first_stage_approx", pred.first_stage_approx}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_inspect_checkpoint(const std::string& path) {
  std::cout << sat::checkpoint_manifest(path).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparsity-accelerated trainer for a small decoder-only transformer"};
  app.require_subcommand(1);

  ConfigArgs train_args;
  bool force = false;
  CLI::App* train_cmd = app.add_subcommand("train", "run training per the configuration");
  add_config_options(train_cmd, train_args);
  train_cmd->add_flag("--force", force, "reuse a non-empty out_dir");

  ConfigArgs sched_args;
  CLI::App* sched_cmd =
      app.add_subcommand("dump-schedule", "emit step,omission_rate,ladder_index,lr CSV");
  add_config_options(sched_cmd, sched_args);

  ConfigArgs flops_args;
  CLI::App* flops_cmd =
      app.add_subcommand("analyze-flops", "per-step FLOPs and schedule-implied savings, as JSON");
  add_config_options(flops_cmd, flops_args);

  std::string ckpt_path;
  CLI::App* inspect_cmd = app.add_subcommand("inspect-checkpoint", "print a checkpoint manifest");
  inspect_cmd->add_option("path", ckpt_path, "checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(train_args, force);
    if (sched_cmd->parsed()) return cmd_dump_schedule(sched_args);
    if (flops_cmd->parsed()) return cmd_analyze_flops(flops_args);
    if (inspect_cmd->parsed()) return cmd_inspect_checkpoint(ckpt_path);
  } catch (const sat::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const sat::TrainAbort& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
