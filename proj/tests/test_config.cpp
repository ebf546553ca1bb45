#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sat/config.hpp"
#include "sat/common.hpp"

using namespace sat;
using nlohmann::json;

TEST_SUITE_BEGIN("config");

namespace {

json valid_doc() {
  return json::parse(R"({
    "model": {"d": 32, "h": 4, "layers": 2, "vocab": "auto", "max_seq": 64},
    "train": {"batch_size": 8, "seq_len": 32, "steps": 100, "seed": 7,
              "max_lr": 0.003, "warmup_steps": 10},
    "sat": {"enabled": true, "metric": "maxip", "strategy": "sampling",
            "tau": 0.05, "r": 0.5, "eta": 60, "L": 3},
    "data": {"synthetic": {"pattern_len": 8, "alphabet": 6, "noise": 0.02,
             "tokens": 4096, "seed": 3}},
    "io": {"out_dir": "out", "checkpoint_every": 0, "log_every": 10}
  })");
}

}  // namespace

TEST_CASE("a valid document parses and maps onto module configs") {
  const RunConfig cfg = RunConfig::from_json(valid_doc());
  CHECK(cfg.model.vocab == 0);  // auto
  CHECK(cfg.model.d == 32);
  CHECK(cfg.sat.metric == ImportanceMetric::kMaxip);
  CHECK(cfg.sat.strategy == SelectionStrategy::Kind::kSampling);
  CHECK(cfg.lors().max_rate == 0.5);
  CHECK(cfg.lors().decrease_start == 60);
  CHECK(cfg.lors().total_steps == 100);
  CHECK(cfg.lr().warmup_steps == 10);
  CHECK(cfg.train.adam.beta1 == 0.9);  // default
  CHECK(cfg.data.synthetic->alphabet == 6);
}

TEST_CASE("rejection lists every violation, not just the first") {
  json doc = valid_doc();
  doc["model"]["d"] = 30;           // h does not divide d
  doc["sat"]["r"] = 1.5;            // out of range
  doc["train"]["seq_len"] = 128;    // exceeds max_seq
  doc["io"]["log_every"] = 0;       // must be >= 1
  try {
    (void)RunConfig::from_json(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("4 problems") != std::string::npos);
    CHECK(msg.find("divide") != std::string::npos);
    CHECK(msg.find("omission rate") != std::string::npos);
    CHECK(msg.find("seq_len") != std::string::npos);
    CHECK(msg.find("log_every") != std::string::npos);
  }
}

TEST_CASE("omission rates that floor a dimension to zero are config errors") {
  json doc = valid_doc();
  doc["sat"]["r"] = 0.9;  // floor(4 * 0.1) = 0 heads
  CHECK_THROWS_AS((void)RunConfig::from_json(doc), ConfigError);
  doc["sat"]["r"] = 0.9;
  doc["sat"]["enabled"] = false;  // disabled sat skips those checks
  (void)RunConfig::from_json(doc);
}

TEST_CASE("data section wants exactly one source") {
  json doc = valid_doc();
  doc["data"]["path"] = "corpus.txt";  // now both
  CHECK_THROWS_AS((void)RunConfig::from_json(doc), ConfigError);
  doc["data"].erase("synthetic");
  (void)RunConfig::from_json(doc);
  doc["data"].erase("path");
  CHECK_THROWS_AS((void)RunConfig::from_json(doc), ConfigError);
}

TEST_CASE("dotted-path overrides") {
  json doc = valid_doc();
  apply_override(doc, "sat.r=0.25");
  apply_override(doc, "model.vocab=11");
  apply_override(doc, "io.out_dir=elsewhere");
  apply_override(doc, "sat.enabled=false");
  const RunConfig cfg = RunConfig::from_json(doc);
  CHECK(cfg.sat.r == 0.25);
  CHECK(cfg.model.vocab == 11);
  CHECK(cfg.io.out_dir == "elsewhere");
  CHECK(cfg.sat.enabled == false);

  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "=5"), ConfigError);

  // Overrides are re-validated.
  apply_override(doc, "sat.enabled=true");
  apply_override(doc, "sat.r=2.0");
  CHECK_THROWS_AS((void)RunConfig::from_json(doc), ConfigError);
}

TEST_CASE("resolved JSON round-trips through from_json") {
  const RunConfig cfg = RunConfig::from_json(valid_doc());
  const RunConfig again = RunConfig::from_json(json::parse(cfg.to_json().dump()));
  CHECK(again.to_json() == cfg.to_json());
}

TEST_CASE("load applies file, overrides, and SAT_SEED") {
  const auto path = std::filesystem::temp_directory_path() / "sat_test_config.json";
  {
    std::ofstream os(path);
    os << valid_doc().dump();
  }
  const RunConfig base = RunConfig::load(path.string(), {});
  CHECK(base.train.seed == 7);

  const RunConfig overridden = RunConfig::load(path.string(), {"train.seed=99", "sat.L=1"});
  CHECK(overridden.train.seed == 99);
  CHECK(overridden.sat.ladders == 1);

  setenv("SAT_SEED", "1234", 1);
  const RunConfig env_cfg = RunConfig::load(path.string(), {"train.seed=99"});
  unsetenv("SAT_SEED");
  CHECK(env_cfg.train.seed == 1234);  // env wins over file and --set

  CHECK_THROWS_AS((void)RunConfig::load("/nonexistent/cfg.json", {}), DataError);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
