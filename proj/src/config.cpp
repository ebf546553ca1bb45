#include "sat/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>

#include <nlohmann/json.hpp>

#include "sat/common.hpp"

namespace sat {

LorsConfig RunConfig::lors() const {
  return LorsConfig{sat.r, train.steps, sat.eta, sat.ladders};
}

LrConfig RunConfig::lr() const {
  return LrConfig{train.max_lr, train.warmup_steps, train.steps};
}

SelectionStrategy RunConfig::strategy() const {
  return SelectionStrategy{sat.strategy, sat.tau};
}

namespace {

using nlohmann::json;

/// Collects human-readable problems instead of stopping at the first one.
struct Problems {
  std::vector<std::string> list;
  void add(const std::string& p) { list.push_back(p); }
  void run(const std::string& where, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      add(where + ": " + e.what());
    }
  }
};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  Problems problems;

  problems.run("model", [&] {
    const json& m = j.at("model");
    cfg.model.d = m.at("d").get<int64_t>();
    cfg.model.h = m.at("h").get<int64_t>();
    cfg.model.layers = m.at("layers").get<int64_t>();
    cfg.model.max_seq = m.at("max_seq").get<int64_t>();
    const json& v = m.at("vocab");
    if (v.is_string()) {
      SAT_REQUIRE(v.get<std::string>() == "auto", "model.vocab must be an integer or \"auto\"");
      cfg.model.vocab = 0;
    } else {
      cfg.model.vocab = v.get<int64_t>();
      SAT_REQUIRE(cfg.model.vocab >= 1, "model.vocab must be >= 1");
    }
    SAT_REQUIRE(cfg.model.d >= 1 && cfg.model.h >= 1 && cfg.model.layers >= 1 &&
                cfg.model.max_seq >= 1,
            "model dimensions must be >= 1");
    SAT_REQUIRE(cfg.model.d % cfg.model.h == 0, "model.h must divide model.d");
  });

  problems.run("train", [&] {
    const json& t = j.at("train");
    cfg.train.batch_size = t.at("batch_size").get<int64_t>();
    cfg.train.seq_len = t.at("seq_len").get<int64_t>();
    cfg.train.steps = t.at("steps").get<int64_t>();
    cfg.train.seed = get_or<uint64_t>(t, "seed", 1);
    cfg.train.max_lr = get_or<double>(t, "max_lr", 3e-3);
    cfg.train.warmup_steps = get_or<int64_t>(t, "warmup_steps", 0);
    cfg.train.adam.beta1 = get_or<double>(t, "beta1", 0.9);
    cfg.train.adam.beta2 = get_or<double>(t, "beta2", 0.95);
    cfg.train.adam.eps = get_or<double>(t, "eps", 1e-8);
    cfg.train.adam.weight_decay = get_or<double>(t, "weight_decay", 0.1);
    cfg.train.clip_norm = get_or<double>(t, "clip_norm", 1.0);
    SAT_REQUIRE(cfg.train.batch_size >= 1, "train.batch_size must be >= 1");
    SAT_REQUIRE(cfg.train.seq_len >= 1, "train.seq_len must be >= 1");
    SAT_REQUIRE(cfg.train.steps >= 1, "train.steps must be >= 1");
    SAT_REQUIRE(cfg.train.clip_norm > 0.0, "train.clip_norm must be positive");
    cfg.train.adam.validate();
    cfg.lr().validate();
  });

  problems.run("train/model", [&] {
    SAT_REQUIRE(cfg.train.seq_len <= cfg.model.max_seq,
            "train.seq_len exceeds model.max_seq");
  });

  problems.run("sat", [&] {
    const json& s = j.at("sat");
    cfg.sat.enabled = get_or<bool>(s, "enabled", true);
    cfg.sat.metric = parse_metric(get_or<std::string>(s, "metric", "maxip"));
    cfg.sat.strategy = parse_strategy(get_or<std::string>(s, "strategy", "sampling"));
    cfg.sat.tau = get_or<double>(s, "tau", 0.05);
    cfg.sat.r = s.at("r").get<double>();
    cfg.sat.eta = s.at("eta").get<int64_t>();
    cfg.sat.ladders = get_or<int64_t>(s, "L", 1);
    if (cfg.sat.enabled) {
      cfg.strategy().validate();
      cfg.lors().validate();
      // Omission must leave at least one head and one channel.
      retained_heads(cfg.model, cfg.sat.r);
      retained_channels(cfg.model, cfg.sat.r);
    }
  });

  problems.run("data", [&] {
    const json& d = j.at("data");
    const bool has_path = d.contains("path");
    const bool has_synth = d.contains("synthetic");
    SAT_REQUIRE(has_path != has_synth, "data: exactly one of 'path' or 'synthetic' required");
    if (has_path) {
      cfg.data.path = d.at("path").get<std::string>();
      SAT_REQUIRE(!cfg.data.path.empty(), "data.path must not be empty");
    } else {
      const json& s = d.at("synthetic");
      SyntheticSpec spec;
      spec.pattern_len = get_or<int64_t>(s, "pattern_len", 16);
      spec.alphabet = get_or<int64_t>(s, "alphabet", 8);
      spec.noise = get_or<double>(s, "noise", 0.0);
      spec.total_tokens = get_or<int64_t>(s, "tokens", 65536);
      spec.seed = get_or<uint64_t>(s, "seed", 1);
      spec.validate();
      cfg.data.synthetic = spec;
    }
  });

  problems.run("io", [&] {
    const json& io = j.at("io");
    cfg.io.out_dir = io.at("out_dir").get<std::string>();
    cfg.io.checkpoint_every = get_or<int64_t>(io, "checkpoint_every", 0);
    cfg.io.log_every = get_or<int64_t>(io, "log_every", 50);
    SAT_REQUIRE(!cfg.io.out_dir.empty(), "io.out_dir must not be empty");
    SAT_REQUIRE(cfg.io.checkpoint_every >= 0, "io.checkpoint_every must be >= 0");
    SAT_REQUIRE(cfg.io.log_every >= 1, "io.log_every must be >= 1");
  });

  if (!problems.list.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(problems.list.size()) +
                      " problem" + (problems.list.size() == 1 ? "" : "s") + "):";
    for (const auto& p : problems.list) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return cfg;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = {{"d", model.d},
                {"h", model.h},
                {"layers", model.layers},
                {"vocab", model.vocab == 0 ? nlohmann::ordered_json("auto")
                                           : nlohmann::ordered_json(model.vocab)},
                {"max_seq", model.max_seq}};
  j["train"] = {{"batch_size", train.batch_size},
                {"seq_len", train.seq_len},
                {"steps", train.steps},
                {"seed", train.seed},
                {"max_lr", train.max_lr},
                {"warmup_steps", train.warmup_steps},
                {"beta1", train.adam.beta1},
                {"beta2", train.adam.beta2},
                {"eps", train.adam.eps},
                {"weight_decay", train.adam.weight_decay},
                {"clip_norm", train.clip_norm}};
  j["sat"] = {{"enabled", sat.enabled},
              {"metric", metric_name(sat.metric)},
              {"strategy", strategy_name(sat.strategy)},
              {"tau", sat.tau},
              {"r", sat.r},
              {"eta", sat.eta},
              {"L", sat.ladders}};
  if (data.synthetic) {
    const SyntheticSpec& s = *data.synthetic;
    j["data"] = {{"synthetic",
                  {{"pattern_len", s.pattern_len},
                   {"alphabet", s.alphabet},
                   {"noise", s.noise},
                   {"tokens", s.total_tokens},
                   {"seed", s.seed}}}};
  } else {
    j["data"] = {{"path", data.path}};
  }
  j["io"] = {{"out_dir", io.out_dir},
             {"checkpoint_every", io.checkpoint_every},
             {"log_every", io.log_every}};
  return j;
}

void apply_override(json& doc, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  SAT_REQUIRE(eq != std::string::npos && eq > 0,
          "override must look like key.path=value, got '" + assignment + "'");
  const std::string keypath = assignment.substr(0, eq);
  const std::string value_str = assignment.substr(eq + 1);

  json* node = &doc;
  size_t begin = 0;
  while (true) {
    const size_t dot = keypath.find('.', begin);
    const std::string key = keypath.substr(begin, dot == std::string::npos ? dot : dot - begin);
    SAT_REQUIRE(!key.empty(), "override key has an empty segment: '" + keypath + "'");
    if (dot == std::string::npos) {
      json value = json::parse(value_str, nullptr, false);
      if (value.is_discarded()) value = value_str;  // plain strings need no quotes
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  SAT_REQUIRE_DATA(in.is_open(), "cannot open config: " + path);
  json doc = json::parse(in, nullptr, false);
  SAT_REQUIRE_DATA(!doc.is_discarded(), "config is not valid JSON: " + path);
  for (const std::string& ov : overrides) apply_override(doc, ov);
  if (const char* env_seed = std::getenv("SAT_SEED")) {
    doc["train"]["seed"] = json::parse(env_seed, nullptr, false);
    SAT_REQUIRE(!doc["train"]["seed"].is_discarded() && doc["train"]["seed"].is_number(),
            "SAT_SEED must be an integer");
  }
  return from_json(doc);
}

}  // namespace sat
