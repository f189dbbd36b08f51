// nrt/src/config.cc

// Copyright 2026  The noisy-rnnt Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "nrt/config.h"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace nrt {

namespace {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(const std::string &key, const std::string &value, const char *want) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + want);
}

std::string Format(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string Format(std::size_t v) { return std::to_string(v); }
std::string Format(std::int64_t v) { return std::to_string(v); }
std::string Format(int v) { return std::to_string(v); }
std::string Format(bool v) { return v ? "true" : "false"; }
std::string Format(const std::string &v) { return v; }
std::string Format(const ComponentSet &v) {
  if (v.empty()) return "none";
  std::string out;
  for (Component c : v) out += (out.empty() ? "" : ",") + std::string(ComponentName(c));
  return out;
}
std::string Format(const std::vector<double> &v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + Format(x);
  return out;
}

template <typename T>
void ParseNumber(const std::string &key, const std::string &s, T &out, const char *want) {
  T v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) BadValue(key, s, want);
  out = v;
}
void Parse(const std::string &k, const std::string &s, double &o) { ParseNumber(k, s, o, "a number"); }
void Parse(const std::string &k, const std::string &s, std::size_t &o) {
  ParseNumber(k, s, o, "a non-negative integer");
}
void Parse(const std::string &k, const std::string &s, std::int64_t &o) {
  ParseNumber(k, s, o, "an integer");
}
void Parse(const std::string &k, const std::string &s, int &o) { ParseNumber(k, s, o, "an integer"); }
void Parse(const std::string &k, const std::string &s, bool &o) {
  if (s == "true" || s == "1") {
    o = true;
  } else if (s == "false" || s == "0") {
    o = false;
  } else {
    BadValue(k, s, "true/false");
  }
}
void Parse(const std::string &, const std::string &s, std::string &o) { o = s; }
void Parse(const std::string &k, const std::string &s, ComponentSet &o) {
  ComponentSet out;
  if (s == "all") {
    out = AllComponents();
  } else if (s != "none") {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto c = ParseComponent(Trim(item));
      if (!c) BadValue(k, s, "a list of encoder,predictor,joiner (or all/none)");
      out.insert(*c);
    }
  }
  o = out;
}
void Parse(const std::string &k, const std::string &s, std::vector<double> &o) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    Parse(k, Trim(item), v);
    out.push_back(v);
  }
  if (out.empty()) BadValue(k, s, "a comma-separated list of numbers");
  o = out;
}

struct Binding {
  std::string key;
  std::function<std::string(const TrainConfig &)> get;
  std::function<void(TrainConfig &, const std::string &)> set;
};

template <typename Access>
Binding Field(std::string key, Access access) {
  Binding b;
  b.key = key;
  b.get = [access](const TrainConfig &c) {
    TrainConfig copy = c;
    return Format(access(copy));
  };
  b.set = [access, key](TrainConfig &c, const std::string &v) { Parse(key, v, access(c)); };
  return b;
}

#define NRT_FIELD(key, expr) Field(key, [](TrainConfig &c) -> auto & { return c.expr; })

const std::vector<Binding> &Bindings() {
  static const std::vector<Binding> bindings = [] {
    std::vector<Binding> b = {
        NRT_FIELD("model.preset", preset),
        NRT_FIELD("encoder.input_dim", model.encoder.input_dim),
        NRT_FIELD("encoder.layers", model.encoder.num_layers),
        NRT_FIELD("encoder.model_dim", model.encoder.model_dim),
        NRT_FIELD("encoder.heads", model.encoder.num_heads),
        NRT_FIELD("encoder.ffn_dim", model.encoder.ffn_dim),
        NRT_FIELD("encoder.output_dim", model.encoder.output_dim),
        NRT_FIELD("encoder.segment_length", model.encoder.segment_length),
        NRT_FIELD("encoder.right_context_segments", model.encoder.right_context_segments),
        NRT_FIELD("encoder.left_context_segments", model.encoder.left_context_segments),
        NRT_FIELD("encoder.dropout", model.encoder.dropout),
        NRT_FIELD("encoder.memory_bank", model.encoder.use_memory_bank),
        NRT_FIELD("predictor.vocab_size", model.predictor.vocab_size),
        NRT_FIELD("predictor.embed_dim", model.predictor.embed_dim),
        NRT_FIELD("predictor.layers", model.predictor.lstm_layers),
        NRT_FIELD("predictor.hidden_dim", model.predictor.hidden_dim),
        NRT_FIELD("predictor.output_dim", model.predictor.output_dim),
        NRT_FIELD("predictor.dropout", model.predictor.dropout),
        NRT_FIELD("joiner.dim", model.joiner.joint_dim),
        NRT_FIELD("noise.alpha", noise.alpha),
        NRT_FIELD("noise.targets", noise.targets),
        NRT_FIELD("noise.lambda", noise.lambda),
        NRT_FIELD("noise.logit_std", noise.logit_std),
        NRT_FIELD("noise.seed", noise.seed),
        NRT_FIELD("noise.matrices_only", noise.matrices_only),
        NRT_FIELD("prune.target", prune.final_sparsity),
        NRT_FIELD("prune.t0", prune.t0),
        NRT_FIELD("prune.n", prune.num_updates),
        NRT_FIELD("prune.delta_t", prune.delta_t),
        NRT_FIELD("optimizer.kind", optimizer.kind),
        NRT_FIELD("optimizer.lr", optimizer.learning_rate),
        NRT_FIELD("optimizer.momentum", optimizer.momentum),
        NRT_FIELD("optimizer.beta1", optimizer.beta1),
        NRT_FIELD("optimizer.beta2", optimizer.beta2),
        NRT_FIELD("optimizer.epsilon", optimizer.epsilon),
        NRT_FIELD("optimizer.clip_norm", optimizer.clip_norm),
        NRT_FIELD("loss.restrict_alignment", loss.restrict_alignment),
        NRT_FIELD("loss.left_buffer", loss.left_buffer),
        NRT_FIELD("loss.right_buffer", loss.right_buffer),
        NRT_FIELD("train.steps", train.steps),
        NRT_FIELD("train.batch_size", train.batch_size),
        NRT_FIELD("train.seed", train.seed),
        NRT_FIELD("train.checkpoint_every", train.checkpoint_every),
        NRT_FIELD("train.max_symbols", train.max_symbols),
        NRT_FIELD("train.eval_train_limit", train.eval_train_limit),
        NRT_FIELD("train.eval_every_epochs", train.eval_every_epochs),
        NRT_FIELD("train.max_nonfinite_steps", train.max_nonfinite_steps),
        NRT_FIELD("data.source", data.source),
        NRT_FIELD("data.dir", data.dir),
        NRT_FIELD("data.task", data.task.kind),
        NRT_FIELD("data.vocab_size", data.task.vocab_size),
        NRT_FIELD("data.min_length", data.task.min_length),
        NRT_FIELD("data.max_length", data.task.max_length),
        NRT_FIELD("data.frames_per_token", data.task.frames_per_token),
        NRT_FIELD("data.delay", data.task.delay),
        NRT_FIELD("data.feature_dim", data.task.feature_dim),
        NRT_FIELD("data.feature_noise", data.task.feature_noise),
        NRT_FIELD("data.template_scale", data.task.template_scale),
        NRT_FIELD("data.template_seed", data.task.template_seed),
        NRT_FIELD("data.allow_repeats", data.task.allow_repeats),
        NRT_FIELD("data.train_size", data.train_size),
        NRT_FIELD("data.valid_size", data.valid_size),
        NRT_FIELD("data.seed", data.seed),
        NRT_FIELD("augment.speed_perturb", data.speed_perturb),
        NRT_FIELD("augment.specaugment", data.specaugment),
        NRT_FIELD("augment.freq_mask", data.specaug.freq_mask_param),
        NRT_FIELD("augment.freq_masks", data.specaug.num_freq_masks),
        NRT_FIELD("augment.time_masks", data.specaug.num_time_masks),
        NRT_FIELD("augment.time_ratio", data.specaug.max_time_mask_ratio),
        NRT_FIELD("output.dir", output_dir),
    };
    Binding block;
    block.key = "prune.block";
    block.get = [](const TrainConfig &c) {
      return std::to_string(c.prune.block_rows) + "x" + std::to_string(c.prune.block_cols);
    };
    block.set = [](TrainConfig &c, const std::string &v) {
      ParseBlockShape(v, c.prune.block_rows, c.prune.block_cols);
    };
    b.insert(b.begin() + 29, block);
    return b;
  }();
  return bindings;
}

#undef NRT_FIELD

const Binding &FindBinding(const std::string &key) {
  for (const auto &b : Bindings())
    if (b.key == key) return b;
  throw ConfigError("unknown config key '" + key + "'");
}

void ApplyPreset(TrainConfig &cfg, const std::string &name) {
  if (name == "desk") {
    cfg.model = DeskModel();
  } else if (name == "large") {
    cfg.model = ModelConfig::LargePreset();
    cfg.data.task.feature_dim = cfg.model.encoder.input_dim;
  } else {
    throw ConfigError("model.preset must be desk or large, got '" + name + "'");
  }
  cfg.preset = name;
}

std::pair<std::string, std::string> SplitAssignment(const std::string &line,
                                                    const std::string &where) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError(where + ": expected key = value, got '" + line + "'");
  std::string key = Trim(line.substr(0, eq)), value = Trim(line.substr(eq + 1));
  if (key.empty()) throw ConfigError(where + ": empty key");
  return {key, value};
}

}  // namespace

ModelConfig DeskModel() {
  ModelConfig m;
  m.encoder.input_dim = 80;
  m.encoder.num_layers = 2;
  m.encoder.model_dim = 64;
  m.encoder.num_heads = 4;
  m.encoder.ffn_dim = 256;
  m.encoder.output_dim = 64;
  m.encoder.segment_length = 4;
  m.predictor.vocab_size = 8;
  m.predictor.embed_dim = 32;
  m.predictor.hidden_dim = 64;
  m.predictor.output_dim = 64;
  m.joiner.joint_dim = 64;
  return m;
}

TrainConfig::TrainConfig() : model(DeskModel()) {
  optimizer.kind = "adam";
  optimizer.learning_rate = 0.003;
}

void TrainConfig::Validate() const {
  if (preset != "desk" && preset != "large") throw ConfigError("model.preset must be desk or large");
  model.Validate();
  noise.Validate();
  prune.Validate();
  optimizer.Validate();
  if (train.steps <= 0) throw ConfigError("train.steps must be positive");
  if (train.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (train.max_symbols == 0) throw ConfigError("train.max_symbols must be positive");
  if (train.checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  if (train.eval_every_epochs <= 0) throw ConfigError("train.eval_every_epochs must be positive");
  if (train.max_nonfinite_steps <= 0) throw ConfigError("train.max_nonfinite_steps must be positive");
  if (data.source == "synthetic") {
    data.task.Validate();
    if (data.train_size == 0 || data.valid_size == 0) {
      throw ConfigError("data.train_size and data.valid_size must be positive");
    }
    if (data.task.feature_dim != model.encoder.input_dim) {
      throw ConfigError("data.feature_dim (" + std::to_string(data.task.feature_dim) +
                        ") != encoder.input_dim (" + std::to_string(model.encoder.input_dim) + ")");
    }
    if (data.task.vocab_size != model.predictor.vocab_size) {
      throw ConfigError("data.vocab_size (" + std::to_string(data.task.vocab_size) +
                        ") != predictor.vocab_size (" +
                        std::to_string(model.predictor.vocab_size) + ")");
    }
  } else if (data.source == "manifest") {
    if (data.dir.empty()) throw ConfigError("data.dir is required for the manifest source");
  } else {
    throw ConfigError("data.source must be synthetic or manifest, got '" + data.source + "'");
  }
  for (double s : data.speed_perturb)
    if (!(s > 0.0)) throw ConfigError("augment.speed_perturb factors must be positive");
  if (data.specaugment) data.specaug.Validate(model.encoder.input_dim);
}

TrainConfig ParseConfig(const std::string &text, const std::vector<std::string> &overrides) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    entries.push_back(SplitAssignment(line, "config line " + std::to_string(lineno)));
  }
  for (const auto &o : overrides) entries.push_back(SplitAssignment(o, "override"));

  TrainConfig cfg;
  for (const auto &[k, v] : entries) FindBinding(k);
  std::string preset;
  for (const auto &[k, v] : entries)
    if (k == "model.preset") preset = v;
  if (!preset.empty()) ApplyPreset(cfg, preset);
  for (const auto &[k, v] : entries)
    if (k != "model.preset") FindBinding(k).set(cfg, v);
  cfg.Validate();
  return cfg;
}

TrainConfig LoadConfig(const std::string &path, const std::vector<std::string> &overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), overrides);
}

std::string ConfigToText(const TrainConfig &cfg) {
  std::string out;
  for (const auto &b : Bindings()) out += b.key + " = " + b.get(cfg) + "\n";
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto &b : Bindings()) keys.push_back(b.key);
  return keys;
}

std::uint64_t Fnv1a(const std::string &bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ConfigDigest(const TrainConfig &cfg) {
  TrainConfig copy = cfg;
  copy.output_dir.clear();
  return Fnv1a(ConfigToText(copy));
}

std::string ResolveOutputDir(const TrainConfig &cfg) {
  const char *env = std::getenv(kOutputDirEnv);
  if (env && *env) return env;
  return cfg.output_dir;
}

}  // namespace nrt
