// nrt/src/harness.cc

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

#include "nrt/harness.h"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nrt/checkpoint.h"
#include "nrt/linalg.h"
#include "nrt/scoring.h"
#include "nrt/training.h"

namespace nrt {

namespace fs = std::filesystem;

namespace {

// Stream ids split from the training seed.
constexpr std::uint64_t kOrderStream = 11, kStepStream = 12;

std::vector<std::size_t> Permutation(std::size_t n, RngStream rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.UniformInt(0, i - 1)]);
  return p;
}

void CheckFeatureDims(const std::vector<Example> &examples, std::size_t dim) {
  for (const auto &ex : examples) {
    if (ex.features.dim() != 2 || ex.features.cols() != dim) {
      throw DataError("utterance " + ex.id + " has " +
                      std::to_string(ex.features.dim() == 2 ? ex.features.cols() : 0) +
                      " feature channels, encoder expects " + std::to_string(dim));
    }
  }
}

void WriteLines(const fs::path &path, const std::vector<std::string> &lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto &l : lines) out << l << '\n';
}

void WriteCurve(const fs::path &path, const std::vector<MetricRecord> &metrics,
                const std::string &split) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# step\tloss\n";
  out.precision(10);
  for (const auto &m : metrics)
    if (m.split == split) out << m.step << '\t' << m.loss << '\n';
}

// Seconds recorded at the last evaluation point no later than `step`.
double ElapsedAt(const fs::path &timing, std::int64_t step) {
  std::ifstream in(timing);
  double elapsed = 0.0, seconds;
  std::int64_t at;
  while (in >> at >> seconds)
    if (at <= step) elapsed = seconds;
  return elapsed;
}

// Drops timing rows past `step` (all of them for a fresh run).
void TruncateTiming(const fs::path &timing, std::int64_t step) {
  std::vector<std::string> kept;
  std::ifstream in(timing);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::int64_t at;
    if (ls >> at && at <= step) kept.push_back(line);
  }
  in.close();
  WriteLines(timing, kept);
}

}  // namespace

Dataset LoadDataset(const TrainConfig &cfg) {
  Dataset d;
  if (cfg.data.source == "synthetic") {
    d.vocab = SyntheticVocabulary(cfg.data.task.vocab_size);
    const RngStream root(cfg.data.seed);
    RngStream train_rng = root.Split(1), valid_rng = root.Split(2);
    d.train = GenerateSyntheticCorpus(cfg.data.task, cfg.data.train_size, train_rng, "train");
    d.valid = GenerateSyntheticCorpus(cfg.data.task, cfg.data.valid_size, valid_rng, "valid");
  } else {
    const fs::path dir(cfg.data.dir);
    d.vocab = Vocabulary::Read((dir / "vocab.txt").string());
    d.train = LoadManifest((dir / "train.tsv").string(), d.vocab, cfg.data.speed_perturb);
    d.valid = LoadManifest((dir / "valid.tsv").string(), d.vocab);
  }
  if (d.vocab.size() != cfg.model.predictor.vocab_size) {
    throw ConfigError("vocabulary has " + std::to_string(d.vocab.size()) +
                      " tokens, predictor.vocab_size is " +
                      std::to_string(cfg.model.predictor.vocab_size));
  }
  CheckFeatureDims(d.train, cfg.model.encoder.input_dim);
  CheckFeatureDims(d.valid, cfg.model.encoder.input_dim);
  return d;
}

EvalResult Evaluate(const std::vector<Example> &examples, const ModelParams &params,
                    const ModelConfig &model, const Vocabulary &vocab, std::size_t max_symbols,
                    std::size_t limit) {
  const std::size_t n = limit > 0 ? std::min(limit, examples.size()) : examples.size();
  if (n == 0) throw DataError("nothing to evaluate");
  Tape::NoGrad no_grad;
  EvalResult r;
  ErrorCounts tokens, words;
  for (std::size_t i = 0; i < n; ++i) {
    const Example &ex = examples[i];
    r.loss += UtteranceLoss(ex, params, model, Mode::kEval).item();
    const auto hyp = GreedyDecodeUtterance(ex.features, params, model, max_symbols);
    tokens += AlignSequences(ex.labels, hyp);
    words += AlignSequences(TokensToWords(ex.labels, vocab), TokensToWords(hyp, vocab));
  }
  r.loss /= static_cast<double>(n);
  r.ter = tokens.rate();
  r.wer = words.rate();
  r.utterances = n;
  return r;
}

nlohmann::json MetricRecord::ToJson() const {
  return {{"step", step}, {"epoch", epoch}, {"split", split}, {"loss", loss},
          {"ter", ter},   {"wer", wer},     {"sparsity", sparsity}, {"alpha", alpha}};
}

MetricRecord MetricRecord::FromJson(const nlohmann::json &j) {
  MetricRecord m;
  m.step = j.at("step").get<std::int64_t>();
  m.epoch = j.at("epoch").get<std::int64_t>();
  m.split = j.at("split").get<std::string>();
  m.loss = j.at("loss").get<double>();
  m.ter = j.at("ter").get<double>();
  m.wer = j.at("wer").get<double>();
  m.sparsity = j.at("sparsity").get<double>();
  m.alpha = j.at("alpha").get<double>();
  return m;
}

RunResult Train(const TrainConfig &cfg, const TrainOptions &opts) {
  cfg.Validate();
  const std::uint64_t digest = ConfigDigest(cfg);
  const fs::path out_dir(ResolveOutputDir(cfg));
  // Checkpoints carry the config without its output location so that runs
  // written to different directories stay byte-identical.
  TrainConfig stored = cfg;
  stored.output_dir.clear();
  const std::string stored_text = ConfigToText(stored);
  Dataset data = LoadDataset(cfg);

  ModelParams params = InitModel(cfg.model, cfg.train.seed);
  MaskSet masks;
  if (cfg.prune.enabled()) masks = MaskSet(params, cfg.prune.block_rows, cfg.prune.block_cols);
  const MaskSet *mask_ptr = masks.empty() ? nullptr : &masks;
  Optimizer opt(cfg.optimizer);

  RunResult run;
  run.output_dir = out_dir.string();
  run.vocab = data.vocab;
  std::int64_t step = 0, streak = 0;
  bool have_best = false;
  std::vector<std::string> prune_lines;
  ModelParams best_params = params.Clone();

  if (!opts.resume_from.empty()) {
    const Checkpoint ck = ReadCheckpoint(opts.resume_from);
    if (ck.config_digest != digest) {
      throw CheckpointError("checkpoint " + opts.resume_from +
                            " was written under a different configuration");
    }
    try {
      const auto &s = ck.state;
      if (s.at("vocab").get<std::vector<std::string>>() != data.vocab.tokens()) {
        throw CheckpointError("checkpoint vocabulary differs from the dataset vocabulary");
      }
      LoadParams(ck, params);
      if (!masks.empty()) {
        LoadMasks(ck, masks);
        masks.set_target(s.at("mask_target").get<double>());
      }
      opt.set_state(ck.optimizer, s.at("optimizer_steps").get<std::int64_t>());
      step = s.at("step").get<std::int64_t>();
      streak = s.at("nonfinite_streak").get<std::int64_t>();
      run.skipped_steps = s.at("skipped_steps").get<std::int64_t>();
      have_best = !s.at("best_valid_loss").is_null();
      if (have_best) {
        run.best_valid_loss = s.at("best_valid_loss").get<double>();
        run.best_step = s.at("best_step").get<std::int64_t>();
      }
      for (const auto &m : s.at("metrics")) run.metrics.push_back(MetricRecord::FromJson(m));
      prune_lines = s.at("prune_reports").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception &e) {
      throw CheckpointError("checkpoint " + opts.resume_from + " has incomplete state: " + e.what());
    }
    best_params = params.Clone();
    const fs::path best_path = fs::path(opts.resume_from).parent_path() / "best.ckpt";
    if (have_best && fs::exists(best_path)) {
      const Checkpoint best = ReadCheckpoint(best_path.string());
      if (best.config_digest == digest && best.state.value("step", std::int64_t{-1}) == run.best_step) {
        LoadParams(best, best_params);
      }
    }
    spdlog::info("resumed from {} at step {}", opts.resume_from, step);
  }

  const std::size_t N = data.train.size();
  const std::size_t B = std::min(cfg.train.batch_size, N);
  const std::int64_t steps_per_epoch = static_cast<std::int64_t>((N + B - 1) / B);
  const RngStream order_root = RngStream(cfg.train.seed).Split(kOrderStream);
  const RngStream step_root = RngStream(cfg.train.seed).Split(kStepStream);
  const RngStream noise_root(cfg.noise.seed);

  if (opts.write_files) {
    fs::create_directories(out_dir);
    std::ofstream(out_dir / "config.txt", std::ios::trunc) << ConfigToText(cfg);
    WriteLines(out_dir / "metrics.jsonl", [&] {
      std::vector<std::string> l;
      for (const auto &m : run.metrics) l.push_back(m.ToJson().dump());
      return l;
    }());
    WriteLines(out_dir / "prune.jsonl", prune_lines);
    TruncateTiming(out_dir / "timing.tsv", step);
  }

  auto state_json = [&](std::int64_t at_step) {
    nlohmann::json s;
    s["step"] = at_step;
    s["epoch"] = at_step / steps_per_epoch;
    s["nonfinite_streak"] = streak;
    s["skipped_steps"] = run.skipped_steps;
    s["best_valid_loss"] = have_best ? nlohmann::json(run.best_valid_loss) : nlohmann::json(nullptr);
    s["best_step"] = run.best_step;
    s["mask_target"] = masks.target();
    s["optimizer_steps"] = opt.steps();
    s["vocab"] = data.vocab.tokens();
    s["prune_reports"] = prune_lines;
    s["metrics"] = nlohmann::json::array();
    for (const auto &m : run.metrics) s["metrics"].push_back(m.ToJson());
    return s;
  };
  auto save = [&](const std::string &file, const ModelParams &weights, std::int64_t at_step) {
    if (!opts.write_files) return;
    Checkpoint ck;
    ck.config_digest = digest;
    ck.config_text = stored_text;
    StoreParams(weights, ck);
    StoreMasks(masks, ck);
    ck.optimizer = opt.state();
    ck.state = state_json(at_step);
    WriteCheckpoint((out_dir / file).string(), ck);
  };

  const auto started = std::chrono::steady_clock::now();
  double elapsed_before = 0.0;
  if (!opts.resume_from.empty()) elapsed_before = ElapsedAt(out_dir / "timing.tsv", step);
  auto wall_clock = [&] {
    return elapsed_before + std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  std::vector<std::size_t> order;
  std::int64_t order_epoch = -1;
  while (step < cfg.train.steps) {
    if (opts.stop_after >= 0 && step >= opts.stop_after) break;
    const std::int64_t epoch = step / steps_per_epoch;
    const std::size_t pos = static_cast<std::size_t>(step % steps_per_epoch);
    if (epoch != order_epoch) {
      order = Permutation(N, order_root.Split(static_cast<std::uint64_t>(epoch)));
      order_epoch = epoch;
    }
    const RngStream step_rng = step_root.Split(static_cast<std::uint64_t>(step));
    const RngStream noise_rng = noise_root.Split(static_cast<std::uint64_t>(step));

    std::vector<Example> augmented;
    std::vector<const Example *> batch;
    for (std::size_t i = pos * B; i < std::min(N, (pos + 1) * B); ++i) batch.push_back(&data.train[order[i]]);
    if (cfg.data.specaugment) {
      augmented.reserve(batch.size());
      for (std::size_t b = 0; b < batch.size(); ++b) {
        RngStream aug_rng = step_rng.Split(500 + b);
        Example ex = *batch[b];
        FeatureMatrix fm;
        fm.frames = ex.features;
        ex.features = SpecAugment(fm, cfg.data.specaug, aug_rng).frames;
        augmented.push_back(std::move(ex));
      }
      for (std::size_t b = 0; b < batch.size(); ++b) batch[b] = &augmented[b];
    }

    if (opts.on_batch) {
      std::vector<std::string> ids;
      for (const auto *ex : batch) ids.push_back(ex->id);
      opts.on_batch(step + 1, ids);
    }
    ModelConfig model = cfg.model;
    if (!masks.empty()) model.encoder.dropout = ScaledDropout(cfg.model.encoder.dropout, masks.target());

    try {
      const StepResult r =
          NoisyTrainingStep(batch, params, model, cfg.noise, cfg.loss, opt, mask_ptr, step_rng, &noise_rng);
      streak = 0;
      if (opts.on_step) opts.on_step(step + 1, r.loss);
    } catch (const NumericError &e) {
      ++streak;
      ++run.skipped_steps;
      spdlog::warn("step {} skipped: {}", step + 1, e.what());
      if (streak >= cfg.train.max_nonfinite_steps) {
        if (opts.write_files) {
          nlohmann::json diag = state_json(step);
          diag.erase("metrics");
          diag["error"] = e.what();
          diag["batch"] = nlohmann::json::array();
          for (const auto *ex : batch) diag["batch"].push_back(ex->id);
          std::ofstream(out_dir / "diagnostic.json", std::ios::trunc) << diag.dump(2) << '\n';
        }
        throw NumericError("aborting after " + std::to_string(streak) +
                           " consecutive non-finite steps (last at step " + std::to_string(step + 1) +
                           "): " + e.what());
      }
    }
    ++step;

    if (!masks.empty() && cfg.prune.IsUpdateStep(step)) {
      masks.Update(params, ScheduleSparsity(step, cfg.prune));
      masks.Apply(params);
      const std::string report = masks.Report(step).ToJson();
      spdlog::info("{}", report);
      prune_lines.push_back(report);
      if (opts.write_files) std::ofstream(out_dir / "prune.jsonl", std::ios::app) << report << '\n';
    }

    if (step % (steps_per_epoch * cfg.train.eval_every_epochs) == 0 || step == cfg.train.steps) {
      const double sparsity = masks.empty() ? 0.0 : masks.GlobalSparsity();
      const std::int64_t ep = (step - 1) / steps_per_epoch;
      const EvalResult tr = Evaluate(data.train, params, cfg.model, data.vocab, cfg.train.max_symbols,
                                     cfg.train.eval_train_limit);
      const EvalResult va = Evaluate(data.valid, params, cfg.model, data.vocab, cfg.train.max_symbols);
      for (const auto &[split, e] : {std::pair{"train", tr}, std::pair{"valid", va}}) {
        MetricRecord m{step, ep, split, e.loss, e.ter, e.wer, sparsity, cfg.noise.alpha};
        run.metrics.push_back(m);
        if (opts.write_files) std::ofstream(out_dir / "metrics.jsonl", std::ios::app) << m.ToJson().dump() << '\n';
      }
      if (opts.write_files) {
        std::ofstream(out_dir / "timing.tsv", std::ios::app) << step << '\t' << wall_clock() << '\n';
      }
      spdlog::info("step {} epoch {}: train loss {:.4f} ter {:.4f} | valid loss {:.4f} ter {:.4f} wer {:.4f}",
                   step, ep, tr.loss, tr.ter, va.loss, va.ter, va.wer);
      if (!have_best || va.loss < run.best_valid_loss) {
        have_best = true;
        run.best_valid_loss = va.loss;
        run.best_step = step;
        best_params = params.Clone();
        save("best.ckpt", params, step);
      }
      save("last.ckpt", params, step);
    }
    if (cfg.train.checkpoint_every > 0 && step % cfg.train.checkpoint_every == 0) {
      save("step-" + std::to_string(step) + ".ckpt", params, step);
      save("last.ckpt", params, step);
    }
  }
  if (step < cfg.train.steps) save("last.ckpt", params, step);

  run.steps_completed = step;
  run.final_params = params.Clone();
  run.best_params = std::move(best_params);
  if (opts.write_files && step == cfg.train.steps) {
    if (have_best) fs::copy_file(out_dir / "best.ckpt", out_dir / "final.ckpt",
                                 fs::copy_options::overwrite_existing);
    WriteCurve(out_dir / "loss_train.tsv", run.metrics, "train");
    WriteCurve(out_dir / "loss_valid.tsv", run.metrics, "valid");
  }
  return run;
}

LoadedModel LoadModel(const std::string &path) {
  const Checkpoint ck = ReadCheckpoint(path);
  LoadedModel m;
  try {
    m.config = ParseConfig(ck.config_text);
  } catch (const ConfigError &e) {
    throw CheckpointError(path + ": stored config does not parse: " + e.what());
  }
  if (ConfigDigest(m.config) != ck.config_digest) {
    throw CheckpointError(path + ": config digest does not match the stored config");
  }
  m.params = InitModel(m.config.model, m.config.train.seed);
  LoadParams(ck, m.params);
  try {
    m.vocab = Vocabulary(ck.state.at("vocab").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(path + ": missing vocabulary: " + e.what());
  }
  m.state = ck.state;
  return m;
}

EvalResult EvaluateCheckpoint(const LoadedModel &model, const Vocabulary &data_vocab,
                              const std::vector<Example> &examples) {
  if (!(data_vocab == model.vocab)) {
    throw CheckpointError("dataset vocabulary (" + std::to_string(data_vocab.size()) +
                          " tokens) differs from the checkpoint vocabulary (" +
                          std::to_string(model.vocab.size()) + " tokens)");
  }
  return Evaluate(examples, model.params, model.config.model, model.vocab,
                  model.config.train.max_symbols);
}

std::vector<std::pair<std::size_t, double>> SpectrumReport(const ModelParams &params,
                                                           const std::string &name) {
  if (!params.Contains(name)) throw ConfigError("no parameter named '" + name + "'");
  const Param &p = params.GetParam(name);
  if (!p.is_matrix()) throw ConfigError("parameter '" + name + "' is not a weight matrix");
  const SingularValues sv = ComputeSingularValues(p.value);
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < sv.normalized.size(); ++i)
    out.emplace_back(i, std::log10(std::max(sv.normalized[i], kSpectrumFloor)));
  return out;
}

AblationGrid AblationGrid::Full() {
  AblationGrid g;
  g.alphas = {0.0, 0.005, 0.01, 0.05, 0.1};
  g.targets = {AllComponents(), {Component::kEncoder}, {Component::kPredictor}, {Component::kJoiner}};
  g.logit_stds = {0.0, 0.01, 0.05};
  g.dropouts = {0.1, 0.2, 0.3};
  return g;
}

AblationGrid AblationGrid::Reduced() {
  AblationGrid g;
  g.alphas = {0.0, 0.01};
  g.targets = {AllComponents()};
  g.logit_stds = {0.0};
  g.dropouts = {0.1};
  return g;
}

std::vector<AblationRow> RunAblation(const TrainConfig &base, const AblationGrid &grid,
                                     bool budget_acknowledged,
                                     const std::function<void(const AblationRow &)> &on_row) {
  if (grid.size() == 0) throw ConfigError("ablation grid is empty");
  if (grid.size() > AblationGrid::Reduced().size() && !budget_acknowledged) {
    throw ConfigError("ablation grid has " + std::to_string(grid.size()) +
                      " training runs; acknowledge the compute budget to start it");
  }
  std::vector<AblationRow> rows;
  for (double alpha : grid.alphas)
    for (const auto &targets : grid.targets)
      for (double logit_std : grid.logit_stds)
        for (double dropout : grid.dropouts) {
          TrainConfig cfg = base;
          cfg.noise.alpha = alpha;
          cfg.noise.targets = targets;
          cfg.noise.logit_std = logit_std;
          cfg.model.encoder.dropout = dropout;
          cfg.model.predictor.dropout = dropout;
          TrainOptions opts;
          opts.write_files = false;
          const RunResult run = Train(cfg, opts);
          const Dataset data = LoadDataset(cfg);
          AblationRow row{alpha, targets, logit_std, dropout, run.best_valid_loss,
                          Evaluate(data.valid, run.best_params, cfg.model, data.vocab,
                                   cfg.train.max_symbols)};
          rows.push_back(row);
          if (on_row) on_row(row);
        }
  return rows;
}

std::string AblationHeader() {
  return "alpha\ttargets\tlogit_std\tdropout\tbest_valid_loss\tvalid_ter\tvalid_wer";
}

std::string AblationLine(const AblationRow &r) {
  std::ostringstream os;
  os.precision(8);
  std::string targets;
  for (Component c : r.targets) targets += (targets.empty() ? "" : ",") + std::string(ComponentName(c));
  if (targets.empty()) targets = "none";
  os << r.alpha << '\t' << targets << '\t' << r.logit_std << '\t' << r.dropout << '\t'
     << r.best_valid_loss << '\t' << r.valid.ter << '\t' << r.valid.wer;
  return os.str();
}

}  // namespace nrt
