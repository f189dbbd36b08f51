// nrt/tests/harness_test.cc

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

#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "nrt/checkpoint.h"
#include "nrt/config.h"
#include "nrt/data.h"
#include "nrt/features.h"
#include "nrt/harness.h"
#include "nrt/scoring.h"

namespace nrt {
namespace {

namespace fs = std::filesystem;

fs::path FreshDir(const std::string &name) {
  fs::path p = fs::temp_directory_path() / ("nrt_harness_" + name + "_" + std::to_string(getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string ReadBytes(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrainConfig TinyRun(const fs::path &dir) {
  TrainConfig c;
  c.model.encoder.input_dim = 8;
  c.model.encoder.num_layers = 1;
  c.model.encoder.model_dim = 16;
  c.model.encoder.num_heads = 2;
  c.model.encoder.ffn_dim = 32;
  c.model.encoder.output_dim = 16;
  c.model.encoder.segment_length = 2;
  c.model.predictor.vocab_size = 4;
  c.model.predictor.embed_dim = 8;
  c.model.predictor.hidden_dim = 8;
  c.model.predictor.output_dim = 16;
  c.model.joiner.joint_dim = 16;
  c.data.task.vocab_size = 4;
  c.data.task.feature_dim = 8;
  c.data.task.min_length = 2;
  c.data.task.max_length = 4;
  c.data.task.frames_per_token = 2;
  c.data.train_size = 12;
  c.data.valid_size = 6;
  c.train.steps = 9;
  c.train.batch_size = 4;
  c.train.eval_train_limit = 0;
  c.output_dir = dir.string();
  return c;
}

// ---- configuration ----

TEST(Config, TextRoundTripReproducesEveryKey) {
  TrainConfig c;
  c.noise.targets = {Component::kEncoder, Component::kJoiner};
  c.noise.alpha = 0.1 + 0.2;
  c.prune.block_rows = 4;
  c.prune.block_cols = 2;
  c.data.speed_perturb = {0.9, 1.0, 1.1};
  c.optimizer.learning_rate = 1.0 / 3.0;
  const std::string text = ConfigToText(c);
  const TrainConfig back = ParseConfig(text);
  EXPECT_EQ(ConfigToText(back), text);
  EXPECT_EQ(back.noise.alpha, c.noise.alpha);
  EXPECT_EQ(back.optimizer.learning_rate, c.optimizer.learning_rate);
  EXPECT_EQ(back.noise.targets, c.noise.targets);
  EXPECT_EQ(back.prune.block_rows, 4u);
  EXPECT_EQ(ConfigDigest(back), ConfigDigest(c));
  // Every key appears exactly once.
  for (const auto &key : ConfigKeys()) {
    std::size_t n = 0;
    for (std::size_t pos = text.find("\n" + key + " = "); pos != std::string::npos;
         pos = text.find("\n" + key + " = ", pos + 1))
      ++n;
    if (text.rfind(key + " = ", 0) == 0) ++n;
    EXPECT_EQ(n, 1u) << key;
  }
}

TEST(Config, RejectsUnknownKeysAndMalformedValues) {
  EXPECT_THROW(ParseConfig("noise.alfa = 0.1\n"), ConfigError);
  EXPECT_THROW(ParseConfig("noise.alpha = lots\n"), ConfigError);
  EXPECT_THROW(ParseConfig("train.steps = 12x\n"), ConfigError);
  EXPECT_THROW(ParseConfig("noise.targets = encoder,decoder\n"), ConfigError);
  EXPECT_THROW(ParseConfig("prune.block = 8by1\n"), ConfigError);
  EXPECT_THROW(ParseConfig("just words\n"), ConfigError);
  EXPECT_THROW(ParseConfig("noise.alpha = -1\n"), ConfigError);
  EXPECT_THROW(ParseConfig("", {"noise.lambda"}), ConfigError);
}

TEST(Config, CommentsOverridesAndPresetOrder) {
  const std::string text =
      "# desk run\n"
      "encoder.layers = 3   # more depth\n"
      "model.preset = large\n"
      "data.source = manifest\n"
      "data.dir = /nowhere\n"
      "noise.alpha = 0.02\n";
  const TrainConfig c = ParseConfig(text, {"noise.alpha=0.03", "noise.targets = encoder"});
  EXPECT_EQ(c.preset, "large");
  EXPECT_EQ(c.model.encoder.num_layers, 3u);
  EXPECT_EQ(c.model.encoder.model_dim, 512u);
  EXPECT_EQ(c.model.predictor.vocab_size, 4096u);
  EXPECT_EQ(c.noise.alpha, 0.03);
  EXPECT_EQ(c.noise.targets, ComponentSet{Component::kEncoder});
}

TEST(Config, DigestTracksContentButNotOutputDir) {
  TrainConfig a, b;
  b.output_dir = "elsewhere";
  EXPECT_EQ(ConfigDigest(a), ConfigDigest(b));
  b.noise.seed = 2;
  EXPECT_NE(ConfigDigest(a), ConfigDigest(b));
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, EnvironmentOverridesOutputDir) {
  TrainConfig c;
  c.output_dir = "from_config";
  unsetenv(kOutputDirEnv);
  EXPECT_EQ(ResolveOutputDir(c), "from_config");
  setenv(kOutputDirEnv, "/tmp/from_env", 1);
  EXPECT_EQ(ResolveOutputDir(c), "/tmp/from_env");
  unsetenv(kOutputDirEnv);
}

TEST(Config, MismatchedDataAndModelAreConfigErrors) {
  EXPECT_THROW(ParseConfig("data.vocab_size = 5\n"), ConfigError);
  EXPECT_THROW(ParseConfig("data.feature_dim = 40\n"), ConfigError);
  EXPECT_THROW(ParseConfig("data.source = wav\n"), ConfigError);
  EXPECT_THROW(ParseConfig("data.source = manifest\n"), ConfigError);
}

// ---- synthetic data ----

TEST(SyntheticData, NoiselessFeaturesAreRepeatedTemplates) {
  SyntheticTask task;
  task.feature_noise = 0.0;
  task.frames_per_token = 3;
  task.min_length = task.max_length = 4;
  task.feature_dim = 5;
  RngStream rng(1);
  const auto corpus = GenerateSyntheticCorpus(task, 3, rng);
  const Tensor templates = SyntheticTemplates(task);
  for (const auto &ex : corpus) {
    ASSERT_EQ(ex.labels.size(), 4u);
    ASSERT_EQ(ex.features.rows(), 12u);
    ASSERT_EQ(ex.label_frames, (std::vector<std::size_t>{0, 3, 6, 9}));
    for (std::size_t t = 0; t < 12; ++t)
      for (std::size_t d = 0; d < 5; ++d)
        EXPECT_EQ(ex.features.at(t, d), templates.at(ex.labels[t / 3], d));
  }
}

TEST(SyntheticData, ValidatesTask) {
  SyntheticTask task;
  RngStream rng(1);
  task.vocab_size = 1;
  EXPECT_THROW(GenerateSyntheticCorpus(task, 1, rng), ConfigError);
  task.vocab_size = 4;
  EXPECT_THROW(GenerateSyntheticCorpus(task, 0, rng), ConfigError);
  task.kind = "reverse";
  EXPECT_THROW(GenerateSyntheticCorpus(task, 1, rng), ConfigError);
  EXPECT_THROW(SyntheticVocabulary(1), ConfigError);
}

TEST(SyntheticData, AdjacentLabelsDifferUnlessRepeatsAllowed) {
  SyntheticTask task;
  task.vocab_size = 3;
  task.min_length = 6;
  task.max_length = 10;
  RngStream rng(5);
  std::vector<int> counts(3, 0);
  for (const auto &ex : GenerateSyntheticCorpus(task, 200, rng)) {
    for (std::size_t u = 1; u < ex.labels.size(); ++u) ASSERT_NE(ex.labels[u], ex.labels[u - 1]);
    for (int l : ex.labels) ++counts[l];
  }
  for (int c : counts) EXPECT_GT(c, 300);
  task.allow_repeats = true;
  RngStream rng2(5);
  bool saw_repeat = false;
  for (const auto &ex : GenerateSyntheticCorpus(task, 50, rng2))
    for (std::size_t u = 1; u < ex.labels.size(); ++u) saw_repeat |= ex.labels[u] == ex.labels[u - 1];
  EXPECT_TRUE(saw_repeat);
}

TEST(SyntheticData, DelayedCopyShiftsAlignment) {
  SyntheticTask task;
  task.kind = "delayed-copy";
  task.delay = 5;
  task.frames_per_token = 2;
  task.feature_noise = 0.0;
  task.min_length = task.max_length = 3;
  RngStream rng(2);
  const auto ex = GenerateSyntheticCorpus(task, 1, rng)[0];
  EXPECT_EQ(ex.features.rows(), 11u);
  EXPECT_EQ(ex.label_frames, (std::vector<std::size_t>{5, 7, 9}));
  for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(ex.features.at(t, 0), 0.0);
}

TEST(SyntheticData, VocabularyFileRoundTrip) {
  const fs::path dir = FreshDir("vocab");
  const Vocabulary v = SyntheticVocabulary(5);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"a", "b", "c", "d", "|"}));
  v.Write((dir / "vocab.txt").string());
  const Vocabulary back = Vocabulary::Read((dir / "vocab.txt").string());
  EXPECT_TRUE(back == v);
  EXPECT_EQ(back.Id("|"), 4);
  EXPECT_THROW(back.Id("z"), DataError);
  EXPECT_THROW(back.Token(5), DataError);
  EXPECT_THROW(Vocabulary({"a", "a"}), DataError);
  fs::remove_all(dir);
}

TEST(SyntheticData, CorpusOnDiskReloadsIdentically) {
  const fs::path dir = FreshDir("corpus");
  SyntheticTask task;
  task.feature_dim = 6;
  RngStream rng(3);
  const auto corpus = GenerateSyntheticCorpus(task, 4, rng);
  const Vocabulary v = SyntheticVocabulary(task.vocab_size);
  WriteCorpus(dir.string(), "train", corpus, v);
  const auto back = LoadManifest((dir / "train.tsv").string(), v);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(back[i].id, corpus[i].id);
    EXPECT_EQ(back[i].labels, corpus[i].labels);
    // Feature files hold float32.
    std::vector<double> rounded;
    for (double v : corpus[i].features.vec()) rounded.push_back(static_cast<float>(v));
    EXPECT_EQ(back[i].features.vec(), rounded);
  }
  fs::remove_all(dir);
}

// ---- scoring ----

TEST(Scoring, WordErrorRateFixedCases) {
  EXPECT_EQ(WordErrors("a b c", "a b c").rate(), 0.0);
  EXPECT_DOUBLE_EQ(WordErrors("a b c", "a x c").rate(), 1.0 / 3.0);
  const ErrorCounts c = WordErrors("a b", "");
  EXPECT_EQ(c.rate(), 1.0);
  EXPECT_EQ(c.deletions, 2u);
  EXPECT_EQ(WordErrors("", "").rate(), 0.0);
  EXPECT_EQ(WordErrors("", "a").rate(), 1.0);
}

// Exhaustive edit distance by recursion on the first symbols.
std::size_t BruteDistance(const std::vector<int> &a, std::size_t i, const std::vector<int> &b,
                          std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  return std::min({BruteDistance(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1),
                   BruteDistance(a, i + 1, b, j) + 1, BruteDistance(a, i, b, j + 1) + 1});
}

TEST(Scoring, EditDistanceMatchesExhaustiveRecursion) {
  RngStream rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> a(rng.UniformInt(0, 6)), b(rng.UniformInt(0, 6));
    for (int &x : a) x = static_cast<int>(rng.UniformInt(0, 2));
    for (int &x : b) x = static_cast<int>(rng.UniformInt(0, 2));
    const ErrorCounts c = AlignSequences(a, b);
    ASSERT_EQ(c.errors(), BruteDistance(a, 0, b, 0));
    // Counts are consistent with both lengths.
    ASSERT_EQ(a.size() - c.deletions + c.insertions, b.size());
  }
}

TEST(Scoring, TokensSplitIntoWordsOnSeparator) {
  const Vocabulary v = SyntheticVocabulary(4);  // a b c |
  EXPECT_EQ(TokensToWords({0, 1, 3, 2, 3, 3, 0}, v), (std::vector<std::string>{"ab", "c", "a"}));
  EXPECT_TRUE(TokensToWords({3, 3}, v).empty());
}

// ---- checkpoints ----

Checkpoint SampleCheckpoint() {
  Checkpoint ck;
  ck.config_digest = 0x1234;
  ck.config_text = "noise.alpha = 0.01\n";
  RngStream rng(4);
  ck.params.emplace_back("encoder.w", Tensor::RandomNormal({3, 2}, rng));
  ck.params.emplace_back("joiner.b", Tensor::RandomNormal({5}, rng));
  ck.masks["encoder.w"] = {1, 0, 1};
  ck.optimizer["encoder.w/m"] = {0.5, -0.25, 1e-300};
  ck.state = {{"step", 7}, {"loss", 0.1}, {"vocab", {"a", "|"}}};
  return ck;
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  const fs::path dir = FreshDir("ckpt");
  WriteCheckpoint((dir / "a.ckpt").string(), SampleCheckpoint());
  const Checkpoint back = ReadCheckpoint((dir / "a.ckpt").string());
  EXPECT_EQ(back.config_digest, 0x1234u);
  EXPECT_EQ(back.params[0].second.vec(), SampleCheckpoint().params[0].second.vec());
  EXPECT_EQ(back.optimizer.at("encoder.w/m")[2], 1e-300);
  EXPECT_EQ(back.masks.at("encoder.w"), (std::vector<std::uint8_t>{1, 0, 1}));
  WriteCheckpoint((dir / "b.ckpt").string(), back);
  EXPECT_EQ(ReadBytes(dir / "a.ckpt"), ReadBytes(dir / "b.ckpt"));
  EXPECT_FALSE(fs::exists(dir / "a.ckpt.tmp"));
  fs::remove_all(dir);
}

TEST(Checkpoint, DamagedFilesAreCheckpointErrors) {
  const fs::path dir = FreshDir("ckpt_bad");
  EXPECT_THROW(ReadCheckpoint((dir / "missing.ckpt").string()), CheckpointError);
  WriteCheckpoint((dir / "good.ckpt").string(), SampleCheckpoint());
  const std::string bytes = ReadBytes(dir / "good.ckpt");
  auto write = [&](const std::string &name, const std::string &content) {
    std::ofstream(dir / name, std::ios::binary) << content;
    return (dir / name).string();
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(ReadCheckpoint(write("magic.ckpt", bad_magic)), CheckpointError);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(ReadCheckpoint(write("version.ckpt", bad_version)), CheckpointError);
  for (std::size_t cut : {std::size_t{10}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(ReadCheckpoint(write("cut.ckpt", bytes.substr(0, cut))), CheckpointError) << cut;
  EXPECT_THROW(ReadCheckpoint(write("tail.ckpt", bytes + "x")), CheckpointError);
  fs::remove_all(dir);
}

TEST(Checkpoint, LoadingIntoDifferentModelIsCheckpointError) {
  Checkpoint ck = SampleCheckpoint();
  ModelParams p;
  p.Add("encoder.w", Component::kEncoder, Tensor({2, 3}));
  p.Add("joiner.b", Component::kJoiner, Tensor({5}));
  EXPECT_THROW(LoadParams(ck, p), CheckpointError);
  ModelParams q;
  q.Add("encoder.w", Component::kEncoder, Tensor({3, 2}));
  EXPECT_THROW(LoadParams(ck, q), CheckpointError);
}

// ---- training loop ----

TEST(Train, WritesMetricsOncePerEpochAndCurves) {
  const fs::path dir = FreshDir("metrics");
  const RunResult run = Train(TinyRun(dir));
  EXPECT_EQ(run.steps_completed, 9);
  ASSERT_EQ(run.metrics.size(), 6u);  // 3 epochs x {train, valid}
  std::ifstream in(dir / "metrics.jsonl");
  std::string line;
  std::vector<std::int64_t> steps;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char *key : {"step", "epoch", "split", "loss", "ter", "wer", "sparsity", "alpha"})
      ASSERT_TRUE(j.contains(key)) << key;
    if (j["split"] == "valid") steps.push_back(j["step"].get<std::int64_t>());
  }
  EXPECT_EQ(steps, (std::vector<std::int64_t>{3, 6, 9}));
  for (const char *f : {"config.txt", "best.ckpt", "last.ckpt", "final.ckpt", "loss_train.tsv",
                        "loss_valid.tsv", "timing.tsv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(ReadBytes(dir / "final.ckpt"), ReadBytes(dir / "best.ckpt"));
  const LoadedModel best = LoadModel((dir / "final.ckpt").string());
  EXPECT_TRUE(BitIdentical(best.params, run.best_params));
  fs::remove_all(dir);
}

TEST(Train, IdenticalConfigsWriteIdenticalCheckpoints) {
  const fs::path a = FreshDir("det_a"), b = FreshDir("det_b");
  TrainConfig ca = TinyRun(a), cb = TinyRun(b);
  ca.train.checkpoint_every = 4;
  cb.train.checkpoint_every = 4;
  Train(ca);
  Train(cb);
  for (const char *f : {"final.ckpt", "last.ckpt", "step-4.ckpt", "metrics.jsonl"})
    EXPECT_EQ(ReadBytes(a / f), ReadBytes(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  const fs::path full = FreshDir("resume_full"), part = FreshDir("resume_part");
  TrainConfig cf = TinyRun(full), cp = TinyRun(part);
  cf.prune.final_sparsity = 0.5;
  cf.prune.t0 = 1;
  cf.prune.num_updates = 2;
  cf.prune.delta_t = 3;
  cp.prune = cf.prune;
  const RunResult uninterrupted = Train(cf);

  TrainOptions stop;
  stop.stop_after = 5;  // mid-epoch, between mask updates
  EXPECT_EQ(Train(cp, stop).steps_completed, 5);
  TrainOptions resume;
  resume.resume_from = (part / "last.ckpt").string();
  const RunResult resumed = Train(cp, resume);

  EXPECT_EQ(resumed.metrics, uninterrupted.metrics);
  EXPECT_TRUE(BitIdentical(resumed.final_params, uninterrupted.final_params));
  EXPECT_TRUE(BitIdentical(resumed.best_params, uninterrupted.best_params));
  for (const char *f : {"metrics.jsonl", "prune.jsonl", "last.ckpt", "final.ckpt"})
    EXPECT_EQ(ReadBytes(part / f), ReadBytes(full / f)) << f;
  fs::remove_all(full);
  fs::remove_all(part);
}

TEST(Train, ResumeRejectsDifferentConfig) {
  const fs::path dir = FreshDir("resume_bad");
  TrainConfig c = TinyRun(dir);
  TrainOptions stop;
  stop.stop_after = 2;
  Train(c, stop);
  c.noise.alpha = 0.02;
  TrainOptions resume;
  resume.resume_from = (dir / "last.ckpt").string();
  EXPECT_THROW(Train(c, resume), CheckpointError);
  fs::remove_all(dir);
}

TEST(Train, NoiseSettingsDoNotChangeDataOrder) {
  auto order = [](double alpha, double lambda, double logit_std) {
    TrainConfig c = TinyRun("unused");
    c.noise.alpha = alpha;
    c.noise.lambda = lambda;
    c.noise.logit_std = logit_std;
    std::vector<std::string> ids;
    TrainOptions opts;
    opts.write_files = false;
    opts.on_batch = [&](std::int64_t, const std::vector<std::string> &b) {
      ids.insert(ids.end(), b.begin(), b.end());
    };
    const RunResult r = Train(c, opts);
    return std::make_pair(ids, r.final_params.Clone());
  };
  const auto [base_ids, base_params] = order(0.0, 0.0, 0.0);
  const auto [noisy_ids, noisy_params] = order(0.01, 0.1, 0.05);
  EXPECT_EQ(base_ids.size(), 36u);
  EXPECT_EQ(base_ids, noisy_ids);
  EXPECT_FALSE(BitIdentical(base_params, noisy_params));
}

TEST(Train, HighSparsityRunEndsAtBlockGranularTarget) {
  const fs::path dir = FreshDir("prune90");
  TrainConfig c = TinyRun(dir);
  c.prune.final_sparsity = 0.9;
  c.prune.t0 = 1;
  c.prune.num_updates = 2;
  c.prune.delta_t = 3;
  const RunResult run = Train(c);
  std::size_t zeros = 0, total = 0;
  for (const auto &p : run.final_params.params()) {
    if (p.component != Component::kEncoder || !p.is_matrix()) continue;
    const std::size_t blocks = (p.value.rows() / 8) * p.value.cols();
    const std::size_t expect = static_cast<std::size_t>(std::floor(0.9 * blocks + 1e-9)) * 8;
    std::size_t z = 0;
    for (double v : p.value.data()) z += v == 0.0;
    EXPECT_EQ(z, expect) << p.name;
    zeros += z;
    total += p.value.numel();
  }
  EXPECT_EQ(run.metrics.back().sparsity, static_cast<double>(zeros) / static_cast<double>(total));
  std::ifstream in(dir / "prune.jsonl");
  std::string line;
  std::vector<std::int64_t> steps;
  while (std::getline(in, line)) steps.push_back(nlohmann::json::parse(line)["step"].get<std::int64_t>());
  EXPECT_EQ(steps, (std::vector<std::int64_t>{1, 4, 7}));
  fs::remove_all(dir);
}

TEST(Train, RepeatedNonFiniteStepsAbortWithDiagnostic) {
  const fs::path dir = FreshDir("nan");
  const fs::path data = dir / "data";
  TrainConfig c = TinyRun(dir / "out");
  RngStream rng(1);
  const auto clean = GenerateSyntheticCorpus(c.data.task, 4, rng);
  auto corpus = clean;
  for (auto &ex : corpus) ex.features.vec()[0] = std::numeric_limits<double>::quiet_NaN();
  const Vocabulary v = SyntheticVocabulary(4);
  fs::create_directories(data);
  v.Write((data / "vocab.txt").string());
  WriteCorpus(data.string(), "train", corpus, v);
  WriteCorpus(data.string(), "valid", clean, v);
  c.train.steps = 6;
  c.train.eval_every_epochs = 100;
  c.data.source = "manifest";
  c.data.dir = data.string();
  std::int64_t completed = 0;
  TrainOptions opts;
  opts.on_step = [&](std::int64_t, double) { ++completed; };
  try {
    Train(c, opts);
    FAIL() << "expected NumericError";
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("3 consecutive"), std::string::npos) << e.what();
  }
  EXPECT_EQ(completed, 0);
  const auto diag = nlohmann::json::parse(ReadBytes(dir / "out" / "diagnostic.json"));
  EXPECT_EQ(diag["nonfinite_streak"], 3);
  EXPECT_TRUE(diag.contains("error"));
  fs::remove_all(dir);
}

TEST(Train, EvaluationRequiresMatchingVocabulary) {
  const fs::path dir = FreshDir("vocab_mismatch");
  TrainConfig c = TinyRun(dir);
  c.train.steps = 3;
  Train(c);
  const LoadedModel m = LoadModel((dir / "final.ckpt").string());
  const Dataset d = LoadDataset(c);
  const EvalResult r = EvaluateCheckpoint(m, d.vocab, d.valid);
  EXPECT_EQ(r.utterances, 6u);
  const Vocabulary other({"w", "x", "y", "|"});
  EXPECT_THROW(EvaluateCheckpoint(m, other, d.valid), CheckpointError);
  fs::remove_all(dir);
}

// ---- diagnostics ----

TEST(Spectrum, IdentityIsFlatAndRankOneDropsToFloor) {
  ModelParams p;
  p.Add("joiner.output.weight", Component::kJoiner, Tensor::Identity(6));
  Tensor r1({4, 3});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) r1.at(i, j) = (i + 1.0) * (j + 2.0);
  p.Add("encoder.rank1", Component::kEncoder, r1);
  p.Add("joiner.bias", Component::kJoiner, Tensor({6}));
  const auto flat = SpectrumReport(p, "joiner.output.weight");
  ASSERT_EQ(flat.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(flat[i].first, i);
    EXPECT_EQ(flat[i].second, 0.0);
  }
  const auto rank1 = SpectrumReport(p, "encoder.rank1");
  ASSERT_EQ(rank1.size(), 3u);
  EXPECT_EQ(rank1[0].second, 0.0);
  EXPECT_LE(rank1[1].second, -14.0);
  EXPECT_GE(rank1[1].second, std::log10(kSpectrumFloor));
  EXPECT_THROW(SpectrumReport(p, "joiner.nothing"), ConfigError);
  EXPECT_THROW(SpectrumReport(p, "joiner.bias"), ConfigError);
}

TEST(Ablation, FullGridNeedsBudgetAcknowledgement) {
  const AblationGrid full = AblationGrid::Full();
  EXPECT_EQ(full.size(), 5u * 4u * 3u * 3u);
  EXPECT_THROW(RunAblation(TinyRun("unused"), full, false), ConfigError);
  bool has_operating_point = false;
  for (double a : full.alphas)
    for (const auto &t : full.targets) has_operating_point |= a == 0.01 && t == AllComponents();
  EXPECT_TRUE(has_operating_point);
}

TEST(Ablation, ReducedGridRowsAreCompleteAndReproducible) {
  TrainConfig c = TinyRun("unused");
  c.train.steps = 3;
  std::vector<std::string> lines;
  const auto rows = RunAblation(c, AblationGrid::Reduced(), false,
                                [&](const AblationRow &r) { lines.push_back(AblationLine(r)); });
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(rows[1].alpha, 0.01);
  EXPECT_EQ(rows[1].targets, AllComponents());
  for (const auto &r : rows) {
    EXPECT_TRUE(std::isfinite(r.best_valid_loss));
    EXPECT_EQ(r.valid.loss, r.best_valid_loss);
    EXPECT_GE(r.valid.ter, 0.0);
  }
  AblationGrid one;
  one.alphas = {0.01};
  one.targets = {AllComponents()};
  one.logit_stds = {0.0};
  one.dropouts = {0.1};
  const auto again = RunAblation(c, one, false);
  EXPECT_EQ(AblationLine(again[0]), lines[1]);
  EXPECT_EQ(again[0].best_valid_loss, rows[1].best_valid_loss);
  EXPECT_EQ(AblationHeader().substr(0, 5), "alpha");
}

}  // namespace
}  // namespace nrt
