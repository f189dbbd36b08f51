// nrt/src/data.cc

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

#include "nrt/data.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nrt/features.h"

namespace nrt {

namespace fs = std::filesystem;

namespace {

std::string FormatSpeed(double speed) {
  std::ostringstream os;
  os << speed;
  return os.str();
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw DataError("vocabulary: empty token at line " + std::to_string(i + 1));
    for (std::size_t j = 0; j < i; ++j)
      if (tokens_[j] == tokens_[i]) throw DataError("vocabulary: duplicate token '" + tokens_[i] + "'");
  }
}

const std::string &Vocabulary::Token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[id];
}

int Vocabulary::Id(const std::string &token) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (tokens_[i] == token) return static_cast<int>(i);
  throw DataError("token '" + token + "' not in vocabulary");
}

Vocabulary Vocabulary::Read(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

void Vocabulary::Write(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary " + path);
  for (const auto &t : tokens_) out << t << '\n';
}

Vocabulary SyntheticVocabulary(std::size_t size) {
  if (size < 2) throw ConfigError("synthetic vocabulary needs at least 2 tokens");
  if (size > 27) throw ConfigError("synthetic vocabulary has at most 26 letters plus separator");
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i + 1 < size; ++i) tokens.emplace_back(1, static_cast<char>('a' + i));
  tokens.emplace_back(kWordSeparator);
  return Vocabulary(std::move(tokens));
}

void SyntheticTask::Validate() const {
  if (kind != "copy" && kind != "delayed-copy") {
    throw ConfigError("data.task must be copy or delayed-copy, got '" + kind + "'");
  }
  if (vocab_size < 2) throw ConfigError("data.vocab_size must be at least 2");
  if (vocab_size > 27) throw ConfigError("data.vocab_size must be at most 27");
  if (min_length == 0 || min_length > max_length) {
    throw ConfigError("data lengths need 1 <= min_length <= max_length");
  }
  if (frames_per_token == 0 || feature_dim == 0) {
    throw ConfigError("data.frames_per_token and data.feature_dim must be positive");
  }
  if (!(feature_noise >= 0.0)) throw ConfigError("data.feature_noise must be >= 0");
}

Tensor SyntheticTemplates(const SyntheticTask &task) {
  RngStream rng(task.template_seed);
  return Tensor::RandomNormal({task.vocab_size, task.feature_dim}, rng, task.template_scale);
}

std::vector<Example> GenerateSyntheticCorpus(const SyntheticTask &task, std::size_t count,
                                             RngStream &rng, const std::string &id_prefix) {
  task.Validate();
  if (count == 0) throw ConfigError("synthetic corpus size must be at least 1");
  const Tensor templates = SyntheticTemplates(task);
  const std::size_t lead = task.kind == "delayed-copy" ? task.delay : 0;
  const std::size_t D = task.feature_dim, F = task.frames_per_token;
  std::vector<Example> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    Example ex;
    ex.id = id_prefix + std::to_string(n);
    const std::size_t U = rng.UniformInt(task.min_length, task.max_length);
    for (std::size_t u = 0; u < U; ++u) {
      if (u == 0 || task.allow_repeats) {
        ex.labels.push_back(static_cast<int>(rng.UniformInt(0, task.vocab_size - 1)));
      } else {
        // Uniform over the other vocab_size - 1 tokens.
        const int prev = ex.labels.back();
        const int draw = static_cast<int>(rng.UniformInt(0, task.vocab_size - 2));
        ex.labels.push_back(draw >= prev ? draw + 1 : draw);
      }
    }
    const std::size_t T = lead + U * F;
    ex.features = Tensor({T, D});
    auto &x = ex.features.vec();
    for (std::size_t u = 0; u < U; ++u) {
      ex.label_frames.push_back(lead + u * F);
      for (std::size_t f = 0; f < F; ++f)
        for (std::size_t d = 0; d < D; ++d)
          x[(lead + u * F + f) * D + d] = templates.at(ex.labels[u], d);
    }
    if (task.feature_noise > 0.0)
      for (double &v : x) v += task.feature_noise * rng.Normal();
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> LoadManifest(const std::string &path, const Vocabulary &vocab,
                                  const std::vector<double> &speeds) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string id, file, text;
    if (!std::getline(ls, id, '\t') || !std::getline(ls, file, '\t')) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected id<TAB>path<TAB>tokens");
    }
    std::getline(ls, text);
    std::vector<int> labels;
    std::istringstream ts(text);
    std::string tok;
    while (ts >> tok) labels.push_back(vocab.Id(tok));
    fs::path fp = fs::path(file).is_absolute() ? fs::path(file) : base / file;
    if (fp.extension() == ".wav") {
      const AudioClip clip = ReadWav(fp.string());
      for (double speed : speeds) {
        Example ex;
        ex.id = speed == 1.0 ? id : id + "-sp" + FormatSpeed(speed);
        ex.features = ComputeLogMel(speed == 1.0 ? clip : SpeedPerturb(clip, speed)).frames;
        ex.labels = labels;
        out.push_back(std::move(ex));
      }
    } else {
      Example ex;
      ex.id = id;
      ex.features = ReadFeatures(fp.string()).frames;
      ex.labels = labels;
      out.push_back(std::move(ex));
    }
  }
  if (out.empty()) throw DataError("manifest " + path + " lists no utterances");
  return out;
}

void WriteCorpus(const std::string &dir, const std::string &split,
                 const std::vector<Example> &examples, const Vocabulary &vocab) {
  fs::create_directories(fs::path(dir) / split);
  std::ofstream manifest(fs::path(dir) / (split + ".tsv"));
  if (!manifest) throw DataError("cannot write manifest in " + dir);
  for (const auto &ex : examples) {
    const std::string rel = split + "/" + ex.id + ".feat";
    FeatureMatrix fm;
    fm.frames = ex.features;
    WriteFeatures((fs::path(dir) / rel).string(), fm);
    manifest << ex.id << '\t' << rel << '\t';
    for (std::size_t i = 0; i < ex.labels.size(); ++i)
      manifest << (i ? " " : "") << vocab.Token(ex.labels[i]);
    manifest << '\n';
  }
}

}  // namespace nrt
