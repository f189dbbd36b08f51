// nrt/data.h

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

#ifndef NRT_DATA_H_
#define NRT_DATA_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nrt/model.h"
#include "nrt/rng.h"

namespace nrt {

// Token inventory; index == token id, blank is implicit at size().
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  const std::string &Token(int id) const;
  int Id(const std::string &token) const;  // DataError when unknown

  // One token per line, UTF-8.
  static Vocabulary Read(const std::string &path);
  void Write(const std::string &path) const;

  bool operator==(const Vocabulary &o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
};

inline constexpr const char *kWordSeparator = "|";

// Letters a, b, ... followed by the word separator.
Vocabulary SyntheticVocabulary(std::size_t size);

struct SyntheticTask {
  std::string kind = "copy";  // copy | delayed-copy
  std::size_t vocab_size = 8;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  std::size_t frames_per_token = 3;
  std::size_t delay = 2;  // leading filler frames for delayed-copy
  std::size_t feature_dim = 80;
  double feature_noise = 0.5;
  double template_scale = 1.0;
  std::uint64_t template_seed = 7;
  // Identical adjacent labels produce one unbroken run of template frames;
  // when false, each label differs from its predecessor.
  bool allow_repeats = false;

  void Validate() const;
};

// Each label is drawn uniformly; its template row (fixed by template_seed)
// is repeated frames_per_token times and Gaussian noise added. label_frames
// holds the first frame of each token.
std::vector<Example> GenerateSyntheticCorpus(const SyntheticTask &task, std::size_t count,
                                             RngStream &rng, const std::string &id_prefix = "utt");

// Per-token template rows, vocab_size x feature_dim.
Tensor SyntheticTemplates(const SyntheticTask &task);

// Manifest lines: "<id>\t<feature or wav path>\t<space separated tokens>".
// Relative paths resolve against the manifest's directory. Each wav entry is
// loaded once per factor in `speeds` (ids get a "-sp<factor>" suffix when the
// factor is not 1).
std::vector<Example> LoadManifest(const std::string &path, const Vocabulary &vocab,
                                  const std::vector<double> &speeds = {1.0});
void WriteCorpus(const std::string &dir, const std::string &split,
                 const std::vector<Example> &examples, const Vocabulary &vocab);

}  // namespace nrt

#endif  // NRT_DATA_H_
