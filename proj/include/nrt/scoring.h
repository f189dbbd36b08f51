// nrt/scoring.h

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

#ifndef NRT_SCORING_H_
#define NRT_SCORING_H_

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "nrt/data.h"

namespace nrt {

struct ErrorCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  // errors / reference length; an empty reference scores 0 if the hypothesis
  // is empty too and 1 otherwise.
  double rate() const;
  ErrorCounts &operator+=(const ErrorCounts &o);
};

// Levenshtein alignment with unit costs. Ties prefer substitution, then
// deletion, then insertion.
template <typename T>
ErrorCounts AlignSequences(const std::vector<T> &ref, const std::vector<T> &hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1), at(i - 1, j) + 1,
                           at(i, j - 1) + 1});
  ErrorCounts c;
  c.reference_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      c.substitutions += ref[i - 1] == hyp[j - 1] ? 0 : 1;
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

std::vector<std::string> SplitWords(const std::string &text);
// Joins token strings and splits on the word separator.
std::vector<std::string> TokensToWords(const std::vector<int> &ids, const Vocabulary &vocab);

ErrorCounts WordErrors(const std::string &ref, const std::string &hyp);

}  // namespace nrt

#endif  // NRT_SCORING_H_
