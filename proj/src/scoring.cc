// nrt/src/scoring.cc

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

#include "nrt/scoring.h"

#include <sstream>

namespace nrt {

double ErrorCounts::rate() const {
  if (reference_length == 0) return errors() == 0 ? 0.0 : 1.0;
  return static_cast<double>(errors()) / static_cast<double>(reference_length);
}

ErrorCounts &ErrorCounts::operator+=(const ErrorCounts &o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  reference_length += o.reference_length;
  return *this;
}

std::vector<std::string> SplitWords(const std::string &text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::vector<std::string> TokensToWords(const std::vector<int> &ids, const Vocabulary &vocab) {
  std::vector<std::string> words;
  std::string cur;
  for (int id : ids) {
    const std::string &tok = vocab.Token(id);
    if (tok == kWordSeparator) {
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
    } else {
      cur += tok;
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

ErrorCounts WordErrors(const std::string &ref, const std::string &hyp) {
  return AlignSequences(SplitWords(ref), SplitWords(hyp));
}

}  // namespace nrt
