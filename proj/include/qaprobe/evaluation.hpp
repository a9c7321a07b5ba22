// Copyright 2026 The qaprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qaprobe/text.hpp"

// SQuAD 2.0 exact match and token F1. Punctuation means the Unicode P*
// categories, and articles are removed only as whitespace-delimited words.
namespace qaprobe {

struct EvalScore {
  int em = 0;
  double f1 = 0.0;

  bool operator==(const EvalScore&) const = default;
};

inline std::vector<std::string> NormalizedTokens(std::string_view answer) {
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (current != U"a" && current != U"an" && current != U"the") {
      tokens.push_back(text::EncodeUtf8(current));
    }
    current.clear();
  };
  for (char32_t cp : text::DecodeUtf8(answer)) {
    if (text::IsPunctuation(cp)) continue;
    if (text::IsWhitespace(cp)) {
      flush();
    } else {
      current.push_back(text::ToLower(cp));
    }
  }
  flush();
  return tokens;
}

inline std::string NormalizeAnswer(std::string_view answer) {
  const auto tokens = NormalizedTokens(answer);
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

namespace internal {

inline double TokenF1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() && gold.empty() ? 1.0 : 0.0;
  std::unordered_map<std::string_view, int> gold_counts;
  for (const auto& t : gold) ++gold_counts[t];
  int common = 0;
  for (const auto& t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

// An answerable question without usable golds scores against the empty
// string, as the official evaluator does.
inline std::vector<std::string> EffectiveGolds(const std::vector<std::string>& golds) {
  return golds.empty() ? std::vector<std::string>{""} : golds;
}

}  // namespace internal

inline int ComputeEm(std::string_view prediction, const std::vector<std::string>& golds,
                     bool is_impossible) {
  const std::string pred = NormalizeAnswer(prediction);
  if (is_impossible) return pred.empty() ? 1 : 0;
  for (const auto& gold : internal::EffectiveGolds(golds)) {
    if (NormalizeAnswer(gold) == pred) return 1;
  }
  return 0;
}

inline double ComputeF1(std::string_view prediction, const std::vector<std::string>& golds,
                        bool is_impossible) {
  const auto pred = NormalizedTokens(prediction);
  if (is_impossible) return pred.empty() ? 1.0 : 0.0;
  double best = 0.0;
  for (const auto& gold : internal::EffectiveGolds(golds)) {
    best = std::max(best, internal::TokenF1(pred, NormalizedTokens(gold)));
  }
  return best;
}

inline EvalScore Evaluate(std::string_view prediction, const std::vector<std::string>& golds,
                          bool is_impossible) {
  return EvalScore{ComputeEm(prediction, golds, is_impossible),
                   ComputeF1(prediction, golds, is_impossible)};
}

}  // namespace qaprobe
