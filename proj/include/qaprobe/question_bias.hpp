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
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qaprobe/dataset.hpp"
#include "qaprobe/error.hpp"
#include "qaprobe/evaluation.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/tokenizer.hpp"

namespace qaprobe {

struct RawQuestionFeatures {
  size_t answer_len_tokens = 0;
  bool has_number = false;
  bool has_entity = false;
  std::string prefix2;

  // Numeric encoding used for class means: [answer_len, has_number, has_entity].
  std::vector<double> Encode() const {
    return {static_cast<double>(answer_len_tokens), has_number ? 1.0 : 0.0, has_entity ? 1.0 : 0.0};
  }
};

inline constexpr size_t kRawFeatureDim = 3;
inline constexpr size_t kDefaultFrequentVocabSize = 100;

namespace internal {

inline bool IsNumberToken(const std::string& token) {
  static const std::unordered_set<std::string> kSpelled = {
      "one",     "two",     "three",     "four",     "five",    "six",      "seven",
      "eight",   "nine",    "ten",       "eleven",   "twelve",  "thirteen", "fourteen",
      "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",  "thirty",
      "forty",   "fifty",   "sixty",     "seventy",  "eighty",  "ninety",   "hundred"};
  if (std::any_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) return true;
  const std::string lower = text::ToLowerUtf8(token);
  size_t begin = 0;
  while (begin <= lower.size()) {
    const size_t dash = std::min(lower.find('-', begin), lower.size());
    if (kSpelled.contains(lower.substr(begin, dash - begin))) return true;
    begin = dash + 1;
  }
  return false;
}

inline bool StartsUpper(const std::string& token) {
  const std::u32string cps = text::DecodeUtf8(token);
  return !cps.empty() && text::IsUpper(cps.front());
}

inline bool IsSentenceEnd(const std::string& token) {
  return token == "." || token == "!" || token == "?";
}

// A token opens a sentence when nothing but non-terminal punctuation sits
// between it and the text start or a . ! ? token.
inline bool IsSentenceInitial(const std::vector<Token>& tokens, size_t idx) {
  for (size_t p = idx; p-- > 0;) {
    if (IsSentenceEnd(tokens[p].text)) return true;
    if (!text::IsAllPunctuation(tokens[p].text)) return false;
  }
  return true;
}

inline std::vector<std::string> ContentTokensLower(std::string_view s) {
  std::vector<std::string> out;
  for (const Token& t : Tokenize(s, TokenMode::kPreprocessed).tokens) {
    if (!text::IsAllPunctuation(t.text)) out.push_back(t.text);
  }
  return out;
}

}  // namespace internal

inline std::string QuestionPrefix2(std::string_view question) {
  const auto view = Tokenize(question, TokenMode::kPreprocessed);
  const auto texts = TokenTexts(view);
  return JoinTokens(texts, 0, std::min<size_t>(2, texts.size()));
}

// Entity detection is a capitalization heuristic: some answer token starts
// uppercase without opening a sentence of the context.
inline RawQuestionFeatures ExtractRawFeatures(const Instance& inst) {
  RawQuestionFeatures f;
  f.prefix2 = QuestionPrefix2(inst.question_raw);
  if (inst.is_impossible || inst.gold_answers.empty()) return f;

  const Answer& answer = inst.gold_answers.front();
  const auto answer_tokens = Tokenize(answer.text).tokens;
  f.answer_len_tokens = answer_tokens.size();
  f.has_number = std::any_of(answer_tokens.begin(), answer_tokens.end(),
                             [](const Token& t) { return internal::IsNumberToken(t.text); });

  if (inst.offsets_valid) {
    const auto ctx = Tokenize(inst.context_raw).tokens;
    const size_t lo = answer.char_start;
    const size_t hi = lo + text::DecodeUtf8(answer.text).size();
    for (size_t i = 0; i < ctx.size() && !f.has_entity; ++i) {
      if (ctx[i].char_end <= lo || ctx[i].char_start >= hi) continue;
      f.has_entity = internal::StartsUpper(ctx[i].text) && !internal::IsSentenceInitial(ctx, i);
    }
  } else {
    // Offsets unusable: judge positions within the answer alone.
    for (size_t i = 1; i < answer_tokens.size() && !f.has_entity; ++i) {
      f.has_entity = internal::StartsUpper(answer_tokens[i].text);
    }
  }
  return f;
}

struct ClassStats {
  std::vector<double> mean;
  size_t count = 0;
};

using ClassStatistics = std::map<std::string, ClassStats>;

// Questions are classed by their two-token prefix.
inline ClassStatistics BuildClassStatistics(const Dataset& dataset) {
  ClassStatistics stats;
  for (const Instance& inst : dataset.instances()) {
    const auto raw = ExtractRawFeatures(inst);
    auto& cls = stats[raw.prefix2];
    if (cls.mean.empty()) cls.mean.assign(kRawFeatureDim, 0.0);
    const auto enc = raw.Encode();
    for (size_t d = 0; d < kRawFeatureDim; ++d) cls.mean[d] += enc[d];
    ++cls.count;
  }
  for (auto& [prefix, cls] : stats) {
    for (double& v : cls.mean) v /= static_cast<double>(cls.count);
  }
  return stats;
}

// Punctuation-only tokens are ignored on both sides.
inline double WordMatchRatio(const Instance& inst) {
  const auto q = internal::ContentTokensLower(inst.question_raw);
  const std::unordered_set<std::string> q_set(q.begin(), q.end());
  if (q_set.empty()) return 0.0;
  const auto c = internal::ContentTokensLower(inst.context_raw);
  const std::unordered_set<std::string> c_set(c.begin(), c.end());
  size_t shared = 0;
  for (const auto& w : q_set) shared += c_set.contains(w) ? 1 : 0;
  return static_cast<double>(shared) / static_cast<double>(q_set.size());
}

// Top-n question words by occurrence count, ties broken alphabetically.
inline std::vector<std::string> BuildFrequentVocabulary(const Dataset& dataset,
                                                        size_t n = kDefaultFrequentVocabSize) {
  std::unordered_map<std::string, size_t> counts;
  for (const Instance& inst : dataset.instances()) {
    for (auto& w : internal::ContentTokensLower(inst.question_raw)) ++counts[w];
  }
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> out;
  for (size_t i = 0; i < std::min(n, ranked.size()); ++i) out.push_back(ranked[i].first);
  return out;
}

struct QuestionFeatures {
  std::vector<double> global_vec;
  std::vector<double> local_vec;
  std::vector<double> combined;
};

// global_weight scales the class-mean block inside the combined vector only.
inline QuestionFeatures VectorizeQuestion(const Instance& inst, const ClassStatistics& class_stats,
                                          const std::vector<std::string>& frequent_vocab,
                                          double global_weight = 1.0) {
  QuestionFeatures f;
  const auto raw = ExtractRawFeatures(inst);
  auto it = class_stats.find(raw.prefix2);
  f.global_vec = it != class_stats.end() ? it->second.mean : raw.Encode();

  f.local_vec.reserve(1 + frequent_vocab.size());
  f.local_vec.push_back(WordMatchRatio(inst));
  const auto q = internal::ContentTokensLower(inst.question_raw);
  const std::unordered_set<std::string> q_set(q.begin(), q.end());
  for (const auto& w : frequent_vocab) f.local_vec.push_back(q_set.contains(w) ? 1.0 : 0.0);

  f.combined.reserve(f.global_vec.size() + f.local_vec.size());
  for (double v : f.global_vec) f.combined.push_back(global_weight * v);
  f.combined.insert(f.combined.end(), f.local_vec.begin(), f.local_vec.end());
  return f;
}

// Cosine similarity; 0 when either side is the zero vector.
inline double CosineSimilarity(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct SimilarQuestion {
  std::string instance_id;
  double similarity = 0.0;
  std::optional<EvalScore> eval;  // absent when no prediction is available
  bool predicted_correct = false;
};

// Returns the evaluation of an instance's prediction, or nullopt when the
// model could not be queried.
using EvalProvider = std::function<std::optional<EvalScore>(const Instance&)>;

// Feature tables for one dataset, built once and then read concurrently.
class QuestionIndex {
 public:
  QuestionIndex(DatasetHandle dataset, size_t vocab_size = kDefaultFrequentVocabSize,
                double global_weight = 1.0)
      : dataset_(std::move(dataset)),
        class_stats_(BuildClassStatistics(*dataset_)),
        frequent_vocab_(BuildFrequentVocabulary(*dataset_, vocab_size)) {
    features_.reserve(dataset_->size());
    for (const Instance& inst : dataset_->instances()) {
      features_.push_back(VectorizeQuestion(inst, class_stats_, frequent_vocab_, global_weight));
    }
  }

  const ClassStatistics& class_stats() const { return class_stats_; }
  const std::vector<std::string>& frequent_vocab() const { return frequent_vocab_; }
  const QuestionFeatures& features(size_t index) const { return features_.at(index); }

  // Exact top-k by cosine over combined vectors, query excluded. Equal
  // similarities keep dataset order.
  std::vector<SimilarQuestion> Similar(const std::string& id, size_t k,
                                       const EvalProvider& evals = nullptr) const {
    const auto query = dataset_->IndexOf(id);
    if (!query) throw Error(ErrorCode::kNotFound, "unknown instance id: " + id);
    if (k < 1) throw Error(ErrorCode::kContract, "k must be >= 1");

    std::vector<std::pair<double, size_t>> scored;
    scored.reserve(features_.size());
    for (size_t i = 0; i < features_.size(); ++i) {
      if (i == *query) continue;
      scored.emplace_back(CosineSimilarity(features_[*query].combined, features_[i].combined), i);
    }
    const size_t m = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    std::vector<SimilarQuestion> out;
    for (size_t r = 0; r < m; ++r) {
      const Instance& inst = dataset_->instances()[scored[r].second];
      SimilarQuestion sq{inst.id, scored[r].first, std::nullopt, false};
      if (evals) {
        sq.eval = evals(inst);
        sq.predicted_correct = sq.eval && sq.eval->em == 1;
      }
      out.push_back(std::move(sq));
    }
    return out;
  }

 private:
  DatasetHandle dataset_;
  ClassStatistics class_stats_;
  std::vector<std::string> frequent_vocab_;
  std::vector<QuestionFeatures> features_;
};

}  // namespace qaprobe
