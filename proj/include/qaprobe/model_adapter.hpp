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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaprobe/error.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/tokenizer.hpp"

namespace qaprobe {

struct TokenSpan {
  size_t start_tok = 0;
  size_t end_tok = 0;  // inclusive

  bool operator==(const TokenSpan&) const = default;
};

// Everything the target model reports for one (context, question) pair.
// Scores are raw; any softmaxing happens at display time.
struct ModelOutput {
  std::string answer_text;  // empty means the model predicts "no answer"
  std::optional<TokenSpan> span;
  double no_answer_prob = 0.0;
  std::vector<double> start_scores;
  std::vector<double> end_scores;
  std::vector<std::vector<double>> attention;  // [ctx_tokens][q_tokens]
  std::vector<std::string> ctx_tokens;
  std::vector<std::string> q_tokens;

  bool operator==(const ModelOutput&) const = default;
};

inline constexpr double kRowSumTolerance = 1e-4;

// Throws kProtocol naming the first offending field. Shapes are never
// repaired.
inline void ValidateModelOutput(const ModelOutput& out, bool attention_row_normalized) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kProtocol, "field '" + field + "': " + why);
  };
  const size_t n_ctx = out.ctx_tokens.size();
  const size_t n_q = out.q_tokens.size();
  if (!std::isfinite(out.no_answer_prob) || out.no_answer_prob < 0.0 || out.no_answer_prob > 1.0) {
    fail("no_answer_prob", "must be a finite value in [0, 1]");
  }
  if (out.start_scores.size() != n_ctx) {
    fail("start_scores", "length " + std::to_string(out.start_scores.size()) + " != " +
                             std::to_string(n_ctx) + " ctx_tokens");
  }
  if (out.end_scores.size() != n_ctx) {
    fail("end_scores", "length " + std::to_string(out.end_scores.size()) + " != " +
                           std::to_string(n_ctx) + " ctx_tokens");
  }
  for (double v : out.start_scores) {
    if (!std::isfinite(v)) fail("start_scores", "non-finite value");
  }
  for (double v : out.end_scores) {
    if (!std::isfinite(v)) fail("end_scores", "non-finite value");
  }
  if (out.attention.size() != n_ctx) {
    fail("attention", "has " + std::to_string(out.attention.size()) + " rows, expected " +
                          std::to_string(n_ctx));
  }
  for (size_t i = 0; i < out.attention.size(); ++i) {
    const auto& row = out.attention[i];
    if (row.size() != n_q) {
      fail("attention", "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                            " columns, expected " + std::to_string(n_q));
    }
    double sum = 0.0;
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0) fail("attention", "entries must be finite and >= 0");
      sum += v;
    }
    if (attention_row_normalized && n_q > 0 && std::abs(sum - 1.0) > kRowSumTolerance) {
      fail("attention", "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
  if (out.span) {
    if (out.span->start_tok > out.span->end_tok || out.span->end_tok >= n_ctx) {
      fail("span", "must satisfy 0 <= start <= end < |ctx_tokens|");
    }
  }
}

// Wire format, shared by the HTTP client and the mock-model server.
inline nlohmann::json ModelOutputToJson(const ModelOutput& out) {
  nlohmann::json j;
  j["answer_text"] = out.answer_text;
  j["span"] = out.span ? nlohmann::json{{"start", out.span->start_tok}, {"end", out.span->end_tok}}
                       : nlohmann::json(nullptr);
  j["no_answer_prob"] = out.no_answer_prob;
  j["start_scores"] = out.start_scores;
  j["end_scores"] = out.end_scores;
  j["attention"] = out.attention;
  j["ctx_tokens"] = out.ctx_tokens;
  j["q_tokens"] = out.q_tokens;
  return j;
}

inline ModelOutput ModelOutputFromJson(const nlohmann::json& j) {
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(key)) {
      throw Error(ErrorCode::kProtocol, std::string("field '") + key + "': missing");
    }
    return j.at(key);
  };
  auto as_number = [](const nlohmann::json& v, const std::string& name) {
    // JSON has no NaN; null is how most encoders emit one.
    if (!v.is_number()) throw Error(ErrorCode::kProtocol, "field '" + name + "': not a number");
    return v.get<double>();
  };
  auto as_vector = [&](const char* key) {
    const auto& arr = field(key);
    if (!arr.is_array()) throw Error(ErrorCode::kProtocol, std::string("field '") + key + "': not an array");
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) v.push_back(as_number(x, key));
    return v;
  };
  auto as_strings = [&](const char* key) {
    const auto& arr = field(key);
    if (!arr.is_array()) throw Error(ErrorCode::kProtocol, std::string("field '") + key + "': not an array");
    std::vector<std::string> v;
    for (const auto& x : arr) {
      if (!x.is_string()) throw Error(ErrorCode::kProtocol, std::string("field '") + key + "': not a string");
      v.push_back(x.get<std::string>());
    }
    return v;
  };

  ModelOutput out;
  const auto& answer = field("answer_text");
  if (!answer.is_string()) throw Error(ErrorCode::kProtocol, "field 'answer_text': not a string");
  out.answer_text = answer.get<std::string>();
  const auto& span = field("span");
  if (!span.is_null()) {
    if (!span.is_object() || !span.contains("start") || !span.contains("end") ||
        !span["start"].is_number_integer() || !span["end"].is_number_integer() ||
        span["start"].get<long long>() < 0 || span["end"].get<long long>() < 0) {
      throw Error(ErrorCode::kProtocol, "field 'span': expected {start, end} non-negative integers or null");
    }
    out.span = TokenSpan{span["start"].get<size_t>(), span["end"].get<size_t>()};
  }
  out.no_answer_prob = as_number(field("no_answer_prob"), "no_answer_prob");
  out.start_scores = as_vector("start_scores");
  out.end_scores = as_vector("end_scores");
  const auto& attention = field("attention");
  if (!attention.is_array()) throw Error(ErrorCode::kProtocol, "field 'attention': not an array");
  for (const auto& row : attention) {
    if (!row.is_array()) throw Error(ErrorCode::kProtocol, "field 'attention': rows must be arrays");
    std::vector<double> r;
    for (const auto& x : row) r.push_back(as_number(x, "attention"));
    out.attention.push_back(std::move(r));
  }
  out.ctx_tokens = as_strings("ctx_tokens");
  out.q_tokens = as_strings("q_tokens");
  return out;
}

// Anything that can answer a (context, question) pair. Implementations must
// be safe to call from many threads at once.
class QaModel {
 public:
  virtual ~QaModel() = default;
  virtual ModelOutput Predict(std::string_view context, std::string_view question) = 0;
  virtual bool attention_row_normalized() const { return false; }
  virtual std::string name() const = 0;
};

// Constants of the built-in mock model.
inline constexpr size_t kMockWindow = 3;
inline constexpr size_t kMockMaxSpan = 4;
inline constexpr double kMockEpsilon = 0.01;
inline constexpr double kMockNoAnswerThreshold = 0.5;

// Deterministic lexical-overlap heuristic standing in for a neural model.
inline ModelOutput MockPredict(std::string_view context, std::string_view question) {
  const auto ctx = TokenTexts(Tokenize(context));
  const auto q = TokenTexts(Tokenize(question));
  std::vector<std::string> ctx_lower;
  std::vector<std::string> q_lower;
  for (const auto& t : ctx) ctx_lower.push_back(text::ToLowerUtf8(t));
  for (const auto& t : q) q_lower.push_back(text::ToLowerUtf8(t));
  const std::unordered_set<std::string> q_set(q_lower.begin(), q_lower.end());
  const std::unordered_set<std::string> ctx_set(ctx_lower.begin(), ctx_lower.end());

  const size_t n = ctx.size();
  std::vector<int> hit(n);
  for (size_t i = 0; i < n; ++i) hit[i] = q_set.contains(ctx_lower[i]) ? 1 : 0;

  ModelOutput out;
  out.ctx_tokens = ctx;
  out.q_tokens = q;
  out.start_scores.assign(n, 0.0);
  out.end_scores.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    // Leading window [i, i + 3) for starts, trailing window (j - 3, j] for ends.
    for (size_t k = i; k < std::min(n, i + kMockWindow); ++k) out.start_scores[i] += hit[k];
    for (size_t k = (i + 1 >= kMockWindow ? i + 1 - kMockWindow : 0); k <= i; ++k) {
      out.end_scores[i] += hit[k];
    }
  }

  out.attention.assign(n, std::vector<double>(q.size(), kMockEpsilon));
  for (size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (size_t j = 0; j < q.size(); ++j) {
      if (ctx_lower[i] == q_lower[j]) out.attention[i][j] = 1.0;
      sum += out.attention[i][j];
    }
    for (double& v : out.attention[i]) v /= sum;
  }

  size_t matched = 0;
  for (const auto& t : q_lower) matched += ctx_set.contains(t) ? 1 : 0;
  const double match_fraction =
      q.empty() ? 0.0 : static_cast<double>(matched) / static_cast<double>(q.size());
  out.no_answer_prob = std::clamp(1.0 - match_fraction, 0.0, 1.0);

  if (n == 0 || out.no_answer_prob > kMockNoAnswerThreshold) return out;

  // Best span of length <= 4; ties go to the smaller start, then smaller end.
  TokenSpan best;
  double best_score = -1.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < std::min(n, i + kMockMaxSpan); ++j) {
      const double s = out.start_scores[i] + out.end_scores[j];
      if (s > best_score) {
        best_score = s;
        best = TokenSpan{i, j};
      }
    }
  }
  out.span = best;
  out.answer_text = JoinTokens(ctx, best.start_tok, best.end_tok + 1);
  return out;
}

class MockModel : public QaModel {
 public:
  ModelOutput Predict(std::string_view context, std::string_view question) override {
    return MockPredict(context, question);
  }
  bool attention_row_normalized() const override { return true; }
  std::string name() const override { return "mock"; }
};

}  // namespace qaprobe
