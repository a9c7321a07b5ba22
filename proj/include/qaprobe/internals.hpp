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
#include <queue>
#include <string>
#include <vector>

#include "qaprobe/error.hpp"
#include "qaprobe/model_adapter.hpp"
#include "qaprobe/tokenizer.hpp"

namespace qaprobe {

struct AttentionView {
  std::vector<std::vector<double>> matrix;
  std::vector<std::string> row_labels;     // context tokens
  std::vector<std::string> column_labels;  // question tokens
};

// Numerically stable softmax (max-subtracted).
inline std::vector<double> Softmax(const std::vector<double>& v) {
  if (v.empty()) return {};
  const double hi = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - hi);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

inline AttentionView MakeAttentionView(const ModelOutput& output, bool normalize) {
  AttentionView view{output.attention, output.ctx_tokens, output.q_tokens};
  if (normalize) {
    for (auto& row : view.matrix) row = Softmax(row);
  }
  return view;
}

struct ScoredToken {
  std::string token;
  size_t index = 0;
  double score = 0.0;

  bool operator==(const ScoredToken&) const = default;
};

// Highest scores first; equal scores keep the lower index first.
inline std::vector<ScoredToken> TopKOutputTokens(const std::vector<double>& scores,
                                                 const std::vector<std::string>& tokens, size_t k) {
  if (scores.size() != tokens.size()) {
    throw Error(ErrorCode::kContract, "scores and tokens differ in length (" + std::to_string(scores.size()) +
                                          " vs " + std::to_string(tokens.size()) + ")");
  }
  if (k < 1) throw Error(ErrorCode::kContract, "k must be >= 1");
  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t m = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                    [&](size_t a, size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  std::vector<ScoredToken> out;
  for (size_t i = 0; i < m; ++i) out.push_back({tokens[order[i]], order[i], scores[order[i]]});
  return out;
}

inline constexpr int kNoAnswerIndex = -1;
inline constexpr double kNoAnswerLogitClamp = 30.0;
inline constexpr size_t kDefaultMaxAnswerLen = 30;

struct SpanCandidate {
  int start_tok = kNoAnswerIndex;
  int end_tok = kNoAnswerIndex;
  double score = 0.0;
  std::string text;
  bool is_no_answer = false;

  bool operator==(const SpanCandidate&) const = default;
};

inline double NoAnswerScore(double no_answer_prob) {
  const double logit = std::log(no_answer_prob) - std::log1p(-no_answer_prob);
  if (std::isnan(logit)) return 0.0;
  return std::clamp(logit, -kNoAnswerLogitClamp, kNoAnswerLogitClamp);
}

// Total candidate order: score descending, then start, then end ascending.
// The no-answer sentinel start of -1 puts it ahead of spans it ties with.
inline bool CandidateBefore(const SpanCandidate& a, const SpanCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.start_tok != b.start_tok) return a.start_tok < b.start_tok;
  return a.end_tok < b.end_tok;
}

// Top-k spans under additive start+end scoring, plus the no-answer option
// placed by its logit score. Returns min(k, #spans) + 1 candidates.
inline std::vector<SpanCandidate> EnumerateSpanCandidates(const ModelOutput& output, size_t k,
                                                          size_t max_answer_len = kDefaultMaxAnswerLen) {
  if (k < 1) throw Error(ErrorCode::kContract, "k must be >= 1");
  if (max_answer_len < 1) throw Error(ErrorCode::kContract, "max_answer_len must be >= 1");
  const size_t n = std::min(output.start_scores.size(), output.end_scores.size());

  struct Scored {
    double score;
    int start;
    int end;
  };
  auto before = [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
  };
  // Worst of the retained k sits on top.
  std::priority_queue<Scored, std::vector<Scored>, decltype(before)> heap(before);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < std::min(n, i + max_answer_len); ++j) {
      Scored s{output.start_scores[i] + output.end_scores[j], static_cast<int>(i), static_cast<int>(j)};
      if (heap.size() < k) {
        heap.push(s);
      } else if (before(s, heap.top())) {
        heap.pop();
        heap.push(s);
      }
    }
  }

  std::vector<SpanCandidate> out;
  out.reserve(heap.size() + 1);
  while (!heap.empty()) {
    const Scored s = heap.top();
    heap.pop();
    std::string text;
    if (output.ctx_tokens.size() >= n) {
      text = JoinTokens(output.ctx_tokens, static_cast<size_t>(s.start), static_cast<size_t>(s.end) + 1);
    }
    out.push_back({s.start, s.end, s.score, std::move(text), false});
  }
  std::reverse(out.begin(), out.end());

  SpanCandidate none{kNoAnswerIndex, kNoAnswerIndex, NoAnswerScore(output.no_answer_prob), "", true};
  out.insert(std::upper_bound(out.begin(), out.end(), none, CandidateBefore), std::move(none));
  return out;
}

// Softmax over the returned candidates' scores, for certainty display.
inline std::vector<double> CandidateProbabilities(const std::vector<SpanCandidate>& candidates) {
  std::vector<double> scores;
  for (const auto& c : candidates) scores.push_back(c.score);
  return Softmax(scores);
}

}  // namespace qaprobe
