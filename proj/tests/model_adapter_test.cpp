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
#include "qaprobe/model_adapter.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

namespace qaprobe {
namespace {

ModelOutput SmallValidOutput() {
  ModelOutput out;
  out.answer_text = "b c";
  out.span = TokenSpan{1, 2};
  out.no_answer_prob = 0.25;
  out.ctx_tokens = {"a", "b", "c", "d"};
  out.q_tokens = {"b", "c"};
  out.start_scores = {0.1, 2.0, -1.0, 0.0};
  out.end_scores = {0.0, 0.5, 1.5, -0.25};
  out.attention = {{0.5, 0.5}, {0.9, 0.1}, {0.2, 0.8}, {1.0, 0.0}};
  return out;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kContract;
}

std::string MessageOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(MockPredict, WindowCountsOnRepeatedToken) {
  const ModelOutput out = MockPredict("a b c b", "b");
  EXPECT_EQ(out.start_scores, (std::vector<double>{1, 2, 1, 1}));
  EXPECT_EQ(out.end_scores, (std::vector<double>{0, 1, 1, 2}));
  ASSERT_TRUE(out.span.has_value());
  EXPECT_EQ(*out.span, (TokenSpan{1, 3}));
  EXPECT_EQ(out.answer_text, "b c b");
  EXPECT_EQ(out.no_answer_prob, 0.0);
}

TEST(MockPredict, CapitalOfFrance) {
  const ModelOutput out = MockPredict("Paris is the capital of France .", "What is the capital of France ?");
  EXPECT_EQ(out.ctx_tokens, (std::vector<std::string>{"Paris", "is", "the", "capital", "of", "France", "."}));
  EXPECT_EQ(out.q_tokens, (std::vector<std::string>{"What", "is", "the", "capital", "of", "France", "?"}));
  EXPECT_EQ(out.start_scores, (std::vector<double>{2, 3, 3, 3, 2, 1, 0}));
  EXPECT_EQ(out.end_scores, (std::vector<double>{0, 1, 2, 3, 3, 3, 2}));
  EXPECT_EQ(*out.span, (TokenSpan{1, 3}));
  EXPECT_EQ(out.answer_text, "is the capital");
  EXPECT_DOUBLE_EQ(out.no_answer_prob, 2.0 / 7.0);
}

TEST(MockPredict, FullOverlapGivesDiagonalAttention) {
  const ModelOutput out = MockPredict("red green blue", "Red GREEN blue");
  EXPECT_EQ(out.no_answer_prob, 0.0);
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      const double expected = i == j ? 1.0 / 1.02 : 0.01 / 1.02;
      EXPECT_NEAR(out.attention[i][j], expected, 1e-15);
    }
  }
}

TEST(MockPredict, NoOverlapPredictsNoAnswer) {
  const ModelOutput out = MockPredict("alpha beta", "gamma delta");
  EXPECT_EQ(out.no_answer_prob, 1.0);
  EXPECT_EQ(out.answer_text, "");
  EXPECT_FALSE(out.span.has_value());
  EXPECT_EQ(out.start_scores, (std::vector<double>{0, 0}));
}

TEST(MockPredict, HalfOverlapStillAnswers) {
  // no_answer_prob of exactly 0.5 is not above the threshold.
  const ModelOutput out = MockPredict("x y z", "x q");
  EXPECT_EQ(out.no_answer_prob, 0.5);
  EXPECT_TRUE(out.span.has_value());
  EXPECT_EQ(out.answer_text, "x");
}

TEST(MockPredict, EmptyInputs) {
  const ModelOutput empty_ctx = MockPredict("", "what");
  EXPECT_TRUE(empty_ctx.ctx_tokens.empty());
  EXPECT_EQ(empty_ctx.no_answer_prob, 1.0);
  EXPECT_FALSE(empty_ctx.span.has_value());
  const ModelOutput empty_q = MockPredict("a b", "");
  EXPECT_EQ(empty_q.no_answer_prob, 1.0);
  EXPECT_EQ(empty_q.attention, (std::vector<std::vector<double>>{{}, {}}));
  EXPECT_NO_THROW(ValidateModelOutput(empty_q, true));
}

TEST(MockPredict, RandomTextsSatisfyInvariants) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> words = {"the", "The", "cat", "sat", "on", "mat", ".", "?", "x", "y", "Cat"};
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<size_t> len(0, 25);
  for (int iter = 0; iter < 500; ++iter) {
    std::string ctx;
    std::string q;
    for (size_t n = len(rng); n > 0; --n) ctx += words[pick(rng)] + " ";
    for (size_t n = len(rng) / 3; n > 0; --n) q += words[pick(rng)] + " ";
    const ModelOutput out = MockPredict(ctx, q);
    ASSERT_NO_THROW(ValidateModelOutput(out, true)) << ctx << " | " << q;
    for (const auto& row : out.attention) {
      if (row.empty()) continue;
      double sum = 0.0;
      for (double v : row) sum += v;
      ASSERT_NEAR(sum, 1.0, 1e-9);
    }
    if (out.span) {
      ASSERT_LT(out.span->end_tok - out.span->start_tok, kMockMaxSpan);
      ASSERT_FALSE(out.answer_text.empty());
    } else {
      ASSERT_TRUE(out.answer_text.empty());
    }
    ASSERT_EQ(MockPredict(ctx, q), out);
  }
}

TEST(ValidateModelOutput, AcceptsValidOutput) {
  EXPECT_NO_THROW(ValidateModelOutput(SmallValidOutput(), true));
}

TEST(ValidateModelOutput, RejectsAttentionShapeMismatch) {
  ModelOutput out = SmallValidOutput();
  out.attention.pop_back();  // 3 x 2 against 4 context tokens
  EXPECT_EQ(CodeOf([&] { ValidateModelOutput(out, false); }), ErrorCode::kProtocol);
  EXPECT_NE(MessageOf([&] { ValidateModelOutput(out, false); }).find("'attention'"), std::string::npos);

  out = SmallValidOutput();
  out.attention[2].push_back(0.0);
  EXPECT_NE(MessageOf([&] { ValidateModelOutput(out, false); }).find("row 2"), std::string::npos);
}

TEST(ValidateModelOutput, NamesOffendingField) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  struct Case {
    std::function<void(ModelOutput&)> mutate;
    std::string field;
  };
  const std::vector<Case> cases = {
      {[](ModelOutput& o) { o.start_scores.pop_back(); }, "'start_scores'"},
      {[](ModelOutput& o) { o.end_scores.push_back(1.0); }, "'end_scores'"},
      {[nan](ModelOutput& o) { o.start_scores[1] = nan; }, "'start_scores'"},
      {[](ModelOutput& o) { o.end_scores[0] = std::numeric_limits<double>::infinity(); }, "'end_scores'"},
      {[nan](ModelOutput& o) { o.no_answer_prob = nan; }, "'no_answer_prob'"},
      {[](ModelOutput& o) { o.no_answer_prob = 1.5; }, "'no_answer_prob'"},
      {[](ModelOutput& o) { o.attention[0][0] = -0.1; }, "'attention'"},
      {[](ModelOutput& o) { o.span = TokenSpan{2, 1}; }, "'span'"},
      {[](ModelOutput& o) { o.span = TokenSpan{3, 4}; }, "'span'"},
  };
  for (const auto& c : cases) {
    ModelOutput out = SmallValidOutput();
    c.mutate(out);
    const std::string msg = MessageOf([&] { ValidateModelOutput(out, false); });
    EXPECT_NE(msg.find(c.field), std::string::npos) << c.field << " got: " << msg;
  }
}

TEST(ValidateModelOutput, RowSumsOnlyCheckedWhenDeclared) {
  ModelOutput out = SmallValidOutput();
  out.attention[1] = {0.9, 0.2};
  EXPECT_NO_THROW(ValidateModelOutput(out, false));
  EXPECT_EQ(CodeOf([&] { ValidateModelOutput(out, true); }), ErrorCode::kProtocol);
  out.attention[1] = {0.9, 0.10009};
  EXPECT_NO_THROW(ValidateModelOutput(out, true));
}

TEST(WireFormat, RoundTrips) {
  const ModelOutput out = SmallValidOutput();
  const auto j = ModelOutputToJson(out);
  EXPECT_EQ(j["span"], (nlohmann::json{{"start", 1}, {"end", 2}}));
  EXPECT_EQ(ModelOutputFromJson(nlohmann::json::parse(j.dump())), out);

  ModelOutput none = out;
  none.span.reset();
  none.answer_text.clear();
  const auto jn = ModelOutputToJson(none);
  EXPECT_TRUE(jn["span"].is_null());
  EXPECT_EQ(ModelOutputFromJson(jn), none);
}

TEST(WireFormat, RejectsBadPayloads) {
  auto base = ModelOutputToJson(SmallValidOutput());
  auto with = [&](const std::string& key, nlohmann::json v) {
    auto j = base;
    j[key] = std::move(v);
    return j;
  };
  auto without = [&](const std::string& key) {
    auto j = base;
    j.erase(key);
    return j;
  };
  const std::vector<std::pair<nlohmann::json, std::string>> cases = {
      {with("start_scores", {1.0, nullptr, 0.0, 0.0}), "'start_scores'"},
      {with("end_scores", "nope"), "'end_scores'"},
      {with("attention", {{0.5, "x"}}), "'attention'"},
      {with("attention", {1.0}), "'attention'"},
      {with("span", {{"start", -1}, {"end", 2}}), "'span'"},
      {with("span", {{"start", 1}}), "'span'"},
      {with("no_answer_prob", nullptr), "'no_answer_prob'"},
      {with("ctx_tokens", {1, 2}), "'ctx_tokens'"},
      {with("answer_text", 3), "'answer_text'"},
      {without("q_tokens"), "'q_tokens'"},
      {nlohmann::json::array(), "'answer_text'"},
  };
  for (const auto& [j, field] : cases) {
    try {
      ModelOutputFromJson(j);
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kProtocol);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
}

TEST(MockModel, DeclaresNormalizedAttention) {
  MockModel model;
  EXPECT_TRUE(model.attention_row_normalized());
  EXPECT_EQ(model.name(), "mock");
  EXPECT_EQ(model.Predict("a b", "b"), MockPredict("a b", "b"));
}

}  // namespace
}  // namespace qaprobe
