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

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaprobe/adversarial.hpp"
#include "qaprobe/dataset.hpp"
#include "qaprobe/embedding.hpp"
#include "qaprobe/evaluation.hpp"
#include "qaprobe/internals.hpp"
#include "qaprobe/model_adapter.hpp"
#include "qaprobe/question_bias.hpp"
#include "qaprobe/tokenizer.hpp"

// JSON encodings of API payloads. Shapes are pinned by docs/schemas/.
namespace qaprobe::json {

using nlohmann::json;

inline json ToJson(const EvalScore& s) { return {{"em", s.em}, {"f1", s.f1}}; }

inline json ToJson(const std::optional<EvalScore>& s) { return s ? ToJson(*s) : json(nullptr); }

inline json ToJson(const Answer& a) {
  return {{"text", a.text},
          {"char_start", a.char_start},
          {"char_end", a.char_start + text::DecodeUtf8(a.text).size()}};
}

inline json ToJson(const Token& t) {
  return {{"text", t.text}, {"char_start", t.char_start}, {"char_end", t.char_end}, {"is_oov", t.is_oov}};
}

inline json ToJson(const TokenizedView& v) {
  json tokens = json::array();
  for (const auto& t : v.tokens) tokens.push_back(ToJson(t));
  return {{"mode", v.mode == TokenMode::kOriginal ? "original" : "preprocessed"}, {"tokens", std::move(tokens)}};
}

inline json ToJson(const Instance& inst) {
  json golds = json::array();
  for (const auto& a : inst.gold_answers) golds.push_back(ToJson(a));
  json plausible = json::array();
  for (const auto& a : inst.plausible_answers) plausible.push_back(ToJson(a));
  return {{"id", inst.id},
          {"title", inst.title},
          {"context", inst.context_raw},
          {"question", inst.question_raw},
          {"gold_answers", std::move(golds)},
          {"plausible_answers", std::move(plausible)},
          {"is_impossible", inst.is_impossible},
          {"offsets_valid", inst.offsets_valid}};
}

inline json ToJson(const DatasetStats& s, bool with_predictions) {
  json j = {{"total", s.total}, {"answerable", s.answerable}, {"unanswerable", s.unanswerable}};
  if (with_predictions) {
    j["evaluated"] = s.evaluated;
    j["correct"] = s.correct;
    j["incorrect"] = s.incorrect;
    j["mean_em"] = s.mean_em;
    j["mean_f1"] = s.mean_f1;
  }
  return j;
}

inline json ToJson(const Neighbor& n) { return {{"word", n.word}, {"similarity", n.similarity}}; }

inline json ToJson(const ProjectedWord& p) { return {{"word", p.word}, {"x", p.x}, {"y", p.y}}; }

inline json ToJson(const ScoredToken& t) {
  return {{"token", t.token}, {"index", t.index}, {"score", t.score}};
}

inline json ToJson(const SpanCandidate& c) {
  return {{"start_tok", c.start_tok},
          {"end_tok", c.end_tok},
          {"score", c.score},
          {"text", c.text},
          {"is_no_answer", c.is_no_answer}};
}

inline json ToJson(const AttentionView& v) {
  return {{"matrix", v.matrix}, {"row_labels", v.row_labels}, {"column_labels", v.column_labels}};
}

inline json ToJson(const SimilarQuestion& s) {
  return {{"id", s.instance_id},
          {"similarity", s.similarity},
          {"eval", ToJson(s.eval)},
          {"predicted_correct", s.predicted_correct}};
}

inline json ToJson(const PerturbationResult& r) {
  return {{"field", FieldName(r.field)},
          {"original_text", r.original_text},
          {"perturbed_text", r.perturbed_text},
          {"original_tokens", r.original_tokens},
          {"perturbed_tokens", r.perturbed_tokens},
          {"original_answer", r.original_output.answer_text},
          {"model_output", ModelOutputToJson(r.model_output)},
          {"eval_before", ToJson(r.eval_before)},
          {"eval_after", ToJson(r.eval_after)},
          {"delta_em", r.delta_em},
          {"delta_f1", r.delta_f1}};
}

}  // namespace qaprobe::json
