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
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaprobe/error.hpp"
#include "qaprobe/evaluation.hpp"
#include "qaprobe/text.hpp"

namespace qaprobe {

struct Answer {
  std::string text;
  size_t char_start = 0;  // code points into Instance::context_raw

  bool operator==(const Answer&) const = default;
};

struct Instance {
  std::string id;
  std::string title;
  std::string context_raw;
  std::string question_raw;
  std::vector<Answer> gold_answers;
  // SQuAD's plausible_answers for unanswerable questions. Never used as gold.
  std::vector<Answer> plausible_answers;
  bool is_impossible = false;
  // False when an answer offset does not slice to the answer text, or an
  // answerable question carries no answers. The instance is still loaded.
  bool offsets_valid = true;

  std::vector<std::string> GoldTexts() const {
    std::vector<std::string> out;
    for (const Answer& a : gold_answers) out.push_back(a.text);
    return out;
  }
};

struct ValidationWarning {
  std::string instance_id;
  std::string message;
};

class Dataset {
 public:
  Dataset() = default;

  // Throws kParse on duplicate ids.
  explicit Dataset(std::vector<Instance> instances, std::vector<ValidationWarning> warnings = {})
      : instances_(std::move(instances)), warnings_(std::move(warnings)) {
    for (size_t i = 0; i < instances_.size(); ++i) {
      if (!index_.emplace(instances_[i].id, i).second) {
        throw Error(ErrorCode::kParse, "duplicate instance id: " + instances_[i].id);
      }
    }
  }

  const std::vector<Instance>& instances() const { return instances_; }
  const std::vector<ValidationWarning>& warnings() const { return warnings_; }
  size_t size() const { return instances_.size(); }

  const Instance* Find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &instances_[it->second];
  }

  const Instance& Get(const std::string& id) const {
    const Instance* inst = Find(id);
    if (inst == nullptr) throw Error(ErrorCode::kNotFound, "unknown instance id: " + id);
    return *inst;
  }

  std::optional<size_t> IndexOf(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<Instance> instances_;
  std::vector<ValidationWarning> warnings_;
  std::unordered_map<std::string, size_t> index_;
};

// Loaded datasets are shared read-only between request handlers.
using DatasetHandle = std::shared_ptr<const Dataset>;

namespace internal {

inline const nlohmann::json& RequireField(const nlohmann::json& obj, const char* key,
                                          const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

inline std::vector<Answer> ParseAnswers(const nlohmann::json& list, const std::string& where) {
  std::vector<Answer> out;
  if (!list.is_array()) throw Error(ErrorCode::kParse, where + ": answers must be an array");
  for (const auto& a : list) {
    const auto& start = RequireField(a, "answer_start", where);
    const auto& text = RequireField(a, "text", where);
    if (!start.is_number_integer() || start.get<long long>() < 0 || !text.is_string()) {
      throw Error(ErrorCode::kParse, where + ": bad answer entry");
    }
    out.push_back(Answer{text.get<std::string>(), start.get<size_t>()});
  }
  return out;
}

inline bool AnswerMatchesContext(const std::u32string& context, const Answer& answer) {
  const std::u32string needle = text::DecodeUtf8(answer.text);
  return answer.char_start + needle.size() <= context.size() &&
         context.compare(answer.char_start, needle.size(), needle) == 0;
}

}  // namespace internal

// Parses the official SQuAD 2.0 layout (data -> paragraphs -> qas). A
// missing is_impossible field reads as false, which also admits v1.1 files.
inline Dataset ParseSquad(const std::string& json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }

  std::vector<Instance> instances;
  std::vector<ValidationWarning> warnings;
  const auto& data = internal::RequireField(root, "data", "root");
  if (!data.is_array()) throw Error(ErrorCode::kParse, "root: 'data' must be an array");

  for (size_t a = 0; a < data.size(); ++a) {
    const std::string art_where = "data[" + std::to_string(a) + "]";
    const auto& article = data[a];
    const std::string title = article.value("title", std::string());
    const auto& paragraphs = internal::RequireField(article, "paragraphs", art_where);
    for (size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string par_where = art_where + ".paragraphs[" + std::to_string(p) + "]";
      const auto& paragraph = paragraphs[p];
      const auto& context = internal::RequireField(paragraph, "context", par_where);
      if (!context.is_string()) throw Error(ErrorCode::kParse, par_where + ": context not a string");
      const std::u32string context_cps = text::DecodeUtf8(context.get_ref<const std::string&>());

      for (const auto& qa : internal::RequireField(paragraph, "qas", par_where)) {
        Instance inst;
        inst.title = title;
        inst.context_raw = context.get<std::string>();
        const auto& id = internal::RequireField(qa, "id", par_where);
        const auto& question = internal::RequireField(qa, "question", par_where);
        if (!id.is_string() || !question.is_string()) {
          throw Error(ErrorCode::kParse, par_where + ": qas entry needs string id and question");
        }
        inst.id = id.get<std::string>();
        inst.question_raw = question.get<std::string>();
        const std::string where = par_where + " qa " + inst.id;
        inst.is_impossible = qa.value("is_impossible", false);
        if (qa.contains("answers")) inst.gold_answers = internal::ParseAnswers(qa["answers"], where);
        if (qa.contains("plausible_answers")) {
          inst.plausible_answers = internal::ParseAnswers(qa["plausible_answers"], where);
        }
        if (inst.is_impossible && !inst.gold_answers.empty()) {
          // SQuAD 2.0 keeps these empty; anything present is plausible only.
          for (Answer& ans : inst.gold_answers) inst.plausible_answers.push_back(std::move(ans));
          inst.gold_answers.clear();
        }

        if (!inst.is_impossible && inst.gold_answers.empty()) {
          inst.offsets_valid = false;
          warnings.push_back({inst.id, "answerable question has no gold answers"});
        }
        for (const Answer& ans : inst.gold_answers) {
          if (!internal::AnswerMatchesContext(context_cps, ans)) {
            inst.offsets_valid = false;
            warnings.push_back({inst.id, "answer '" + ans.text + "' does not match context at offset " +
                                             std::to_string(ans.char_start)});
          }
        }
        instances.push_back(std::move(inst));
      }
    }
  }
  return Dataset(std::move(instances), std::move(warnings));
}

inline DatasetHandle LoadSquad(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::make_shared<const Dataset>(ParseSquad(buf.str()));
}

struct DatasetStats {
  size_t total = 0;
  size_t answerable = 0;
  size_t unanswerable = 0;
  // Populated when predictions are supplied.
  size_t evaluated = 0;
  size_t correct = 0;
  size_t incorrect = 0;
  double mean_em = 0.0;
  double mean_f1 = 0.0;
};

// Throws kContract listing every prediction id absent from the dataset.
inline DatasetStats ComputeDatasetStats(
    const Dataset& dataset,
    const std::unordered_map<std::string, EvalScore>* predictions = nullptr) {
  DatasetStats stats;
  stats.total = dataset.size();
  for (const Instance& inst : dataset.instances()) {
    (inst.is_impossible ? stats.unanswerable : stats.answerable) += 1;
  }
  if (predictions == nullptr) return stats;

  std::vector<std::string> unknown;
  for (const auto& [id, score] : *predictions) {
    if (dataset.Find(id) == nullptr) unknown.push_back(id);
  }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    std::string msg = "predictions reference unknown ids:";
    for (const auto& id : unknown) msg += " " + id;
    throw Error(ErrorCode::kContract, msg);
  }

  double em_sum = 0.0;
  double f1_sum = 0.0;
  for (const auto& [id, score] : *predictions) {
    ++stats.evaluated;
    (score.em == 1 ? stats.correct : stats.incorrect) += 1;
    em_sum += score.em;
    f1_sum += score.f1;
  }
  if (stats.evaluated > 0) {
    stats.mean_em = em_sum / static_cast<double>(stats.evaluated);
    stats.mean_f1 = f1_sum / static_cast<double>(stats.evaluated);
  }
  return stats;
}

}  // namespace qaprobe
