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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaprobe/adversarial.hpp"
#include "qaprobe/dataset.hpp"
#include "qaprobe/embedding.hpp"
#include "qaprobe/error.hpp"
#include "qaprobe/evaluation.hpp"
#include "qaprobe/internals.hpp"
#include "qaprobe/model_adapter.hpp"
#include "qaprobe/question_bias.hpp"
#include "qaprobe/serialization.hpp"
#include "qaprobe/tokenizer.hpp"

namespace qaprobe {

struct ServiceConfig {
  std::string dataset_path;
  std::string embeddings_path;  // optional
  std::string rules_path;       // optional; created on first write
  std::string cache_path;       // optional prediction cache file
  std::string ui_dir;           // optional static bundle
  std::string model_endpoint;
  bool mock_mode = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  size_t top_k = 10;
  size_t max_answer_len = kDefaultMaxAnswerLen;
  size_t frequent_vocab_size = kDefaultFrequentVocabSize;
  double global_weight = 1.0;
  int model_timeout_ms = 5000;
  int model_retries = 2;
  int model_max_in_flight = 8;
  bool model_attention_row_normalized = false;

  void Validate() const {
    if (dataset_path.empty()) throw Error(ErrorCode::kContract, "dataset path is required");
    if (!mock_mode && model_endpoint.empty()) {
      throw Error(ErrorCode::kContract, "a model endpoint is required unless mock mode is on");
    }
    if (max_answer_len < 1 || top_k < 1) {
      throw Error(ErrorCode::kContract, "top_k and max_answer_len must be >= 1");
    }
  }
};

// Model outputs keyed by (instance id, exact context, exact question), so
// perturbed queries never shadow the originals. Optionally mirrored to an
// append-only JSON-lines file that is replayed on startup.
class PredictionCache {
 public:
  explicit PredictionCache(std::string path = {}) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        entries_[Key(j.at("id").get<std::string>(), j.at("context").get<std::string>(),
                      j.at("question").get<std::string>())] = ModelOutputFromJson(j.at("output"));
      } catch (const std::exception&) {
        // A torn trailing line from an interrupted write; later entries win.
      }
    }
  }

  static std::string Key(std::string_view id, std::string_view context, std::string_view question) {
    return nlohmann::json::array({id, context, question}).dump();
  }

  std::optional<ModelOutput> Get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void Put(const std::string& key, const ModelOutput& out) {
    std::unique_lock lock(mutex_);
    entries_[key] = out;
    if (path_.empty()) return;
    const auto parts = nlohmann::json::parse(key);
    std::ofstream file(path_, std::ios::app);
    file << nlohmann::json{{"id", parts[0]}, {"context", parts[1]}, {"question", parts[2]},
                           {"output", ModelOutputToJson(out)}}
                .dump()
         << "\n";
  }

  size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

 private:
  std::string path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, ModelOutput> entries_;
};

enum class CorrectnessFilter { kAll, kCorrect, kIncorrect };
enum class AnswerableFilter { kAll, kYes, kNo };

struct InstanceFilter {
  CorrectnessFilter correctness = CorrectnessFilter::kAll;
  AnswerableFilter answerable = AnswerableFilter::kAll;
  std::string text_query;
};

inline constexpr size_t kMaxPageLimit = 1000;
inline constexpr size_t kListingQuestionChars = 120;

// Maps each model token onto the context by scanning forward from the end
// of the previous match, exact first and then case-insensitive. Tokens that
// cannot be placed map to nullopt and do not move the cursor.
inline std::vector<std::optional<std::pair<size_t, size_t>>> AlignTokens(std::string_view source,
                                                                          const std::vector<std::string>& tokens) {
  const std::u32string hay = text::DecodeUtf8(source);
  std::u32string hay_lower = hay;
  for (auto& c : hay_lower) c = text::ToLower(c);
  std::vector<std::optional<std::pair<size_t, size_t>>> out;
  size_t cursor = 0;
  for (const auto& tok : tokens) {
    std::u32string needle = text::DecodeUtf8(tok);
    if (needle.empty()) {
      out.emplace_back(std::nullopt);
      continue;
    }
    size_t pos = hay.find(needle, cursor);
    if (pos == std::u32string::npos) {
      for (auto& c : needle) c = text::ToLower(c);
      pos = hay_lower.find(needle, cursor);
    }
    if (pos == std::u32string::npos) {
      out.emplace_back(std::nullopt);
      continue;
    }
    out.emplace_back(std::make_pair(pos, pos + needle.size()));
    cursor = pos + needle.size();
  }
  return out;
}

class Service {
 public:
  // Loads every resource named by the config. A non-null model overrides
  // the configured endpoint.
  Service(ServiceConfig config, std::shared_ptr<QaModel> model)
      : config_(std::move(config)), model_(std::move(model)), cache_(config_.cache_path) {
    if (!model_) throw Error(ErrorCode::kContract, "service needs a model");
    dataset_ = LoadSquad(config_.dataset_path);
    if (!config_.embeddings_path.empty()) {
      embeddings_ = std::make_shared<const EmbeddingTable>(LoadEmbeddings(config_.embeddings_path));
      vocabulary_ = embeddings_->VocabularySet();
    }
    if (!config_.rules_path.empty()) {
      rules_ = std::filesystem::exists(config_.rules_path)
                   ? std::make_unique<RuleLibrary>(LoadRuleLibrary(config_.rules_path), config_.rules_path)
                   : std::make_unique<RuleLibrary>(std::vector<AdversarialRule>{}, config_.rules_path);
    } else {
      rules_ = std::make_unique<RuleLibrary>();
    }
    questions_ = std::make_unique<QuestionIndex>(dataset_, config_.frequent_vocab_size, config_.global_weight);
  }

  ~Service() {
    std::lock_guard lock(precompute_mutex_);
    if (precompute_thread_.joinable()) precompute_thread_.join();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const { return config_; }
  const Dataset& dataset() const { return *dataset_; }
  const QuestionIndex& questions() const { return *questions_; }
  RuleLibrary& rules() { return *rules_; }
  QaModel& model() { return *model_; }

  // ---- model access -------------------------------------------------------

  // Cached, de-duplicated model call. Concurrent callers asking for the same
  // key share one in-flight request.
  ModelOutput Predict(const std::string& id, std::string_view context, std::string_view question) {
    const std::string key = PredictionCache::Key(id, context, question);
    if (auto hit = cache_.Get(key)) return *hit;

    std::shared_future<ModelOutput> pending;
    std::optional<std::promise<ModelOutput>> owner;
    {
      std::lock_guard lock(inflight_mutex_);
      if (auto it = inflight_.find(key); it != inflight_.end()) {
        pending = it->second;
      } else {
        owner.emplace();
        pending = owner->get_future().share();
        inflight_.emplace(key, pending);
      }
    }
    if (owner) {
      try {
        ModelOutput out = model_->Predict(context, question);
        ValidateModelOutput(out, model_->attention_row_normalized());
        cache_.Put(key, out);
        owner->set_value(std::move(out));
      } catch (...) {
        owner->set_exception(std::current_exception());
      }
      std::lock_guard lock(inflight_mutex_);
      inflight_.erase(key);
    }
    return pending.get();
  }

  ModelOutput PredictInstance(const Instance& inst) {
    try {
      ModelOutput out = Predict(inst.id, inst.context_raw, inst.question_raw);
      std::lock_guard lock(errors_mutex_);
      errors_.erase(inst.id);
      return out;
    } catch (const std::exception& e) {
      std::lock_guard lock(errors_mutex_);
      errors_[inst.id] = e.what();
      throw;
    }
  }

  std::optional<EvalScore> CachedEval(const Instance& inst) const {
    auto out = cache_.Get(PredictionCache::Key(inst.id, inst.context_raw, inst.question_raw));
    if (!out) return std::nullopt;
    return Evaluate(out->answer_text, inst.GoldTexts(), inst.is_impossible);
  }

  // Queries the model on a cache miss; nullopt when the model fails.
  std::optional<EvalScore> LazyEval(const Instance& inst) {
    try {
      const ModelOutput out = PredictInstance(inst);
      return Evaluate(out.answer_text, inst.GoldTexts(), inst.is_impossible);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  std::optional<std::string> ModelError(const std::string& id) const {
    std::lock_guard lock(errors_mutex_);
    auto it = errors_.find(id);
    if (it == errors_.end()) return std::nullopt;
    return it->second;
  }

  // ---- precompute ---------------------------------------------------------

  // Starts a background pass filling the cache for every instance. Cached
  // instances cost no model call, so reruns are cheap. While a pass is
  // running this only reports its status.
  nlohmann::json StartPrecompute(size_t parallelism) {
    if (parallelism < 1) throw Error(ErrorCode::kContract, "parallelism must be >= 1");
    std::lock_guard lock(precompute_mutex_);
    if (!precompute_running_) {
      if (precompute_thread_.joinable()) precompute_thread_.join();
      precompute_running_ = true;
      precompute_done_ = 0;
      precompute_failed_ = 0;
      precompute_finished_ = false;
      precompute_thread_ = std::thread([this, parallelism] { RunPrecompute(parallelism); });
    }
    return PrecomputeStatusLocked();
  }

  nlohmann::json PrecomputeStatus() const {
    std::lock_guard lock(precompute_mutex_);
    return PrecomputeStatusLocked();
  }

  void WaitForPrecompute() {
    std::lock_guard lock(precompute_mutex_);
    if (precompute_thread_.joinable()) precompute_thread_.join();
  }

  // ---- browsing -----------------------------------------------------------

  nlohmann::json SummarizeInstance(const Instance& inst) const {
    std::u32string q = text::DecodeUtf8(inst.question_raw);
    if (q.size() > kListingQuestionChars) q.resize(kListingQuestionChars);
    const auto eval = CachedEval(inst);
    const auto err = ModelError(inst.id);
    return {{"id", inst.id},
            {"question", text::EncodeUtf8(q)},
            {"is_impossible", inst.is_impossible},
            {"evaluated", eval.has_value()},
            {"em", eval ? nlohmann::json(eval->em) : nlohmann::json(nullptr)},
            {"f1", eval ? nlohmann::json(eval->f1) : nlohmann::json(nullptr)},
            {"correct", eval && eval->em == 1},
            {"error", err ? nlohmann::json(*err) : nlohmann::json(nullptr)}};
  }

  // Correctness comes from cached predictions only; unevaluated instances
  // match neither "correct" nor "incorrect".
  nlohmann::json ListInstances(const InstanceFilter& filter, size_t offset, size_t limit) const {
    if (limit < 1 || limit > kMaxPageLimit) {
      throw Error(ErrorCode::kContract, "limit must be in [1, " + std::to_string(kMaxPageLimit) + "]");
    }
    const std::string needle = text::ToLowerUtf8(filter.text_query);
    std::vector<const Instance*> matched;
    for (const Instance& inst : dataset_->instances()) {
      if (filter.answerable == AnswerableFilter::kYes && inst.is_impossible) continue;
      if (filter.answerable == AnswerableFilter::kNo && !inst.is_impossible) continue;
      if (filter.correctness != CorrectnessFilter::kAll) {
        const auto eval = CachedEval(inst);
        if (!eval) continue;
        if ((eval->em == 1) != (filter.correctness == CorrectnessFilter::kCorrect)) continue;
      }
      if (!needle.empty() && text::ToLowerUtf8(inst.question_raw).find(needle) == std::string::npos) continue;
      matched.push_back(&inst);
    }
    if (offset > matched.size()) {
      throw Error(ErrorCode::kContract, "offset " + std::to_string(offset) + " beyond " +
                                            std::to_string(matched.size()) + " results");
    }
    nlohmann::json items = nlohmann::json::array();
    for (size_t i = offset; i < std::min(matched.size(), offset + limit); ++i) {
      items.push_back(SummarizeInstance(*matched[i]));
    }
    return {{"total", matched.size()}, {"offset", offset}, {"limit", limit}, {"items", std::move(items)}};
  }

  nlohmann::json InstanceDetail(const std::string& id) {
    const Instance& inst = dataset_->Get(id);
    nlohmann::json out;
    out["instance"] = json::ToJson(inst);

    nlohmann::json views;
    for (const auto& [name, raw] : {std::pair{"context", &inst.context_raw}, std::pair{"question", &inst.question_raw}}) {
      views[name] = {{"original", json::ToJson(MarkOov(Tokenize(*raw, TokenMode::kOriginal), vocabulary_))},
                     {"preprocessed", json::ToJson(MarkOov(Tokenize(*raw, TokenMode::kPreprocessed), vocabulary_))}};
    }

    nlohmann::json gold_ranges = nlohmann::json::array();
    if (inst.offsets_valid) {
      for (const Answer& a : inst.gold_answers) {
        gold_ranges.push_back({{"start", a.char_start}, {"end", a.char_start + text::DecodeUtf8(a.text).size()}});
      }
    }
    out["highlights"] = {{"gold", std::move(gold_ranges)}, {"predicted", nullptr}};

    try {
      const ModelOutput pred = PredictInstance(inst);
      const EvalScore eval = Evaluate(pred.answer_text, inst.GoldTexts(), inst.is_impossible);
      const auto ctx_align = AlignTokens(inst.context_raw, pred.ctx_tokens);
      const auto q_align = AlignTokens(inst.question_raw, pred.q_tokens);
      auto align_json = [](const std::vector<std::string>& toks, const auto& align) {
        nlohmann::json arr = nlohmann::json::array();
        for (size_t i = 0; i < toks.size(); ++i) {
          arr.push_back({{"text", toks[i]},
                         {"range", align[i] ? nlohmann::json{{"start", align[i]->first}, {"end", align[i]->second}}
                                            : nlohmann::json(nullptr)}});
        }
        return arr;
      };
      views["context"]["model"] = align_json(pred.ctx_tokens, ctx_align);
      views["question"]["model"] = align_json(pred.q_tokens, q_align);
      if (pred.span && ctx_align[pred.span->start_tok] && ctx_align[pred.span->end_tok]) {
        out["highlights"]["predicted"] = {{"start", ctx_align[pred.span->start_tok]->first},
                                          {"end", ctx_align[pred.span->end_tok]->second}};
      }
      out["model_output"] = ModelOutputToJson(pred);
      out["eval"] = json::ToJson(eval);
      out["no_answer_prob"] = pred.no_answer_prob;
      out["model_error"] = nullptr;
    } catch (const std::exception& e) {
      views["context"]["model"] = nullptr;
      views["question"]["model"] = nullptr;
      out["model_output"] = nullptr;
      out["eval"] = nullptr;
      out["no_answer_prob"] = nullptr;
      out["model_error"] = e.what();
    }
    out["views"] = std::move(views);
    return out;
  }

  nlohmann::json Stats() const {
    std::unordered_map<std::string, EvalScore> evals;
    for (const Instance& inst : dataset_->instances()) {
      if (auto e = CachedEval(inst)) evals.emplace(inst.id, *e);
    }
    auto j = json::ToJson(ComputeDatasetStats(*dataset_, &evals), true);
    j["validation_warnings"] = dataset_->warnings().size();
    return j;
  }

  nlohmann::json Health() const {
    return {{"status", "ok"},
            {"model", model_->name()},
            {"instances", dataset_->size()},
            {"embeddings", embeddings_ ? embeddings_->size() : 0},
            {"rules", rules_->All().size()},
            {"cached_predictions", cache_.size()}};
  }

  // ---- embeddings ---------------------------------------------------------

  nlohmann::json Neighbors(const std::string& word, size_t k, const std::string& scope,
                           const std::string& instance_id) const {
    const EmbeddingTable& table = RequireEmbeddings();
    std::vector<Neighbor> result;
    if (scope == "context") {
      if (instance_id.empty()) throw Error(ErrorCode::kContract, "scope=context needs an instance id");
      const auto words = ContextVocabulary(table, dataset_->Get(instance_id).context_raw);
      result = NearestNeighbors(table, word, k, &words);
    } else if (scope.empty() || scope == "vocabulary") {
      result = NearestNeighbors(table, word, k);
    } else {
      throw Error(ErrorCode::kContract, "scope must be 'context' or 'vocabulary'");
    }
    nlohmann::json items = nlohmann::json::array();
    for (const auto& n : result) items.push_back(json::ToJson(n));
    return {{"query", text::ToLowerUtf8(word)},
            {"scope", scope.empty() ? "vocabulary" : scope},
            {"k", k},
            {"neighbors", std::move(items)}};
  }

  nlohmann::json Project(const std::vector<std::string>& words) const {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : Project2D(RequireEmbeddings(), words)) points.push_back(json::ToJson(p));
    return {{"points", std::move(points)}};
  }

  // ---- internals ----------------------------------------------------------

  nlohmann::json Internals(const std::string& id, size_t k, size_t max_len) {
    const Instance& inst = dataset_->Get(id);
    const ModelOutput out = PredictInstance(inst);
    const auto candidates = EnumerateSpanCandidates(out, k, max_len);
    const auto probs = CandidateProbabilities(candidates);
    nlohmann::json cand_json = nlohmann::json::array();
    for (size_t i = 0; i < candidates.size(); ++i) {
      auto c = json::ToJson(candidates[i]);
      c["probability"] = probs[i];
      cand_json.push_back(std::move(c));
    }
    auto tokens_json = [](const std::vector<ScoredToken>& v) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& t : v) arr.push_back(json::ToJson(t));
      return arr;
    };
    return {{"id", id},
            {"attention", json::ToJson(MakeAttentionView(out, false))},
            {"attention_normalized", json::ToJson(MakeAttentionView(out, true))},
            {"top_start", tokens_json(TopKOutputTokens(out.start_scores, out.ctx_tokens, k))},
            {"top_end", tokens_json(TopKOutputTokens(out.end_scores, out.ctx_tokens, k))},
            {"candidates", std::move(cand_json)},
            {"no_answer_prob", out.no_answer_prob}};
  }

  // ---- question bias ------------------------------------------------------

  nlohmann::json Similar(const std::string& id, size_t k) {
    const auto result = questions_->Similar(id, k, [this](const Instance& inst) { return LazyEval(inst); });
    nlohmann::json items = nlohmann::json::array();
    for (const auto& s : result) items.push_back(json::ToJson(s));
    return {{"id", id}, {"k", k}, {"similar", std::move(items)}};
  }

  // ---- adversarial --------------------------------------------------------

  nlohmann::json Edit(const std::string& id, TextField field, size_t token_index, const std::string& replacement,
                      std::string session_id) {
    const Instance& inst = dataset_->Get(id);
    auto result = ManualEdit(inst, field, token_index, replacement, PredictorFor(id));
    auto payload = json::ToJson(result);
    session_id = RecordInSession(std::move(session_id), {{"kind", "edit"}, {"instance_id", id}, {"result", payload}});
    return {{"session_id", session_id}, {"instance_id", id}, {"result", std::move(payload)}};
  }

  nlohmann::json ApplyRuleTo(const std::string& rule_id, const std::string& id, std::string session_id) {
    const auto rule = rules_->Find(rule_id);
    if (!rule) throw Error(ErrorCode::kNotFound, "unknown rule id: " + rule_id);
    const Instance& inst = dataset_->Get(id);
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : ApplyRule(*rule, inst, tagger_, PredictorFor(id))) results.push_back(json::ToJson(r));
    session_id = RecordInSession(std::move(session_id),
                                 {{"kind", "rule"}, {"rule_id", rule_id}, {"instance_id", id}, {"results", results}});
    return {{"session_id", session_id}, {"rule_id", rule_id}, {"instance_id", id}, {"results", std::move(results)}};
  }

  nlohmann::json Session(const std::string& session_id) const {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session: " + session_id);
    return {{"session_id", session_id}, {"entries", it->second}};
  }

  nlohmann::json ListRules() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rules_->All()) arr.push_back(RuleToJson(r));
    return {{"rules", std::move(arr)}};
  }

  nlohmann::json PutRule(const nlohmann::json& body) {
    auto rule = RuleFromJson(body);
    const bool created = rules_->Upsert(rule);
    return {{"created", created}, {"rule", RuleToJson(rule)}};
  }

  nlohmann::json DeleteRule(const std::string& rule_id) {
    if (!rules_->Remove(rule_id)) throw Error(ErrorCode::kNotFound, "unknown rule id: " + rule_id);
    return {{"deleted", rule_id}};
  }

 private:
  // Perturbed texts are cached under the originating instance id.
  Predictor PredictorFor(const std::string& id) {
    return [this, id](std::string_view ctx, std::string_view q) { return Predict(id, ctx, q); };
  }

  const EmbeddingTable& RequireEmbeddings() const {
    if (!embeddings_) throw Error(ErrorCode::kNotFound, "no embeddings loaded");
    return *embeddings_;
  }

  std::string RecordInSession(std::string session_id, nlohmann::json entry) {
    std::lock_guard lock(sessions_mutex_);
    if (session_id.empty() || !sessions_.contains(session_id)) {
      if (session_id.empty()) session_id = "s" + std::to_string(++session_counter_);
      sessions_[session_id] = nlohmann::json::array();
    }
    sessions_[session_id].push_back(std::move(entry));
    return session_id;
  }

  void RunPrecompute(size_t parallelism) {
    std::atomic<size_t> next{0};
    {
      std::vector<std::jthread> workers;
      for (size_t w = 0; w < parallelism; ++w) {
        workers.emplace_back([&] {
          for (size_t i = next++; i < dataset_->size(); i = next++) {
            try {
              PredictInstance(dataset_->instances()[i]);
              ++precompute_done_;
            } catch (const std::exception&) {
              ++precompute_failed_;
            }
          }
        });
      }
    }
    precompute_finished_ = true;
    precompute_running_ = false;
  }

  nlohmann::json PrecomputeStatusLocked() const {
    nlohmann::json failed = nlohmann::json::array();
    {
      std::lock_guard lock(errors_mutex_);
      for (const Instance& inst : dataset_->instances()) {
        if (auto it = errors_.find(inst.id); it != errors_.end()) {
          failed.push_back({{"id", inst.id}, {"error", it->second}});
        }
      }
    }
    return {{"running", precompute_running_.load()},
            {"finished", precompute_finished_.load()},
            {"done", precompute_done_.load()},
            {"failed", precompute_failed_.load()},
            {"total", dataset_->size()},
            {"errors", std::move(failed)}};
  }

  ServiceConfig config_;
  std::shared_ptr<QaModel> model_;
  PredictionCache cache_;
  DatasetHandle dataset_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  Vocabulary vocabulary_;
  std::unique_ptr<RuleLibrary> rules_;
  std::unique_ptr<QuestionIndex> questions_;
  HeuristicPosTagger tagger_;

  std::mutex inflight_mutex_;
  std::unordered_map<std::string, std::shared_future<ModelOutput>> inflight_;

  mutable std::mutex errors_mutex_;
  std::unordered_map<std::string, std::string> errors_;

  mutable std::mutex precompute_mutex_;
  std::thread precompute_thread_;
  std::atomic<bool> precompute_running_{false};
  std::atomic<bool> precompute_finished_{false};
  std::atomic<size_t> precompute_done_{0};
  std::atomic<size_t> precompute_failed_{0};

  mutable std::mutex sessions_mutex_;
  std::unordered_map<std::string, nlohmann::json> sessions_;
  size_t session_counter_ = 0;
};

}  // namespace qaprobe
