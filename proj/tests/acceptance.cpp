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

// Acceptance gate. Each criterion prints one PASS/FAIL line; the exit code
// is non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qaprobe/http_model.hpp"
#include "qaprobe/http_server.hpp"
#include "qaprobe/qaprobe.hpp"
#include "support/api_client.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"
#include "support/server_thread.hpp"

namespace qaprobe {
namespace {

using Clock = std::chrono::steady_clock;

class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

template <typename A, typename B>
void RequireEq(const A& got, const B& want, const std::string& what) {
  if (!(got == want)) {
    std::ostringstream msg;
    msg << what << ": got " << got << ", want " << want;
    throw Failure(msg.str());
  }
}

void RequireNear(double got, double want, double tol, const std::string& what) {
  if (!(std::fabs(got - want) <= tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    throw Failure(msg.str());
  }
}

struct Criterion {
  std::string name;
  double budget_seconds;  // 0 means untimed
  std::function<void()> body;
};

bool Run(const Criterion& c) {
  const auto t0 = Clock::now();
  std::string error;
  try {
    c.body();
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (error.empty() && c.budget_seconds > 0 && secs >= c.budget_seconds) {
    error = "took " + std::to_string(secs) + " s, budget " + std::to_string(c.budget_seconds) + " s";
  }
  std::ostringstream line;
  line.precision(3);
  line << std::fixed << (error.empty() ? "PASS" : "FAIL") << "  " << c.name << "  (" << secs << " s";
  if (c.budget_seconds > 0) line << " / " << c.budget_seconds << " s";
  line << ")";
  if (!error.empty()) line << "  " << error;
  std::cout << line.str() << std::endl;
  return error.empty();
}

// ---- EM / F1 ----------------------------------------------------------------

struct ScoreCase {
  std::string pred;
  std::vector<std::string> golds;
  bool impossible;
  int em;
  double f1;
};

const std::vector<ScoreCase>& HandcraftedCases() {
  static const std::vector<ScoreCase> cases = {
      {"the cat", {"cat"}, false, 1, 1.0},
      {"", {}, true, 1, 1.0},
      {"x", {}, true, 0, 0.0},
      {"dog", {"cat"}, false, 0, 0.0},
      {"Dog.", {"cat", "the dog"}, false, 1, 1.0},
      {"the .", {}, true, 1, 1.0},
      {"x b", {"b c"}, false, 0, 0.5},
      {"Paris, France", {"Paris, France"}, false, 1, 1.0},
      {"x y z", {"q"}, false, 0, 0.0},
      {"", {"q"}, false, 0, 0.0},
      {"b b", {"b c"}, false, 0, 0.5},
      {"b b b", {"b b"}, false, 0, 0.8},
      {"red car", {"blue", "red"}, false, 0, 2.0 / 3.0},
      {"An apple", {"apple"}, false, 1, 1.0},
      {"A", {"an"}, false, 1, 1.0},
      {"well-known", {"wellknown"}, false, 1, 1.0},
      {"The Eiffel Tower!", {"Eiffel tower"}, false, 1, 1.0},
      {"in 1793", {"1793"}, false, 0, 2.0 / 3.0},
      {"", {}, false, 1, 1.0},
      {"the", {"cat"}, false, 0, 0.0},
  };
  return cases;
}

void CheckScore(const std::string& pred, const std::vector<std::string>& golds, bool impossible,
                const std::string& label) {
  const auto [em, f1] = oracle::Score(pred, golds, impossible);
  const EvalScore s = Evaluate(pred, golds, impossible);
  RequireEq(s.em, em, label + " em for '" + pred + "'");
  RequireNear(s.f1, f1, 1e-12, label + " f1 for '" + pred + "'");
}

void EmF1OracleEquivalence() {
  for (size_t i = 0; i < HandcraftedCases().size(); ++i) {
    const auto& c = HandcraftedCases()[i];
    const std::string label = "handcrafted #" + std::to_string(i);
    CheckScore(c.pred, c.golds, c.impossible, label);
    const EvalScore s = Evaluate(c.pred, c.golds, c.impossible);
    RequireEq(s.em, c.em, label + " frozen em");
    RequireNear(s.f1, c.f1, 1e-12, label + " frozen f1");
  }
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> gold_count(0, 3);
  std::bernoulli_distribution coin(0.2);
  for (int i = 0; i < 1000; ++i) {
    const std::string pred = testing::RandomAnswer(rng);
    std::vector<std::string> golds;
    for (int g = gold_count(rng); g > 0; --g) golds.push_back(testing::RandomAnswer(rng));
    CheckScore(pred, golds, coin(rng), "random #" + std::to_string(i));
  }
}

// ---- k-NN -------------------------------------------------------------------

void KnnExactness() {
  std::mt19937_64 rng(64001);
  std::uniform_int_distribution<size_t> size(2, 1000);
  std::uniform_int_distribution<size_t> dim(1, 64);
  std::uniform_int_distribution<size_t> kdist(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = size(rng);
    const size_t d = dim(rng);
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    EmbeddingTable table;
    for (size_t i = 0; i < n; ++i) {
      rows.push_back({"w" + std::to_string(i), testing::RandomVector(rng, d)});
      // Exact duplicates exercise the lexicographic tie-break.
      if (i > 0 && i % 97 == 0) rows.back().second = rows[i - 1].second;
      table.Add(rows.back().first, rows.back().second);
    }
    const size_t k = kdist(rng);
    const bool by_word = trial % 4 != 3;
    const auto& pick = rows[std::uniform_int_distribution<size_t>(0, n - 1)(rng)];
    const std::vector<double> qvec = by_word ? pick.second : testing::RandomVector(rng, d);
    const auto got = by_word ? NearestNeighbors(table, pick.first, k) : NearestNeighbors(table, qvec, k);
    const auto want = oracle::KnnScan(rows, qvec, by_word ? pick.first : "", k);
    const std::string label = "table " + std::to_string(trial);
    RequireEq(got.size(), want.size(), label + " result size");
    for (size_t r = 0; r < got.size(); ++r) {
      RequireEq(got[r].word, want[r].word, label + " rank " + std::to_string(r));
      RequireNear(got[r].similarity, want[r].similarity, 1e-9, label + " similarity " + std::to_string(r));
    }
  }
}

// ---- span enumeration -------------------------------------------------------

void SpanEnumeration() {
  std::mt19937_64 rng(200);
  std::uniform_int_distribution<size_t> len(0, 64);
  std::uniform_int_distribution<size_t> kdist(1, 40);
  std::uniform_int_distribution<size_t> maxlen(1, 16);
  // Grid values give many ties; these probabilities land the no-answer
  // candidate exactly on grid scores (logit 0, +-2 via 1/(1+e^-2)) and at
  // the clamp.
  const std::vector<double> probs = {0.5, 0.0, 1.0, 1.0 / (1.0 + std::exp(-2.0)), 1.0 / (1.0 + std::exp(2.0)), 0.3,
                                     0.95};
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = len(rng);
    ModelOutput out;
    out.start_scores = testing::RandomGridScores(rng, n);
    out.end_scores = testing::RandomGridScores(rng, n);
    out.no_answer_prob = probs[static_cast<size_t>(trial) % probs.size()];
    for (size_t i = 0; i < n; ++i) out.ctx_tokens.push_back("t" + std::to_string(i));
    out.attention.assign(n, {});
    const size_t k = kdist(rng);
    const size_t m = maxlen(rng);
    const auto got = EnumerateSpanCandidates(out, k, m);
    const auto want = oracle::EnumerateSpans(out.start_scores, out.end_scores, k, m, out.no_answer_prob);
    const std::string label = "vector " + std::to_string(trial);
    RequireEq(got.size(), want.size(), label + " candidate count");
    for (size_t i = 0; i < got.size(); ++i) {
      const std::string at = label + " position " + std::to_string(i);
      RequireEq(got[i].is_no_answer, want[i].no_answer, at + " no-answer flag");
      RequireEq(got[i].start_tok, want[i].start, at + " start");
      RequireEq(got[i].end_tok, want[i].end, at + " end");
      RequireNear(got[i].score, want[i].score, 1e-9, at + " score");
    }
  }
}

// ---- question bias ----------------------------------------------------------

void QuestionBiasPipeline() {
  const auto ds = LoadSquad(testing::DataPath("squad_subset_100.json"));
  RequireEq(ds->size(), size_t{100}, "subset size");

  const auto stats = BuildClassStatistics(*ds);
  std::map<std::string, size_t> counts;
  std::vector<double> global(kRawFeatureDim, 0.0);
  for (const Instance& inst : ds->instances()) {
    const auto raw = ExtractRawFeatures(inst);
    ++counts[raw.prefix2];
    const auto enc = raw.Encode();
    for (size_t d = 0; d < kRawFeatureDim; ++d) global[d] += enc[d];
  }
  RequireEq(stats.size(), counts.size(), "class count");
  std::vector<double> conserved(kRawFeatureDim, 0.0);
  for (const auto& [prefix, count] : counts) {
    RequireEq(stats.at(prefix).count, count, "class size for '" + prefix + "'");
    for (size_t d = 0; d < kRawFeatureDim; ++d) conserved[d] += static_cast<double>(count) * stats.at(prefix).mean[d];
  }
  for (size_t d = 0; d < kRawFeatureDim; ++d) {
    RequireNear(conserved[d], global[d], 1e-9, "conservation dim " + std::to_string(d));
  }

  const QuestionIndex index(ds);
  const size_t n = ds->size();
  for (size_t q = 0; q < n; ++q) {
    std::vector<std::pair<double, size_t>> all;
    const auto& a = index.features(q).combined;
    for (size_t i = 0; i < n; ++i) {
      if (i == q) continue;
      const auto& b = index.features(i).combined;
      double na = 0.0;
      double nb = 0.0;
      for (size_t d = 0; d < a.size(); ++d) {
        na += a[d] * a[d];
        nb += b[d] * b[d];
      }
      all.emplace_back(na == 0.0 || nb == 0.0 ? 0.0 : oracle::Cosine(a, b), i);
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    const auto got = index.Similar(ds->instances()[q].id, n);
    RequireEq(got.size(), all.size(), "similar size for " + ds->instances()[q].id);
    for (size_t r = 0; r < got.size(); ++r) {
      const std::string at = "similar " + ds->instances()[q].id + " rank " + std::to_string(r);
      RequireEq(got[r].instance_id, ds->instances()[all[r].second].id, at);
      RequireNear(got[r].similarity, all[r].first, 1e-12, at);
    }
  }

  for (const auto& [a, b] : {std::pair{"dup-a", "dup-b"}, std::pair{"dup-b", "dup-a"}}) {
    const auto top = index.Similar(a, 1);
    Require(!top.empty(), std::string("no neighbours for ") + a);
    RequireEq(top[0].instance_id, std::string(b), std::string("top match for ") + a);
    RequireNear(top[0].similarity, 1.0, 1e-9, std::string("duplicate similarity for ") + a);
  }
}

// ---- adversarial rules ------------------------------------------------------

void AdversarialRuleEngine() {
  const HeuristicPosTagger tagger;
  const Predictor mock = [](std::string_view c, std::string_view q) { return MockPredict(c, q); };
  Instance france;
  france.id = "fr";
  france.context_raw = "Paris is the capital of France .";
  france.question_raw = "What is the capital of France ?";
  france.gold_answers = {{"Paris", 0}};

  const std::vector<std::string> words = {"The", "the", "a",  "an",    "cat", "sat",   "on",    "mat",  "What",
                                          "is",  "it",  "Paris", "?",  ",",   "(big)", "U.S.", "don't", "42",
                                          "quickly", "what", "runs", "caf\xC3\xA9", "!"};
  std::mt19937_64 rng(500500);
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<size_t> len(1, 25);
  const AdversarialRule identity_dt{"id-dt", "", {PosMatcher{"DT"}}, {CaptureRef{0}}, RuleScope::kBoth};
  const AdversarialRule identity_pair{
      "id-pair", "", {AnyMatcher{}, PosMatcher{"NN"}}, {CaptureRef{0}, CaptureRef{1}}, RuleScope::kBoth};
  const AdversarialRule identity_any{"id-any", "", {AnyMatcher{}}, {CaptureRef{0}}, RuleScope::kQuestion};
  for (int i = 0; i < 500; ++i) {
    std::string sentence;
    for (size_t n = len(rng); n > 0; --n) sentence += words[pick(rng)] + " ";
    Instance inst = france;
    inst.question_raw = sentence;
    const auto original = TokenTexts(Tokenize(sentence));
    for (const auto* rule : {&identity_dt, &identity_pair, &identity_any}) {
      for (const auto& r : ApplyRule(*rule, inst, tagger, mock)) {
        if (r.field != TextField::kQuestion) continue;
        const std::string at = "sentence " + std::to_string(i) + " rule " + rule->id;
        Require(r.perturbed_tokens == original, at + ": token sequence changed");
        Require(TokenTexts(Tokenize(r.perturbed_text)) == original, at + ": re-tokenized text changed");
      }
    }
  }

  const AdversarialRule whats{"whats", "", {LiteralMatcher{"what"}, PosMatcher{"VBZ"}}, {LiteralEmitter{"What's"}},
                              RuleScope::kQuestion};
  const auto results = ApplyRule(whats, france, tagger, mock);
  RequireEq(results.size(), size_t{1}, "What's rewrite result count");
  RequireEq(results[0].perturbed_text, std::string("What's the capital of France ?"), "What's rewrite");

  const std::string path = testing::SourcePath("rules/default_rules.json");
  const std::string bytes = testing::ReadFile(path);
  const auto rules = LoadRuleLibrary(path);
  Require(!rules.empty(), "bundled rule file is empty");
  RequireEq(SerializeRules(rules), bytes, "bundled rule file re-serialization");
  testing::TempDir dir;
  SaveRuleLibrary(dir.File("a.json"), rules);
  SaveRuleLibrary(dir.File("b.json"), LoadRuleLibrary(dir.File("a.json")));
  RequireEq(testing::ReadFile(dir.File("b.json")), bytes, "save/load/save round trip");
}

// ---- end to end -------------------------------------------------------------

void EndToEnd() {
  testing::TempDir dir;

  MockModel mock;
  httplib::Server model_server;
  MountModelEndpoint(model_server, "/predict", mock);
  testing::ServerThread model_thread(model_server);

  ServiceConfig cfg;
  cfg.dataset_path = testing::DataPath("squad_fixture_5.json");
  cfg.embeddings_path = testing::DataPath("embeddings_50.txt");
  cfg.rules_path = dir.File("rules.json");
  cfg.cache_path = dir.File("cache.jsonl");
  cfg.model_endpoint = model_thread.url("/predict");
  std::filesystem::copy_file(testing::SourcePath("rules/default_rules.json"), cfg.rules_path);
  HttpModelConfig mcfg;
  mcfg.url = cfg.model_endpoint;
  mcfg.attention_row_normalized = true;
  Service service(cfg, std::make_shared<HttpModel>(mcfg));
  ApiServer api(service);
  testing::ServerThread api_thread(api.server());
  testing::ApiClient client(api_thread.port());

  int calls = 0;
  auto expect = [&](const testing::ApiResponse& r, const std::string& schema, const std::string& what,
                    int status = 200) {
    ++calls;
    RequireEq(r.status, status, what + " status (" + r.body.dump() + ")");
    const auto violations = client.Violations(r, schema);
    Require(violations.empty(), what + " violates " + schema + " schema: " +
                                    (violations.empty() ? std::string() : violations.front()));
    return r.body;
  };

  // The model endpoint itself.
  {
    httplib::Client mc("127.0.0.1", model_thread.port());
    const auto res = mc.Post("/predict", nlohmann::json{{"context", "a b c b"}, {"question", "b"}}.dump(),
                             "application/json");
    Require(res && res->status == 200, "model endpoint did not answer");
    testing::ApiResponse r{res->status, nlohmann::json::parse(res->body)};
    expect(r, "model_output", "POST /predict");
  }

  expect(client.Post("/api/precompute", {{"parallelism", 2}}), "precompute_status", "POST /api/precompute", 202);
  nlohmann::json status;
  for (int i = 0; i < 500; ++i) {
    status = expect(client.Get("/api/precompute/status"), "precompute_status", "GET /api/precompute/status");
    if (status["finished"] == true) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  RequireEq(status["done"].get<int>(), 5, "precomputed instances");
  RequireEq(status["failed"].get<int>(), 0, "failed instances");

  const auto health = expect(client.Get("/api/health"), "health", "GET /api/health");
  RequireEq(health["cached_predictions"].get<int>(), 5, "cached predictions");
  expect(client.Get("/api/stats"), "stats", "GET /api/stats");

  const auto listing = expect(client.Get("/api/instances?limit=50"), "instance_list", "GET /api/instances");
  RequireEq(listing["total"].get<int>(), 5, "listing total");
  const auto correct =
      expect(client.Get("/api/instances?correctness=correct"), "instance_list", "GET /api/instances filtered");
  RequireEq(correct["total"].get<int>(), 3, "correct under the mock model");
  expect(client.Get("/api/instances?answerable=no&q=the&offset=1&limit=1"), "instance_list",
         "GET /api/instances paged");

  for (const auto& item : listing["items"]) {
    const std::string id = item["id"];
    const auto detail = expect(client.Get("/api/instances/" + id), "instance_detail", "GET /api/instances/" + id);
    Require(detail["model_error"].is_null(), id + " has a model error");
    expect(client.Get("/api/instances/" + id + "/internals?k=5"), "internals", "GET internals " + id);
    expect(client.Get("/api/instances/" + id + "/similar?k=3"), "similar", "GET similar " + id);
  }

  const auto nb = expect(client.Get("/api/embeddings/neighbors?word=museum&k=5"), "neighbors", "GET neighbors");
  RequireEq(nb["neighbors"][0]["word"].get<std::string>(), std::string("gallery"), "nearest to museum");
  expect(client.Get("/api/embeddings/neighbors?word=museum&k=5&scope=context&instance=fx-001"), "neighbors",
         "GET neighbors in context");
  expect(client.Post("/api/embeddings/project", {{"words", {"museum", "louvre", "nile", "egypt"}}}), "projection",
         "POST project");

  const auto edit = expect(client.Post("/api/instances/fx-001/edit",
                                       {{"field", "question"}, {"token_index", 2}, {"replacement", "newer"}}),
                           "edit", "POST edit");
  const std::string sid = edit["session_id"];
  const auto applied = expect(client.Post("/api/rules/whats-contraction/apply/fx-005", {{"session_id", sid}}),
                              "rule_apply", "POST rule apply");
  RequireEq(applied["results"].size(), size_t{1}, "rule apply results");
  const auto session = expect(client.Get("/api/sessions/" + sid), "session", "GET session");
  RequireEq(session["entries"].size(), size_t{2}, "session entries");

  expect(client.Get("/api/rules"), "rules", "GET rules");
  const nlohmann::json rule = {{"id", "e2e"},
                               {"name", "Nile to Amazon"},
                               {"pattern", {{{"kind", "literal"}, {"value", "nile"}}}},
                               {"replacement", {{{"kind", "literal"}, {"value", "Amazon"}}}},
                               {"scope", "both"}};
  expect(client.Post("/api/rules", rule), "rule_put", "POST rules");
  expect(client.Delete("/api/rules/e2e"), "rule_delete", "DELETE rules/:id");
  expect(client.Post("/api/rules", rule), "rule_put", "POST rules again");
  expect(client.Delete("/api/rules?id=e2e"), "rule_delete", "DELETE rules?id=");

  expect(client.Get("/api/instances/missing"), "error", "unknown id", 404);
  Require(calls >= 30, "too few endpoint calls: " + std::to_string(calls));
}

}  // namespace
}  // namespace qaprobe

int main() {
  using qaprobe::Criterion;
  const std::vector<Criterion> criteria = {
      {"EM/F1 oracle equivalence (1000 random + 20 handcrafted, F1 1e-12)", 5.0, qaprobe::EmF1OracleEquivalence},
      {"k-NN exactness (100 tables, <=1000 words, dim <=64, 1e-9)", 30.0, qaprobe::KnnExactness},
      {"Span enumeration vs brute force (200 vectors, n <=64)", 10.0, qaprobe::SpanEnumeration},
      {"Question-bias pipeline (conservation, brute-force similar, duplicate first)", 0.0,
       qaprobe::QuestionBiasPipeline},
      {"Adversarial rule engine (identity x500, What's rewrite, byte-stable rule file)", 0.0,
       qaprobe::AdversarialRuleEngine},
      {"End-to-end with mock model (every endpoint, schemas, < 10 s)", 10.0, qaprobe::EndToEnd},
  };
  int failed = 0;
  for (const auto& c : criteria) failed += qaprobe::Run(c) ? 0 : 1;
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}
