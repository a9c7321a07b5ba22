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
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaprobe/dataset.hpp"
#include "qaprobe/error.hpp"
#include "qaprobe/evaluation.hpp"
#include "qaprobe/model_adapter.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/tokenizer.hpp"

namespace qaprobe {

// ---------------------------------------------------------------------------
// Part-of-speech tagging
// ---------------------------------------------------------------------------

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  // Returns one Penn Treebank tag per token.
  virtual std::vector<std::string> Tag(const std::vector<std::string>& tokens) const = 0;
};

// Closed-class lexicon plus suffix heuristics, defaulting to NN. Good enough
// for wh-word, auxiliary and determiner patterns; plug in a real tagger for
// open-class accuracy.
class HeuristicPosTagger : public PosTagger {
 public:
  std::vector<std::string> Tag(const std::vector<std::string>& tokens) const override {
    std::vector<std::string> tags;
    tags.reserve(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) tags.push_back(TagOne(tokens[i], i));
    return tags;
  }

  std::string TagOne(const std::string& token, size_t position) const {
    const std::string lower = text::ToLowerUtf8(token);
    if (auto it = Lexicon().find(lower); it != Lexicon().end()) return it->second;
    if (text::IsAllPunctuation(token)) return PunctuationTag(token);
    if (!token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
          return (c >= '0' && c <= '9') || c == '.' || c == ',';
        }) && std::any_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return "CD";
    }
    const std::u32string cps = text::DecodeUtf8(token);
    if (position > 0 && !cps.empty() && text::IsUpper(cps.front())) return "NNP";
    auto ends_with = [&](std::string_view suffix, size_t min_len) {
      return lower.size() >= min_len && lower.ends_with(suffix);
    };
    if (ends_with("ly", 4)) return "RB";
    if (ends_with("ing", 5)) return "VBG";
    if (ends_with("ed", 4)) return "VBD";
    if (IsThirdPersonOfKnownVerb(lower)) return "VBZ";
    return "NN";
  }

 private:
  static const std::unordered_map<std::string, std::string>& Lexicon() {
    static const auto* lexicon = [] {
      auto* m = new std::unordered_map<std::string, std::string>();
      auto add = [&](std::string_view tag, std::initializer_list<const char*> words) {
        for (const char* w : words) m->emplace(w, tag);
      };
      add("DT", {"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any",
                 "no", "all", "both", "either", "neither", "another"});
      add("PRP", {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "himself",
                  "herself", "itself", "themselves"});
      add("PRP$", {"my", "your", "his", "her", "its", "our", "their"});
      add("WP", {"what", "who", "whom"});
      add("WP$", {"whose"});
      add("WDT", {"which"});
      add("WRB", {"when", "where", "why", "how"});
      add("IN", {"of", "in", "on", "at", "by", "for", "with", "from", "into", "about", "as", "than",
                 "after", "before", "over", "under", "between", "through", "during", "without",
                 "within", "against", "among", "since", "until", "upon", "if", "because", "while"});
      add("TO", {"to"});
      add("CC", {"and", "or", "but", "nor"});
      add("VBZ", {"is", "has", "does", "'s"});
      add("VBP", {"are", "am", "have", "do"});
      add("VBD", {"was", "were", "had", "did"});
      add("VB", {"be"});
      add("VBN", {"been"});
      add("VBG", {"being"});
      add("MD", {"can", "could", "will", "would", "shall", "should", "may", "might", "must"});
      add("RB", {"not", "n't", "very", "also", "too", "never", "often"});
      add("EX", {"there"});
      return m;
    }();
    return *lexicon;
  }

  static bool IsThirdPersonOfKnownVerb(const std::string& lower) {
    static const std::unordered_set<std::string> kVerbs = {
        "make", "take", "get", "give", "go", "come", "see", "know", "think", "say", "tell",
        "find", "use", "work", "call", "try", "ask", "need", "feel", "become", "leave", "put",
        "mean", "keep", "let", "begin", "seem", "help", "show", "hear", "play", "run", "move",
        "live", "believe", "bring", "happen", "write", "provide", "sit", "stand", "lose", "pay",
        "meet", "include", "continue", "set", "learn", "change", "lead", "understand", "watch",
        "follow", "stop", "create", "speak", "read", "allow", "add", "spend", "grow", "open",
        "walk", "win", "offer", "remember", "love", "consider", "appear", "buy", "wait", "serve",
        "die", "send", "expect", "build", "stay", "fall", "cut", "reach", "kill", "remain",
        "contain", "produce", "describe", "form", "hold", "want", "like", "look", "turn", "start"};
    if (lower.size() < 3 || !lower.ends_with('s') || lower.ends_with("ss")) return false;
    const std::string stem = lower.substr(0, lower.size() - 1);
    if (kVerbs.contains(stem)) return true;
    if (lower.ends_with("es") && kVerbs.contains(lower.substr(0, lower.size() - 2))) return true;
    if (lower.ends_with("ies") && kVerbs.contains(lower.substr(0, lower.size() - 3) + "y")) return true;
    return false;
  }

  static std::string PunctuationTag(const std::string& token) {
    if (token == "." || token == "?" || token == "!") return ".";
    if (token == ",") return ",";
    if (token == ":" || token == ";" || token == "-" || token == "--" || token == "...") return ":";
    if (token == "(" || token == "[" || token == "{") return "-LRB-";
    if (token == ")" || token == "]" || token == "}") return "-RRB-";
    if (token == "`" || token == "``" || token == "\xE2\x80\x9C" || token == "\xE2\x80\x98") return "``";
    if (token == "\"" || token == "'" || token == "''" || token == "\xE2\x80\x9D" || token == "\xE2\x80\x99") {
      return "''";
    }
    if (token == "#") return "#";
    return "SYM";
  }
};

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

struct LiteralMatcher {
  std::string word;  // compared case-insensitively
  bool operator==(const LiteralMatcher&) const = default;
};
struct PosMatcher {
  std::string tag;
  bool operator==(const PosMatcher&) const = default;
};
struct AnyMatcher {
  bool operator==(const AnyMatcher&) const = default;
};
using Matcher = std::variant<LiteralMatcher, PosMatcher, AnyMatcher>;

struct LiteralEmitter {
  std::string word;
  bool operator==(const LiteralEmitter&) const = default;
};
// Copies the token matched by pattern[index] verbatim.
struct CaptureRef {
  size_t index = 0;
  bool operator==(const CaptureRef&) const = default;
};
using Emitter = std::variant<LiteralEmitter, CaptureRef>;

enum class RuleScope { kQuestion, kContext, kBoth };

struct AdversarialRule {
  std::string id;
  std::string name;
  std::vector<Matcher> pattern;
  std::vector<Emitter> replacement;
  RuleScope scope = RuleScope::kBoth;

  bool operator==(const AdversarialRule&) const = default;
};

inline std::string_view ScopeName(RuleScope scope) {
  switch (scope) {
    case RuleScope::kQuestion:
      return "question";
    case RuleScope::kContext:
      return "context";
    case RuleScope::kBoth:
      return "both";
  }
  return "both";
}

// Throws kParse naming the rule.
inline void ValidateRule(const AdversarialRule& rule) {
  if (rule.id.empty()) throw Error(ErrorCode::kParse, "rule without id");
  if (rule.pattern.empty()) throw Error(ErrorCode::kParse, "rule '" + rule.id + "': empty pattern");
  for (const Emitter& e : rule.replacement) {
    if (const auto* ref = std::get_if<CaptureRef>(&e); ref && ref->index >= rule.pattern.size()) {
      throw Error(ErrorCode::kParse, "rule '" + rule.id + "': capture index " + std::to_string(ref->index) +
                                         " out of range for pattern of length " +
                                         std::to_string(rule.pattern.size()));
    }
  }
}

inline nlohmann::json RuleToJson(const AdversarialRule& rule) {
  nlohmann::json pattern = nlohmann::json::array();
  for (const Matcher& m : rule.pattern) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, LiteralMatcher>) {
            pattern.push_back({{"kind", "literal"}, {"value", v.word}});
          } else if constexpr (std::is_same_v<T, PosMatcher>) {
            pattern.push_back({{"kind", "pos"}, {"value", v.tag}});
          } else {
            pattern.push_back({{"kind", "any"}});
          }
        },
        m);
  }
  nlohmann::json replacement = nlohmann::json::array();
  for (const Emitter& e : rule.replacement) {
    if (const auto* lit = std::get_if<LiteralEmitter>(&e)) {
      replacement.push_back({{"kind", "literal"}, {"value", lit->word}});
    } else {
      replacement.push_back({{"kind", "capture"}, {"index", std::get<CaptureRef>(e).index}});
    }
  }
  return {{"id", rule.id},
          {"name", rule.name},
          {"scope", ScopeName(rule.scope)},
          {"pattern", std::move(pattern)},
          {"replacement", std::move(replacement)}};
}

inline AdversarialRule RuleFromJson(const nlohmann::json& j) {
  AdversarialRule rule;
  if (!j.is_object()) throw Error(ErrorCode::kParse, "rule entry must be an object");
  rule.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : std::string();
  if (rule.id.empty()) throw Error(ErrorCode::kParse, "rule without string id");
  auto fail = [&](const std::string& why) -> void {
    throw Error(ErrorCode::kParse, "rule '" + rule.id + "': " + why);
  };
  if (j.contains("name") && !j["name"].is_string()) fail("name must be a string");
  rule.name = j.value("name", std::string());

  const std::string scope = j.contains("scope") && j["scope"].is_string() ? j["scope"].get<std::string>() : "";
  if (scope == "question") {
    rule.scope = RuleScope::kQuestion;
  } else if (scope == "context") {
    rule.scope = RuleScope::kContext;
  } else if (scope == "both") {
    rule.scope = RuleScope::kBoth;
  } else {
    fail("scope must be question, context or both");
  }

  if (!j.contains("pattern") || !j["pattern"].is_array()) fail("pattern must be an array");
  for (const auto& m : j["pattern"]) {
    const std::string kind = m.is_object() && m.contains("kind") && m["kind"].is_string()
                                 ? m["kind"].get<std::string>() : "";
    if (kind == "any") {
      rule.pattern.emplace_back(AnyMatcher{});
      continue;
    }
    if (kind != "literal" && kind != "pos") fail("invalid matcher kind '" + kind + "'");
    if (!m.contains("value") || !m["value"].is_string()) fail(kind + " matcher needs a string value");
    if (kind == "literal") {
      rule.pattern.emplace_back(LiteralMatcher{m["value"].get<std::string>()});
    } else {
      rule.pattern.emplace_back(PosMatcher{m["value"].get<std::string>()});
    }
  }

  if (!j.contains("replacement") || !j["replacement"].is_array()) fail("replacement must be an array");
  for (const auto& e : j["replacement"]) {
    const std::string kind = e.is_object() && e.contains("kind") && e["kind"].is_string()
                                 ? e["kind"].get<std::string>() : "";
    if (kind == "literal") {
      if (!e.contains("value") || !e["value"].is_string()) fail("literal emitter needs a string value");
      rule.replacement.emplace_back(LiteralEmitter{e["value"].get<std::string>()});
    } else if (kind == "capture") {
      if (!e.contains("index") || !e["index"].is_number_integer() || e["index"].get<long long>() < 0) {
        fail("capture emitter needs a non-negative integer index");
      }
      rule.replacement.emplace_back(CaptureRef{e["index"].get<size_t>()});
    } else {
      fail("invalid emitter kind '" + kind + "'");
    }
  }
  ValidateRule(rule);
  return rule;
}

// Canonical form: sorted keys, two-space indent, trailing newline.
inline std::string SerializeRules(const std::vector<AdversarialRule>& rules) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rules) arr.push_back(RuleToJson(r));
  return arr.dump(2) + "\n";
}

inline std::vector<AdversarialRule> ParseRules(const std::string& json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, "malformed rule file at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!root.is_array()) throw Error(ErrorCode::kParse, "rule file must hold a JSON array");
  std::vector<AdversarialRule> rules;
  std::unordered_set<std::string> ids;
  for (const auto& j : root) {
    rules.push_back(RuleFromJson(j));
    if (!ids.insert(rules.back().id).second) {
      throw Error(ErrorCode::kParse, "rule '" + rules.back().id + "': duplicate id");
    }
  }
  return rules;
}

inline std::vector<AdversarialRule> LoadRuleLibrary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open rule file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRules(buf.str());
}

inline void SaveRuleLibrary(const std::string& path, const std::vector<AdversarialRule>& rules) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kNotFound, "cannot write rule file: " + path);
  out << SerializeRules(rules);
}

// Single-writer / multi-reader rule store, optionally backed by a file that
// is rewritten after every change.
class RuleLibrary {
 public:
  RuleLibrary() = default;
  explicit RuleLibrary(std::vector<AdversarialRule> rules, std::string path = {})
      : rules_(std::move(rules)), path_(std::move(path)) {}

  static RuleLibrary Open(const std::string& path) {
    return RuleLibrary(LoadRuleLibrary(path), path);
  }

  std::vector<AdversarialRule> All() const {
    std::shared_lock lock(mutex_);
    return rules_;
  }

  std::optional<AdversarialRule> Find(const std::string& id) const {
    std::shared_lock lock(mutex_);
    for (const auto& r : rules_) {
      if (r.id == id) return r;
    }
    return std::nullopt;
  }

  // Inserts or replaces by id. Returns true when the id was new.
  bool Upsert(AdversarialRule rule) {
    ValidateRule(rule);
    std::unique_lock lock(mutex_);
    for (auto& r : rules_) {
      if (r.id == rule.id) {
        r = std::move(rule);
        PersistLocked();
        return false;
      }
    }
    rules_.push_back(std::move(rule));
    PersistLocked();
    return true;
  }

  bool Remove(const std::string& id) {
    std::unique_lock lock(mutex_);
    auto it = std::find_if(rules_.begin(), rules_.end(), [&](const auto& r) { return r.id == id; });
    if (it == rules_.end()) return false;
    rules_.erase(it);
    PersistLocked();
    return true;
  }

 private:
  void PersistLocked() const {
    if (!path_.empty()) SaveRuleLibrary(path_, rules_);
  }

  mutable std::shared_mutex mutex_;
  std::vector<AdversarialRule> rules_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Matching and rewriting
// ---------------------------------------------------------------------------

struct MatchSpan {
  size_t start = 0;
  size_t end = 0;  // exclusive

  bool operator==(const MatchSpan&) const = default;
};

inline bool MatcherAccepts(const Matcher& m, const std::string& token, const std::string& tag) {
  if (const auto* lit = std::get_if<LiteralMatcher>(&m)) {
    return text::ToLowerUtf8(lit->word) == text::ToLowerUtf8(token);
  }
  if (const auto* pos = std::get_if<PosMatcher>(&m)) return pos->tag == tag;
  return true;
}

// Leftmost non-overlapping matches, scanning left to right.
inline std::vector<MatchSpan> MatchRule(const AdversarialRule& rule, const std::vector<std::string>& tokens,
                                        const std::vector<std::string>& tags) {
  if (tokens.size() != tags.size()) {
    throw Error(ErrorCode::kContract, "tokens and tags differ in length");
  }
  std::vector<MatchSpan> spans;
  const size_t m = rule.pattern.size();
  if (m == 0) return spans;
  size_t pos = 0;
  while (pos + m <= tokens.size()) {
    bool ok = true;
    for (size_t k = 0; k < m && ok; ++k) ok = MatcherAccepts(rule.pattern[k], tokens[pos + k], tags[pos + k]);
    if (ok) {
      spans.push_back({pos, pos + m});
      pos += m;
    } else {
      ++pos;
    }
  }
  return spans;
}

inline std::vector<std::string> RewriteTokens(const AdversarialRule& rule, const std::vector<std::string>& tokens,
                                              const std::vector<MatchSpan>& spans) {
  std::vector<std::string> out;
  size_t pos = 0;
  for (const MatchSpan& span : spans) {
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos),
               tokens.begin() + static_cast<std::ptrdiff_t>(span.start));
    for (const Emitter& e : rule.replacement) {
      if (const auto* lit = std::get_if<LiteralEmitter>(&e)) {
        out.push_back(lit->word);
      } else {
        out.push_back(tokens[span.start + std::get<CaptureRef>(e).index]);
      }
    }
    pos = span.end;
  }
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos), tokens.end());
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation with re-evaluation
// ---------------------------------------------------------------------------

enum class TextField { kQuestion, kContext };

inline std::string_view FieldName(TextField f) { return f == TextField::kQuestion ? "question" : "context"; }

struct PerturbationResult {
  TextField field = TextField::kQuestion;
  std::string original_text;
  std::string perturbed_text;
  std::vector<std::string> original_tokens;
  std::vector<std::string> perturbed_tokens;
  ModelOutput original_output;
  ModelOutput model_output;
  EvalScore eval_before;
  EvalScore eval_after;
  double delta_em = 0.0;
  double delta_f1 = 0.0;
};

// Routes a (context, question) pair to the target model, possibly through a
// cache.
using Predictor = std::function<ModelOutput(std::string_view context, std::string_view question)>;

namespace internal {

// Evaluation uses gold answer texts, never offsets, since perturbation can
// shift them.
inline PerturbationResult Rescore(const Instance& inst, TextField field, std::vector<std::string> original_tokens,
                                  std::vector<std::string> perturbed_tokens, const Predictor& predict) {
  PerturbationResult r;
  r.field = field;
  r.original_text = field == TextField::kQuestion ? inst.question_raw : inst.context_raw;
  r.perturbed_text = JoinTokens(perturbed_tokens);
  r.original_tokens = std::move(original_tokens);
  r.perturbed_tokens = std::move(perturbed_tokens);

  r.original_output = predict(inst.context_raw, inst.question_raw);
  r.model_output = field == TextField::kQuestion ? predict(inst.context_raw, r.perturbed_text)
                                                 : predict(r.perturbed_text, inst.question_raw);
  const auto golds = inst.GoldTexts();
  r.eval_before = Evaluate(r.original_output.answer_text, golds, inst.is_impossible);
  r.eval_after = Evaluate(r.model_output.answer_text, golds, inst.is_impossible);
  r.delta_em = static_cast<double>(r.eval_after.em - r.eval_before.em);
  r.delta_f1 = r.eval_after.f1 - r.eval_before.f1;
  return r;
}

}  // namespace internal

// One result per scoped field with at least one match; every match in that
// field is rewritten. The instance itself is never modified.
inline std::vector<PerturbationResult> ApplyRule(const AdversarialRule& rule, const Instance& inst,
                                                 const PosTagger& tagger, const Predictor& predict) {
  std::vector<PerturbationResult> results;
  std::vector<TextField> fields;
  if (rule.scope != RuleScope::kContext) fields.push_back(TextField::kQuestion);
  if (rule.scope != RuleScope::kQuestion) fields.push_back(TextField::kContext);
  for (TextField field : fields) {
    auto tokens = TokenTexts(Tokenize(field == TextField::kQuestion ? inst.question_raw : inst.context_raw));
    const auto spans = MatchRule(rule, tokens, tagger.Tag(tokens));
    if (spans.empty()) continue;
    auto rewritten = RewriteTokens(rule, tokens, spans);
    results.push_back(internal::Rescore(inst, field, std::move(tokens), std::move(rewritten), predict));
  }
  return results;
}

inline PerturbationResult ManualEdit(const Instance& inst, TextField field, size_t token_index,
                                     const std::string& replacement, const Predictor& predict) {
  auto tokens = TokenTexts(Tokenize(field == TextField::kQuestion ? inst.question_raw : inst.context_raw));
  if (token_index >= tokens.size()) {
    throw Error(ErrorCode::kContract, "token index " + std::to_string(token_index) + " out of range for " +
                                          std::string(FieldName(field)) + " with " +
                                          std::to_string(tokens.size()) + " tokens");
  }
  auto edited = tokens;
  edited[token_index] = replacement;
  return internal::Rescore(inst, field, std::move(tokens), std::move(edited), predict);
}

}  // namespace qaprobe
