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
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

// <resolv.h> (pulled in by cpp-httplib) defines _res, an Eigen parameter name.
#pragma push_macro("_res")
#undef _res
#include <Eigen/Dense>
#pragma pop_macro("_res")

#include "qaprobe/error.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/tokenizer.hpp"

namespace qaprobe {

// Immutable word -> vector table. Words are stored lowercased; vectors live
// in one row-major buffer with their norms cached.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  size_t dim() const { return dim_; }
  size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool Contains(std::string_view word) const { return index_.contains(text::ToLowerUtf8(word)); }

  std::optional<size_t> IndexOf(std::string_view word) const {
    auto it = index_.find(text::ToLowerUtf8(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const double> Vector(size_t index) const {
    return {data_.data() + index * dim_, dim_};
  }

  double Norm(size_t index) const { return norms_[index]; }

  Vocabulary VocabularySet() const { return Vocabulary(words_.begin(), words_.end()); }

  // Returns false (and records a warning) when the word is already present.
  bool Add(std::string word, std::span<const double> values) {
    if (words_.empty() && dim_ == 0) dim_ = values.size();
    if (values.size() != dim_ || dim_ == 0) {
      throw Error(ErrorCode::kContract, "vector for '" + word + "' has dimension " +
                                            std::to_string(values.size()) + ", table has " +
                                            std::to_string(dim_));
    }
    word = text::ToLowerUtf8(word);
    if (index_.contains(word)) {
      warnings_.push_back("duplicate word '" + word + "' ignored");
      return false;
    }
    index_.emplace(word, words_.size());
    words_.push_back(std::move(word));
    double sq = 0.0;
    for (double v : values) sq += v * v;
    data_.insert(data_.end(), values.begin(), values.end());
    norms_.push_back(std::sqrt(sq));
    return true;
  }

  void AddWarning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<std::string> warnings_;
};

// Text format: "word v1 v2 ... vd" per line. A leading "<count> <dim>"
// header line, as written by word2vec, is skipped.
inline EmbeddingTable ParseEmbeddings(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  size_t line_no = 0;
  size_t expected_dim = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<std::string> parts;
    for (std::string tok; fields >> tok;) parts.push_back(std::move(tok));

    if (line_no == 1 && parts.size() == 1) {
      int a = 0;
      int b = 0;
      auto r1 = std::from_chars(word.data(), word.data() + word.size(), a);
      auto r2 = std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), b);
      if (r1.ec == std::errc() && r1.ptr == word.data() + word.size() && r2.ec == std::errc() &&
          r2.ptr == parts[0].data() + parts[0].size()) {
        continue;
      }
    }

    values.clear();
    for (const auto& p : parts) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
      if (ec != std::errc() || ptr != p.data() + p.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": non-numeric component '" + p + "'");
      }
      values.push_back(v);
    }
    if (values.empty()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": word without a vector");
    }
    if (expected_dim == 0) expected_dim = values.size();
    if (values.size() != expected_dim) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(expected_dim) + " components, got " +
                                         std::to_string(values.size()));
    }
    table.Add(word, values);
  }
  return table;
}

inline EmbeddingTable LoadEmbeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open embeddings file: " + path);
  return ParseEmbeddings(in);
}

struct Neighbor {
  std::string word;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

using EmbeddingQuery = std::variant<std::string, std::vector<double>>;

namespace internal {
// Ranking order: higher similarity first, then lexicographically smaller word.
inline bool RanksBefore(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.word < b.word;
}
}  // namespace internal

// Exact cosine top-k. When candidates is non-null the search is restricted
// to those words; candidates absent from the table are ignored. Stored zero
// vectors never appear in results since their cosine is undefined.
inline std::vector<Neighbor> NearestNeighbors(const EmbeddingTable& table, const EmbeddingQuery& query,
                                              size_t k,
                                              const std::vector<std::string>* candidates = nullptr) {
  if (k < 1) throw Error(ErrorCode::kContract, "k must be >= 1");

  std::vector<double> qvec;
  std::optional<size_t> self;
  if (const auto* word = std::get_if<std::string>(&query)) {
    self = table.IndexOf(*word);
    if (!self) throw Error(ErrorCode::kNotFound, "word not in vocabulary: " + *word);
    auto v = table.Vector(*self);
    qvec.assign(v.begin(), v.end());
  } else {
    qvec = std::get<std::vector<double>>(query);
    if (qvec.size() != table.dim()) {
      throw Error(ErrorCode::kContract, "query dimension " + std::to_string(qvec.size()) +
                                            " != table dimension " + std::to_string(table.dim()));
    }
  }
  double qnorm = 0.0;
  for (double v : qvec) qnorm += v * v;
  qnorm = std::sqrt(qnorm);
  if (qnorm == 0.0) throw Error(ErrorCode::kDegenerate, "zero query vector: cosine undefined");

  // Min-heap on rank: the top element is the worst of the current best k.
  auto worse_on_top = [](const Neighbor& a, const Neighbor& b) { return internal::RanksBefore(a, b); };
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(worse_on_top)> heap(worse_on_top);

  auto consider = [&](size_t idx) {
    if (self && idx == *self) return;
    const double norm = table.Norm(idx);
    if (norm == 0.0) return;
    auto v = table.Vector(idx);
    double dot = 0.0;
    for (size_t d = 0; d < qvec.size(); ++d) dot += qvec[d] * v[d];
    Neighbor cand{table.words()[idx], dot / (qnorm * norm)};
    if (heap.size() < k) {
      heap.push(std::move(cand));
    } else if (internal::RanksBefore(cand, heap.top())) {
      heap.pop();
      heap.push(std::move(cand));
    }
  };

  if (candidates != nullptr) {
    std::unordered_set<size_t> seen;
    for (const auto& w : *candidates) {
      auto idx = table.IndexOf(w);
      if (idx && seen.insert(*idx).second) consider(*idx);
    }
  } else {
    for (size_t i = 0; i < table.size(); ++i) consider(i);
  }

  std::vector<Neighbor> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Lowercased context tokens that have a vector, in first-occurrence order.
inline std::vector<std::string> ContextVocabulary(const EmbeddingTable& table, std::string_view context) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const Token& t : Tokenize(context, TokenMode::kPreprocessed).tokens) {
    if (table.Contains(t.text) && seen.insert(t.text).second) out.push_back(t.text);
  }
  return out;
}

struct ProjectedWord {
  std::string word;
  double x = 0.0;
  double y = 0.0;
};

// PCA of the selected vectors onto their top two principal axes. Each axis
// is oriented so that its largest-magnitude component is positive.
inline std::vector<ProjectedWord> Project2D(const EmbeddingTable& table,
                                            const std::vector<std::string>& words) {
  std::vector<size_t> rows;
  std::unordered_set<size_t> distinct;
  for (const auto& w : words) {
    auto idx = table.IndexOf(w);
    if (!idx) throw Error(ErrorCode::kNotFound, "word not in vocabulary: " + w);
    rows.push_back(*idx);
    distinct.insert(*idx);
  }
  if (distinct.size() < 2) throw Error(ErrorCode::kContract, "projection needs at least 2 distinct words");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(table.dim());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto v = table.Vector(rows[static_cast<size_t>(i)]);
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = v[static_cast<size_t>(j)];
  }
  x.rowwise() -= x.colwise().mean();
  if (x.squaredNorm() == 0.0) {
    throw Error(ErrorCode::kDegenerate, "all selected vectors are identical");
  }

  // The n x n Gram matrix shares its nonzero spectrum with the covariance
  // and is much smaller for the usual handful of words.
  const Eigen::MatrixXd gram = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  const auto& evals = solver.eigenvalues();
  const double top = evals(n - 1);

  std::vector<Eigen::VectorXd> coords;
  for (int c = 0; c < 2; ++c) {
    const Eigen::Index col = n - 1 - c;
    if (col < 0 || evals(col) <= 1e-12 * top) {
      coords.emplace_back(Eigen::VectorXd::Zero(n));
      continue;
    }
    Eigen::VectorXd axis = x.transpose() * solver.eigenvectors().col(col);
    axis.normalize();
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0) axis = -axis;
    coords.emplace_back(x * axis);
  }

  std::vector<ProjectedWord> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.push_back({table.words()[rows[static_cast<size_t>(i)]], coords[0](i), coords[1](i)});
  }
  return out;
}

}  // namespace qaprobe
