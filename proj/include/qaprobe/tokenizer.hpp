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

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qaprobe/text.hpp"

namespace qaprobe {

enum class TokenMode { kOriginal, kPreprocessed };

struct Token {
  std::string text;
  // Half-open code point range into the source string.
  size_t char_start = 0;
  size_t char_end = 0;
  bool is_oov = false;

  bool operator==(const Token&) const = default;
};

struct TokenizedView {
  std::vector<Token> tokens;
  TokenMode mode = TokenMode::kOriginal;
};

using Vocabulary = std::unordered_set<std::string>;

// Whitespace split, then every leading and trailing punctuation character of
// a chunk becomes its own token. Punctuation inside a chunk stays put, so
// "U.S." yields "U.S" and ".", and "don't" stays whole. Preprocessed mode
// lowercases token text; offsets always index the original string.
inline TokenizedView Tokenize(std::string_view text, TokenMode mode = TokenMode::kOriginal) {
  TokenizedView view;
  view.mode = mode;
  const std::u32string cps = text::DecodeUtf8(text);

  auto emit = [&](size_t begin, size_t end) {
    std::u32string piece = cps.substr(begin, end - begin);
    if (mode == TokenMode::kPreprocessed) {
      for (char32_t& cp : piece) cp = text::ToLower(cp);
    }
    view.tokens.push_back(Token{text::EncodeUtf8(piece), begin, end, false});
  };

  size_t i = 0;
  while (i < cps.size()) {
    if (text::IsWhitespace(cps[i])) {
      ++i;
      continue;
    }
    size_t chunk_end = i;
    while (chunk_end < cps.size() && !text::IsWhitespace(cps[chunk_end])) ++chunk_end;

    size_t lo = i;
    size_t hi = chunk_end;
    while (lo < hi && text::IsPunctuation(cps[lo])) {
      emit(lo, lo + 1);
      ++lo;
    }
    size_t trailing = hi;
    while (trailing > lo && text::IsPunctuation(cps[trailing - 1])) --trailing;
    if (lo < trailing) emit(lo, trailing);
    for (size_t p = trailing; p < hi; ++p) emit(p, p + 1);

    i = chunk_end;
  }
  return view;
}

inline std::vector<std::string> TokenTexts(const TokenizedView& view) {
  std::vector<std::string> out;
  out.reserve(view.tokens.size());
  for (const Token& t : view.tokens) out.push_back(t.text);
  return out;
}

// Membership is tested on the lowercased token text.
inline TokenizedView MarkOov(TokenizedView view, const Vocabulary& vocabulary) {
  for (Token& t : view.tokens) {
    t.is_oov = !vocabulary.contains(text::ToLowerUtf8(t.text));
  }
  return view;
}

inline std::string JoinTokens(const std::vector<std::string>& tokens, size_t begin, size_t end,
                              std::string_view sep = " ") {
  std::string out;
  for (size_t i = begin; i < end; ++i) {
    if (i > begin) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

inline std::string JoinTokens(const std::vector<std::string>& tokens) {
  return JoinTokens(tokens, 0, tokens.size());
}

}  // namespace qaprobe
