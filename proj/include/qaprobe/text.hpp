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
#include <string>
#include <string_view>

#include "qaprobe/unicode_tables.hpp"

// UTF-8 helpers shared by tokenization, normalization and tagging. Offsets
// exposed by the library are code point indices, the same unit SQuAD uses
// for answer_start.
namespace qaprobe::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Malformed sequences decode to U+FFFD, one per offending byte.
inline std::u32string DecodeUtf8(std::string_view in) {
  std::u32string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    const auto b0 = static_cast<unsigned char>(in[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= in.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(in[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (ok) {
      // Reject overlong forms, surrogates and out-of-range values.
      static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ok = false;
      }
    }
    if (!ok) {
      out.push_back(kReplacementChar);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void AppendUtf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string EncodeUtf8(std::u32string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char32_t cp : in) AppendUtf8(out, cp);
  return out;
}

namespace internal {
template <typename Table>
constexpr bool InRanges(const Table& table, char32_t cp) {
  auto it = std::upper_bound(
      table.begin(), table.end(), cp,
      [](char32_t value, const unicode_tables::Range& r) { return value < r.first; });
  return it != table.begin() && cp <= std::prev(it)->last;
}
}  // namespace internal

// Unicode general categories Pc, Pd, Ps, Pe, Pi, Pf and Po.
constexpr bool IsPunctuation(char32_t cp) {
  return internal::InRanges(unicode_tables::kPunctuation, cp);
}

constexpr bool IsWhitespace(char32_t cp) {
  return internal::InRanges(unicode_tables::kWhitespace, cp);
}

constexpr bool IsAsciiDigit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Simple case folding for Latin, Greek and Cyrillic. Other scripts pass
// through unchanged.
constexpr char32_t ToLower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 32;
  if (cp >= 0x100 && cp <= 0x137) return cp | 1;
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  return cp;
}

constexpr bool IsUpper(char32_t cp) { return ToLower(cp) != cp; }

inline std::string ToLowerUtf8(std::string_view in) {
  std::u32string cps = DecodeUtf8(in);
  for (char32_t& cp : cps) cp = ToLower(cp);
  return EncodeUtf8(cps);
}

inline bool IsAllPunctuation(std::string_view token) {
  const std::u32string cps = DecodeUtf8(token);
  return !cps.empty() &&
         std::all_of(cps.begin(), cps.end(), [](char32_t c) { return IsPunctuation(c); });
}

}  // namespace qaprobe::text
