/* Copyright 2026 The leaninst Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "leaninst/text.hpp"

#include <algorithm>

namespace leaninst::text {

std::vector<Region> classify_regions(std::string_view src) {
  std::vector<Region> out(src.size(), Region::kCode);
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == '-' && i + 1 < n && src[i + 1] == '-') {
      while (i < n && src[i] != '\n') out[i++] = Region::kLineComment;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '-') {
      int depth = 0;
      while (i < n) {
        if (src[i] == '/' && i + 1 < n && src[i + 1] == '-') {
          ++depth;
          out[i] = out[i + 1] = Region::kBlockComment;
          i += 2;
        } else if (src[i] == '-' && i + 1 < n && src[i + 1] == '/') {
          --depth;
          out[i] = out[i + 1] = Region::kBlockComment;
          i += 2;
          if (depth == 0) break;
        } else {
          out[i++] = Region::kBlockComment;
        }
      }
      continue;
    }
    if (c == '"') {
      out[i++] = Region::kString;
      while (i < n) {
        if (src[i] == '\\' && i + 1 < n) {
          out[i] = out[i + 1] = Region::kString;
          i += 2;
          continue;
        }
        const bool closing = src[i] == '"';
        out[i++] = Region::kString;
        if (closing) break;
      }
      continue;
    }
    ++i;
  }
  return out;
}

LineTable::LineTable(std::string_view src) : src_(src) {
  if (src.empty()) return;
  starts_.push_back(0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == '\n' && i + 1 < src.size()) starts_.push_back(i + 1);
  }
}

std::size_t LineTable::line_end_inclusive(int line) const {
  if (line >= line_count()) return src_.size();
  return starts_[line];
}

std::string_view LineTable::line(int line) const {
  std::size_t b = line_start(line);
  std::size_t e = line_end_inclusive(line);
  if (e > b && src_[e - 1] == '\n') --e;
  return src_.substr(b, e - b);
}

int LineTable::line_of_offset(std::size_t offset) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
  return static_cast<int>(it - starts_.begin());
}

std::vector<std::string_view> split_lines(std::string_view src) {
  std::vector<std::string_view> lines;
  std::size_t b = 0;
  while (b < src.size()) {
    std::size_t e = src.find('\n', b);
    if (e == std::string_view::npos) {
      lines.push_back(src.substr(b));
      break;
    }
    lines.push_back(src.substr(b, e - b));
    b = e + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += lines[i];
    if (i + 1 < lines.size() || trailing_newline) out += '\n';
  }
  return out;
}

namespace {
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t indent_of(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) -> int {
    if (pos + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(k);
    if (c < 0) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  pos += len;
  return cp;
}

std::size_t codepoint_column(std::string_view line, std::size_t byte_col) {
  std::size_t pos = 0;
  std::size_t col = 0;
  while (pos < byte_col && pos < line.size()) {
    decode_utf8(line, pos);
    ++col;
  }
  return col;
}

namespace {

// Mirrors Lean's `isLetterLike` and `isSubScriptAlnum`.
bool is_letter_like(char32_t c) {
  return (0x3b1 <= c && c <= 0x3c9 && c != 0x3bb) ||
         (0x391 <= c && c <= 0x3A9 && c != 0x3A0 && c != 0x3A3) ||
         (0x3ca <= c && c <= 0x3fb) || (0x1f00 <= c && c <= 0x1ffe) ||
         (0x2100 <= c && c <= 0x214f) || (0x1d49c <= c && c <= 0x1d59f);
}

bool is_subscript_alnum(char32_t c) {
  return (0x2080 <= c && c <= 0x2089) || (0x2090 <= c && c <= 0x209c) ||
         (0x1d62 <= c && c <= 0x1d6a);
}

bool is_ascii_alpha(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char32_t c) { return c >= '0' && c <= '9'; }

}  // namespace

bool is_ident_start(char32_t c) { return is_ascii_alpha(c) || c == '_' || is_letter_like(c); }

bool is_ident_rest(char32_t c) {
  return is_ident_start(c) || is_ascii_digit(c) || c == '\'' || c == '!' || c == '?' ||
         is_subscript_alnum(c);
}

std::vector<Token> identifier_tokens(std::string_view src) {
  return identifier_tokens(src, classify_regions(src));
}

std::vector<Token> identifier_tokens(std::string_view src, const std::vector<Region>& regions) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  std::size_t line_start = 0;
  auto peek = [&](std::size_t at) -> char32_t {
    std::size_t p = at;
    return p < src.size() ? decode_utf8(src, p) : 0;
  };
  while (i < src.size()) {
    if (src[i] == '\n') {
      ++line;
      line_start = ++i;
      continue;
    }
    if (regions[i] != Region::kCode) {
      ++i;
      continue;
    }
    std::size_t p = i;
    const char32_t c = decode_utf8(src, p);
    if (is_ascii_digit(c)) {
      // Numeric literal: digits, optional fraction.
      i = p;
      while (i < src.size() && (is_ascii_digit(static_cast<unsigned char>(src[i])) ||
                                (src[i] == '.' && i + 1 < src.size() &&
                                 is_ascii_digit(static_cast<unsigned char>(src[i + 1]))))) {
        ++i;
      }
      continue;
    }
    if (!is_ident_start(c)) {
      i = p;
      continue;
    }
    // A token preceded by '.' is a projection tail (`x.1.foo`); keep it as its
    // own token, matching how Lean splits generalized field notation.
    const std::size_t begin = i;
    std::size_t end = p;
    while (end < src.size() && regions[end] == Region::kCode) {
      std::size_t q = end;
      const char32_t d = decode_utf8(src, q);
      if (is_ident_rest(d)) {
        end = q;
      } else if (d == '.' && q < src.size() && is_ident_start(peek(q))) {
        end = q;
      } else {
        break;
      }
    }
    Token tok;
    tok.text = std::string(src.substr(begin, end - begin));
    tok.offset = begin;
    tok.line = line;
    tok.col = static_cast<int>(codepoint_column(src.substr(line_start), begin - line_start));
    out.push_back(std::move(tok));
    i = end;
  }
  return out;
}

}  // namespace leaninst::text
