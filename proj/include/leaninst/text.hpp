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

#ifndef LEANINST_TEXT_HPP_
#define LEANINST_TEXT_HPP_

// Small lexical helpers for Lean 4 source. Nothing here parses Lean; it only
// knows enough to tell code apart from comments and string literals and to
// pull identifier tokens out of code.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace leaninst::text {

enum class Region : std::uint8_t { kCode, kLineComment, kBlockComment, kString };

// One entry per byte of `src`. Block comments nest, as they do in Lean.
std::vector<Region> classify_regions(std::string_view src);

// Byte offsets of line starts. Line numbers are 1-based throughout.
class LineTable {
 public:
  explicit LineTable(std::string_view src);

  int line_count() const { return static_cast<int>(starts_.size()); }
  std::size_t line_start(int line) const { return starts_[line - 1]; }
  // Offset one past the line's terminating newline (or end of input).
  std::size_t line_end_inclusive(int line) const;
  // The line without its newline.
  std::string_view line(int line) const;
  int line_of_offset(std::size_t offset) const;

 private:
  std::string_view src_;
  std::vector<std::size_t> starts_;
};

// Lines without terminators. "a\nb\n" and "a\nb" both give {"a", "b"}; the
// empty string gives no lines.
std::vector<std::string_view> split_lines(std::string_view src);
std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline);

std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);
std::size_t indent_of(std::string_view line);
bool is_blank(std::string_view line);
std::string to_lower_ascii(std::string_view s);

// UTF-8 decoding; malformed bytes decode to U+FFFD and advance one byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
std::size_t codepoint_column(std::string_view line, std::size_t byte_col);

bool is_ident_start(char32_t c);
bool is_ident_rest(char32_t c);

struct Token {
  std::string text;
  std::size_t offset = 0;
  int line = 0;  // 1-based
  int col = 0;   // 0-based, in codepoints
};

// Dotted identifiers (`Lasso_pro.f`, `x₀`) found in code regions only.
std::vector<Token> identifier_tokens(std::string_view src);
std::vector<Token> identifier_tokens(std::string_view src,
                                     const std::vector<Region>& regions);

}  // namespace leaninst::text

#endif  // LEANINST_TEXT_HPP_
