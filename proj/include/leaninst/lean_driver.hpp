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

#ifndef LEANINST_LEAN_DRIVER_HPP_
#define LEANINST_LEAN_DRIVER_HPP_

#include <array>
#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leaninst {

// The thirteen normalized error kinds, in knowledge-base frequency order.
enum class ErrorKind {
  kSyntaxError,
  kTypeMismatch,
  kFailedToSynthesize,
  kInvalidField,
  kUnknownIdentifier,
  kUnexpectedToken,
  kUnknownConstant,
  kUnclassified,
  kMissingDefinition,
  kTimeout,
  kNoGoals,
  kApplyFailed,
  kIncompleteProof,
};

inline constexpr std::array<ErrorKind, 13> kAllErrorKinds = {
    ErrorKind::kSyntaxError,       ErrorKind::kTypeMismatch,      ErrorKind::kFailedToSynthesize,
    ErrorKind::kInvalidField,      ErrorKind::kUnknownIdentifier, ErrorKind::kUnexpectedToken,
    ErrorKind::kUnknownConstant,   ErrorKind::kUnclassified,      ErrorKind::kMissingDefinition,
    ErrorKind::kTimeout,           ErrorKind::kNoGoals,           ErrorKind::kApplyFailed,
    ErrorKind::kIncompleteProof,
};

const char* error_kind_name(ErrorKind kind);
std::optional<ErrorKind> parse_error_kind(std::string_view name);

enum class Severity { kError, kWarning };
const char* severity_name(Severity s);

struct Diagnostic {
  std::string file;
  int line = 1;  // 1-based
  int col = 0;   // 0-based
  Severity severity = Severity::kError;
  std::string message;
  ErrorKind kind = ErrorKind::kUnclassified;
  std::optional<std::string> decl;
};

enum class DeclCategory { kDefinition, kTheorem, kInstance, kPreamble };
const char* decl_category_name(DeclCategory c);
std::optional<DeclCategory> parse_decl_category(std::string_view name);

struct DeclSpan {
  std::string name;  // empty for preamble spans
  DeclCategory category = DeclCategory::kPreamble;
  int start_line = 1;
  int end_line = 1;
  bool has_sorry = false;
  bool body_is_proof = false;
  // Line of the body delimiter (`:=`, `:= by`, `where`), 0 when absent.
  int body_line = 0;
};

struct CheckReport {
  std::vector<Diagnostic> diagnostics;
  std::vector<DeclSpan> decls;
  int error_count = 0;
  bool compiled_ok = true;
  // Raw lines preceding the first diagnostic header.
  int ignored_lines = 0;
};

struct ParsedDiagnostics {
  std::vector<Diagnostic> diagnostics;
  int ignored_lines = 0;
};

// Grammar: `<file>:<line>:<col>: <severity>: <message…>`; lines that do not
// match are continuations of the preceding message. `info` is read as a
// warning.
ParsedDiagnostics parse_diagnostics_report(std::string_view raw);
std::vector<Diagnostic> parse_diagnostics(std::string_view raw);

// First matching rule of the ordered keyword table; otherwise unclassified.
ErrorKind normalize_error(std::string_view message);

struct NormalizationRule {
  ErrorKind kind;
  enum class Match { kContains, kPrefix } match;
  std::string_view needle;  // lowercase
};
const std::vector<NormalizationRule>& normalization_table();

struct SorrySite {
  int line = 1;
  int col = 0;
};

// `sorry` tokens outside comments and string literals.
std::vector<SorrySite> scan_sorries(std::string_view src);

// Line-keyword heuristic: each top-level keyword line opens a span that runs
// to the line before the next one. Adjacent preamble spans are merged and
// lines before the first keyword form a preamble span.
std::vector<DeclSpan> index_declarations(std::string_view src);

// The exact bytes of a span; concatenating all spans reproduces `src`.
std::string_view span_text(std::string_view src, const DeclSpan& span);

struct BodyDelimiter {
  enum class Kind { kAssignBy, kAssign, kWhere } kind;
  std::size_t offset = 0;   // byte offset of the delimiter in the searched text
  std::size_t end = 0;      // one past the delimiter (past `by` for kAssignBy)
};
// First `:=` / `where` at bracket depth zero in code.
std::optional<BodyDelimiter> find_body_delimiter(std::string_view decl_text);

// Sets `decl` to the owning span's name; preamble lines give no owner.
void attribute_diagnostics(std::vector<Diagnostic>& diags, const std::vector<DeclSpan>& spans);

// Parses raw checker output against `src` and assembles the report.
CheckReport build_report(std::string_view src, std::string_view raw_output,
                         std::string_view file_label);

class Checker {
 public:
  virtual ~Checker() = default;
  virtual CheckReport check_source(std::string_view src, std::string_view file_label) = 0;
  CheckReport check(const std::filesystem::path& file);
  std::size_t invocations() const { return invocations_.load(); }

 protected:
  std::atomic<std::size_t> invocations_{0};
};

// Maps the SHA-256 of the file contents to `<digest>.txt` holding raw
// diagnostics. No fixture means the file compiles cleanly.
class MockChecker final : public Checker {
 public:
  explicit MockChecker(std::filesystem::path fixtures_dir);
  CheckReport check_source(std::string_view src, std::string_view file_label) override;
  const std::filesystem::path& fixtures_dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct LakeCheckerOptions {
  std::filesystem::path workspace;
  double timeout_seconds = 300;
  std::string lake_binary = "lake";
};

// Runs `lake env lean <scratch copy>` inside a Lake workspace.
class LakeChecker final : public Checker {
 public:
  explicit LakeChecker(LakeCheckerOptions options);
  CheckReport check_source(std::string_view src, std::string_view file_label) override;

 private:
  LakeCheckerOptions options_;
  std::filesystem::path lake_path_;
};

}  // namespace leaninst

#endif  // LEANINST_LEAN_DRIVER_HPP_
