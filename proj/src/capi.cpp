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

#include "leaninst/leaninst.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "leaninst/error.hpp"
#include "leaninst/error_kb.hpp"
#include "leaninst/lean_driver.hpp"
#include "leaninst/pipeline.hpp"
#include "leaninst/static_fixer.hpp"

struct leaninst_context {
  leaninst::RunConfig config;
  std::filesystem::path base_dir;
};

struct leaninst_kb {
  std::filesystem::path path;
  leaninst::ErrorKB kb;
};

struct leaninst_checker {
  std::unique_ptr<leaninst::Checker> checker;
};

namespace {

using json = nlohmann::json;

thread_local std::string g_last_error;

leaninst_status to_status(leaninst::ErrorCode code) {
  return static_cast<leaninst_status>(static_cast<int>(code));
}

template <typename Fn>
leaninst_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return LEANINST_OK;
  } catch (const leaninst::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LEANINST_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return LEANINST_E_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) leaninst::fail(leaninst::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

json entry_json(const leaninst::KBEntry& e) { return json::parse(leaninst::kb_entry_to_json_line(e)); }

json report_json(const leaninst::CheckReport& r) {
  json j;
  j["compiled_ok"] = r.compiled_ok;
  j["error_count"] = r.error_count;
  json diags = json::array();
  for (const auto& d : r.diagnostics) {
    json x = {{"file", d.file},
              {"line", d.line},
              {"col", d.col},
              {"severity", leaninst::severity_name(d.severity)},
              {"kind", leaninst::error_kind_name(d.kind)},
              {"message", d.message}};
    x["decl"] = d.decl ? json(*d.decl) : json(nullptr);
    diags.push_back(std::move(x));
  }
  j["diagnostics"] = diags;
  json decls = json::array();
  for (const auto& s : r.decls) {
    if (s.category == leaninst::DeclCategory::kPreamble) continue;
    decls.push_back({{"name", s.name},
                     {"category", leaninst::decl_category_name(s.category)},
                     {"start_line", s.start_line},
                     {"end_line", s.end_line},
                     {"has_sorry", s.has_sorry},
                     {"proof_obligation", s.body_is_proof}});
  }
  j["decls"] = decls;
  return j;
}

}  // namespace

extern "C" {

const char* leaninst_version(void) { return "0.1.0"; }

const char* leaninst_status_name(leaninst_status status) {
  if (status == LEANINST_OK) return "Ok";
  if (status < LEANINST_E_INVALID_ARGUMENT || status > LEANINST_E_INTERNAL) return "Unknown";
  return leaninst::error_code_name(static_cast<leaninst::ErrorCode>(static_cast<int>(status)));
}

const char* leaninst_last_error(void) { return g_last_error.c_str(); }

void leaninst_string_free(char* s) { std::free(s); }

leaninst_status leaninst_context_open(const char* config_path, leaninst_context** out) {
  return guarded([&] {
    require(out, "out");
    auto ctx = std::make_unique<leaninst_context>();
    if (config_path) {
      ctx->config = leaninst::load_config(config_path);
      ctx->base_dir = std::filesystem::absolute(config_path).parent_path();
    } else {
      ctx->config = leaninst::parse_config("", std::filesystem::current_path());
      ctx->base_dir = std::filesystem::current_path();
    }
    *out = ctx.release();
  });
}

leaninst_status leaninst_context_set(leaninst_context* ctx, const char* key, const char* value) {
  return guarded([&] {
    require(ctx, "ctx");
    require(key, "key");
    require(value, "value");
    // Values given programmatically resolve against the working directory.
    leaninst::set_config_value(ctx->config, key, value, std::filesystem::current_path());
  });
}

void leaninst_context_close(leaninst_context* ctx) { delete ctx; }

leaninst_status leaninst_run(leaninst_context* ctx, const char* filter, char** summary_json,
                             int* failed) {
  return guarded([&] {
    require(ctx, "ctx");
    const leaninst::RunSummary s = leaninst::run_pipeline(ctx->config, filter ? filter : "");
    if (failed) *failed = s.failed;
    if (summary_json) {
      json j;
      j["records"] = json::array();
      for (const auto& r : s.records) j["records"].push_back(json::parse(leaninst::run_record_to_json(r)));
      j["failed"] = s.failed;
      j["warnings"] = s.warnings;
      *summary_json = dup(j.dump(2));
    }
  });
}

leaninst_status leaninst_evaluate(const char* run_dir, char** report_json, char** report_text) {
  return guarded([&] {
    require(run_dir, "run_dir");
    const leaninst::EvalReport r = leaninst::evaluate_run_dir(run_dir);
    if (report_json) *report_json = dup(leaninst::eval_report_to_json(r));
    if (report_text) *report_text = dup(leaninst::eval_report_to_text(r));
  });
}

leaninst_status leaninst_report(const char* run_dir, char** report_text, char** timing_csv) {
  return guarded([&] {
    require(run_dir, "run_dir");
    const leaninst::ReportFiles f = leaninst::write_report(run_dir);
    if (report_text) *report_text = dup(f.text);
    if (timing_csv) *timing_csv = dup(f.timing_csv);
  });
}

leaninst_status leaninst_kb_open(const char* path, leaninst_kb** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto kb = std::make_unique<leaninst_kb>();
    kb->path = path;
    std::vector<leaninst::CorruptLine> corrupt;
    kb->kb.load(kb->path, &corrupt);
    if (!corrupt.empty()) {
      leaninst::fail(leaninst::ErrorCode::kSchemaViolation,
                     "kb line " + std::to_string(corrupt.front().line_no) + ": " +
                         corrupt.front().reason);
    }
    *out = kb.release();
  });
}

leaninst_status leaninst_kb_stats(leaninst_kb* kb, char** out) {
  return guarded([&] {
    require(kb, "kb");
    require(out, "out");
    json j;
    j["entries"] = kb->kb.size();
    json h = json::array();
    for (const auto& [kind, n] : kb->kb.histogram()) {
      h.push_back({{"kind", leaninst::error_kind_name(kind)}, {"count", n}});
    }
    j["histogram"] = h;
    *out = dup(j.dump(2));
  });
}

leaninst_status leaninst_kb_show(leaninst_kb* kb, long long id, char** out) {
  return guarded([&] {
    require(kb, "kb");
    require(out, "out");
    const auto e = kb->kb.get(id);
    if (!e) leaninst::fail(leaninst::ErrorCode::kNotFound, "no kb entry " + std::to_string(id));
    *out = dup(entry_json(*e).dump(2));
  });
}

leaninst_status leaninst_kb_seed(leaninst_kb* kb, const char* seed_dir, size_t* imported) {
  return guarded([&] {
    require(kb, "kb");
    require(seed_dir, "seed_dir");
    std::vector<leaninst::CorruptLine> corrupt;
    const std::size_t n = kb->kb.import_seed(seed_dir, &corrupt);
    if (!corrupt.empty()) {
      leaninst::fail(leaninst::ErrorCode::kSchemaViolation,
                     "seed line " + std::to_string(corrupt.front().line_no) + ": " +
                         corrupt.front().reason);
    }
    kb->kb.persist(kb->path);
    if (imported) *imported = n;
  });
}

leaninst_status leaninst_kb_retrieve(leaninst_kb* kb, const char* message, size_t k, char** out) {
  return guarded([&] {
    require(kb, "kb");
    require(message, "message");
    require(out, "out");
    const auto r = kb->kb.peek(message, k);
    json j = json::array();
    for (const auto& s : r.entries) j.push_back({{"score", s.score}, {"entry", entry_json(s.entry)}});
    *out = dup(j.dump(2));
  });
}

void leaninst_kb_close(leaninst_kb* kb) { delete kb; }

leaninst_status leaninst_classify(const char* message, char** kind) {
  return guarded([&] {
    require(message, "message");
    require(kind, "kind");
    *kind = dup(leaninst::error_kind_name(leaninst::normalize_error(message)));
  });
}

leaninst_status leaninst_fixer_rules(char** out) {
  return guarded([&] {
    require(out, "out");
    json j = json::array();
    for (const auto& r : leaninst::rewrite_rules()) {
      j.push_back({{"id", r.id}, {"description", r.description}});
    }
    *out = dup(j.dump(2));
  });
}

leaninst_status leaninst_fixer_apply(const char* source, char** fixed, char** applied_json) {
  return guarded([&] {
    require(source, "source");
    const leaninst::FixResult r = leaninst::apply_rules(source);
    if (fixed) *fixed = dup(r.source);
    if (applied_json) *applied_json = dup(json(r.applied).dump());
  });
}

leaninst_status leaninst_checker_open_mock(const char* fixtures_dir, leaninst_checker** out) {
  return guarded([&] {
    require(fixtures_dir, "fixtures_dir");
    require(out, "out");
    auto c = std::make_unique<leaninst_checker>();
    c->checker = std::make_unique<leaninst::MockChecker>(fixtures_dir);
    *out = c.release();
  });
}

leaninst_status leaninst_checker_open_lake(const char* workspace, double timeout_seconds,
                                           leaninst_checker** out) {
  return guarded([&] {
    require(workspace, "workspace");
    require(out, "out");
    leaninst::LakeCheckerOptions o;
    o.workspace = workspace;
    if (timeout_seconds > 0) o.timeout_seconds = timeout_seconds;
    auto c = std::make_unique<leaninst_checker>();
    c->checker = std::make_unique<leaninst::LakeChecker>(o);
    *out = c.release();
  });
}

leaninst_status leaninst_check_file(leaninst_checker* checker, const char* path, char** out) {
  return guarded([&] {
    require(checker, "checker");
    require(path, "path");
    require(out, "out");
    *out = dup(report_json(checker->checker->check(path)).dump(2));
  });
}

void leaninst_checker_close(leaninst_checker* checker) { delete checker; }

}  // extern "C"
