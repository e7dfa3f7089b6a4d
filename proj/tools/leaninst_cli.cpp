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

// Command-line front end. Talks to the library only through leaninst.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "leaninst/leaninst.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

// Owns a string handed out by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { leaninst_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

int report_failure(leaninst_status s) {
  std::cerr << "error [" << leaninst_status_name(s) << "]: " << leaninst_last_error() << "\n";
  return kExitConfig;
}

bool read_text(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-to-instance autoformalization pipeline for Lean 4"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(leaninst_version()));

  // run
  auto* run = app.add_subcommand("run", "Run the pipeline over manifest problems");
  std::string config_path;
  std::string filter;
  std::vector<std::string> overrides;
  bool print_summary = false;
  run->add_option("-c,--config", config_path, "Config file (key = value lines)")->required();
  run->add_option("-f,--filter", filter, "Comma-separated problem ids or class ids");
  run->add_option("--set", overrides, "Override a config key: key=value");
  run->add_flag("--summary", print_summary, "Print the JSON run summary");

  // evaluate / report
  auto* evaluate = app.add_subcommand("evaluate", "Score a run directory");
  std::string run_dir;
  bool as_json = false;
  evaluate->add_option("run_dir", run_dir, "Run directory")->required();
  evaluate->add_flag("--json", as_json, "Print the structured report");
  auto* report = app.add_subcommand("report", "Write report.json, report.txt and timing.csv");
  report->add_option("run_dir", run_dir, "Run directory")->required();

  // kb
  auto* kb = app.add_subcommand("kb", "Inspect or seed the error knowledge base");
  kb->require_subcommand(1);
  std::string kb_path;
  kb->add_option("--kb", kb_path, "Knowledge base file (JSON lines)")->required();
  auto* kb_stats = kb->add_subcommand("stats", "Entry count and per-kind histogram");
  auto* kb_show = kb->add_subcommand("show", "Print one entry");
  long long kb_id = 0;
  kb_show->add_option("id", kb_id, "Entry id")->required();
  auto* kb_seed = kb->add_subcommand("seed", "Import every *.jsonl from a directory");
  std::string seed_dir;
  kb_seed->add_option("dir", seed_dir, "Seed directory")->required();
  auto* kb_query = kb->add_subcommand("query", "Rank entries for an error message");
  std::string query;
  std::size_t query_k = 3;
  kb_query->add_option("message", query, "Error message")->required();
  kb_query->add_option("-k", query_k, "Number of entries");

  // fixer
  auto* fixer = app.add_subcommand("fixer", "Static rewrite rules");
  fixer->require_subcommand(1);
  auto* fixer_rules = fixer->add_subcommand("rules", "List the rules in application order");
  auto* fixer_apply = fixer->add_subcommand("apply", "Apply the rules to a file and print it");
  std::string fix_file;
  fixer_apply->add_option("file", fix_file, "Lean file")->required()->check(CLI::ExistingFile);

  // check / classify
  auto* check = app.add_subcommand("check", "Type-check a Lean file");
  std::string check_file;
  std::string mock_dir;
  std::string workspace;
  double check_timeout = 300;
  check->add_option("file", check_file, "Lean file")->required()->check(CLI::ExistingFile);
  auto* mock_opt = check->add_option("--mock", mock_dir, "Mock checker fixture directory");
  auto* ws_opt = check->add_option("--workspace", workspace, "Lake workspace for the real checker");
  mock_opt->excludes(ws_opt);
  check->add_option("--timeout", check_timeout, "Seconds before the checker is killed");
  auto* classify = app.add_subcommand("classify", "Map an error message to its kind");
  std::string message;
  classify->add_option("message", message, "Error message")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    leaninst_context* ctx = nullptr;
    leaninst_status s = leaninst_context_open(config_path.c_str(), &ctx);
    if (s != LEANINST_OK) return report_failure(s);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << o << "'\n";
        leaninst_context_close(ctx);
        return kExitConfig;
      }
      s = leaninst_context_set(ctx, o.substr(0, eq).c_str(), o.substr(eq + 1).c_str());
      if (s != LEANINST_OK) {
        leaninst_context_close(ctx);
        return report_failure(s);
      }
    }
    Owned summary;
    int failed = 0;
    s = leaninst_run(ctx, filter.c_str(), &summary.p, &failed);
    leaninst_context_close(ctx);
    if (s != LEANINST_OK) return report_failure(s);
    if (print_summary) std::cout << summary.str() << "\n";
    for (const auto& w : nlohmann::json::parse(summary.str()).at("warnings")) {
      std::cerr << "warning: " << w.get<std::string>() << "\n";
    }
    if (failed > 0) {
      std::cerr << failed << " problem(s) failed; see run.log\n";
      return kExitPartial;
    }
    return kExitOk;
  }

  if (evaluate->parsed()) {
    Owned j, t;
    const leaninst_status s = leaninst_evaluate(run_dir.c_str(), &j.p, &t.p);
    if (s != LEANINST_OK) return report_failure(s);
    std::cout << (as_json ? j.str() + "\n" : t.str());
    return kExitOk;
  }

  if (report->parsed()) {
    Owned t, csv;
    const leaninst_status s = leaninst_report(run_dir.c_str(), &t.p, &csv.p);
    if (s != LEANINST_OK) return report_failure(s);
    std::cout << t.str() << "\n" << csv.str();
    return kExitOk;
  }

  if (kb->parsed()) {
    leaninst_kb* handle = nullptr;
    leaninst_status s = leaninst_kb_open(kb_path.c_str(), &handle);
    if (s != LEANINST_OK) return report_failure(s);
    Owned out;
    std::size_t imported = 0;
    if (kb_stats->parsed()) s = leaninst_kb_stats(handle, &out.p);
    if (kb_show->parsed()) s = leaninst_kb_show(handle, kb_id, &out.p);
    if (kb_query->parsed()) s = leaninst_kb_retrieve(handle, query.c_str(), query_k, &out.p);
    if (kb_seed->parsed()) s = leaninst_kb_seed(handle, seed_dir.c_str(), &imported);
    leaninst_kb_close(handle);
    if (s != LEANINST_OK) return report_failure(s);
    if (kb_seed->parsed()) {
      std::cout << "imported " << imported << " entries into " << kb_path << "\n";
    } else {
      std::cout << out.str() << "\n";
    }
    return kExitOk;
  }

  if (fixer_rules->parsed()) {
    Owned out;
    const leaninst_status s = leaninst_fixer_rules(&out.p);
    if (s != LEANINST_OK) return report_failure(s);
    std::cout << out.str() << "\n";
    return kExitOk;
  }

  if (fixer_apply->parsed()) {
    std::string src;
    if (!read_text(fix_file, src)) {
      std::cerr << "error: cannot read " << fix_file << "\n";
      return kExitConfig;
    }
    Owned fixed, applied;
    const leaninst_status s = leaninst_fixer_apply(src.c_str(), &fixed.p, &applied.p);
    if (s != LEANINST_OK) return report_failure(s);
    std::cout << fixed.str();
    std::cerr << "applied: " << applied.str() << "\n";
    return kExitOk;
  }

  if (check->parsed()) {
    leaninst_checker* c = nullptr;
    leaninst_status s = mock_opt->count() > 0
                            ? leaninst_checker_open_mock(mock_dir.c_str(), &c)
                            : leaninst_checker_open_lake(workspace.empty() ? "." : workspace.c_str(),
                                                         check_timeout, &c);
    if (s != LEANINST_OK) return report_failure(s);
    Owned out;
    s = leaninst_check_file(c, check_file.c_str(), &out.p);
    leaninst_checker_close(c);
    if (s != LEANINST_OK) return report_failure(s);
    std::cout << out.str() << "\n";
    return kExitOk;
  }

  if (classify->parsed()) {
    Owned kind;
    const leaninst_status s = leaninst_classify(message.c_str(), &kind.p);
    if (s != LEANINST_OK) return report_failure(s);
    std::cout << kind.str() << "\n";
    return kExitOk;
  }
  return kExitOk;
}
