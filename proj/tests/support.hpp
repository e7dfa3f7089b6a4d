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

#ifndef LEANINST_TESTS_SUPPORT_HPP_
#define LEANINST_TESTS_SUPPORT_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unistd.h>

#include "leaninst/digest.hpp"
#include "leaninst/lean_driver.hpp"
#include "leaninst/llm_gateway.hpp"
#include "leaninst/text.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(LEANINST_SOURCE_DIR); }
inline fs::path assets_dir() { return source_dir() / "assets"; }
inline fs::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, std::string_view data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << data;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("leaninst_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(std::string_view rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

// Registers canned checker output for `src` in a mock fixture directory.
inline void add_mock(const fs::path& dir, std::string_view src, std::string_view raw) {
  write_file(dir / (leaninst::sha256_hex(src) + ".txt"), raw);
}

inline std::string error_line(int line, int col, std::string_view msg) {
  return "Test.lean:" + std::to_string(line) + ":" + std::to_string(col) + ": error: " +
         std::string(msg) + "\n";
}

inline leaninst::PromptLibrary shipped_prompts() {
  return leaninst::PromptLibrary::load_dir(assets_dir() / "prompts");
}

inline std::shared_ptr<leaninst::FunctionBackend> backend(
    std::function<std::string(const leaninst::CompletionRequest&)> fn) {
  return std::make_shared<leaninst::FunctionBackend>(std::move(fn));
}

inline std::string fenced(std::string_view code) {
  return "```lean4\n" + std::string(code) + "\n```\n";
}

// Every `BAD` token in code is an unknown-identifier error on its line.
class TokenChecker final : public leaninst::Checker {
 public:
  leaninst::CheckReport check_source(std::string_view src, std::string_view label) override {
    ++invocations_;
    std::string raw;
    for (const auto& t : leaninst::text::identifier_tokens(src)) {
      if (t.text == "BAD") {
        raw += std::string(label) + ":" + std::to_string(t.line) + ":" + std::to_string(t.col) +
               ": error: unknown identifier 'BAD'\n";
      }
    }
    return leaninst::build_report(src, raw, label);
  }
};

// Seeded so property tests replay identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen_); }
  bool coin() { return below(2) == 1; }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace testing

#endif  // LEANINST_TESTS_SUPPORT_HPP_
