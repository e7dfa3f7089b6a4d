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

#ifndef LEANINST_SRC_SUBPROCESS_HPP_
#define LEANINST_SRC_SUBPROCESS_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace leaninst::detail {

struct ProcessResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
  bool timed_out = false;
  bool spawn_failed = false;
};

// Runs argv[0] (PATH lookup) in `cwd`. On timeout the whole process group is
// killed. timeout_seconds <= 0 disables the limit.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          double timeout_seconds);

// Resolves `name` against PATH unless it already contains a slash.
std::filesystem::path find_executable(const std::string& name);

}  // namespace leaninst::detail

#endif  // LEANINST_SRC_SUBPROCESS_HPP_
