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

#ifndef LEANINST_SRC_FSUTIL_HPP_
#define LEANINST_SRC_FSUTIL_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace leaninst::detail {

// Throws kIo on failure.
std::string read_file(const std::filesystem::path& p);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& p, std::string_view data);
void append_file(const std::filesystem::path& p, std::string_view data);

}  // namespace leaninst::detail

#endif  // LEANINST_SRC_FSUTIL_HPP_
