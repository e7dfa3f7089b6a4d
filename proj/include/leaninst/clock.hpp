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

#ifndef LEANINST_CLOCK_HPP_
#define LEANINST_CLOCK_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

namespace leaninst {

// Source of wall-clock stamps and elapsed time. The virtual clock advances by
// a fixed tick on every read so that scripted runs are reproducible to the
// byte, durations included.
class Clock {
 public:
  virtual ~Clock() = default;
  // Milliseconds since the Unix epoch.
  virtual std::int64_t now_ms() = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }
};

class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(std::int64_t start_ms = 1767225600000, std::int64_t tick_ms = 10)
      : now_(start_ms), tick_(tick_ms) {}
  std::int64_t now_ms() override { return now_.fetch_add(tick_); }

 private:
  std::atomic<std::int64_t> now_;
  std::int64_t tick_;
};

// ISO-8601 UTC with millisecond precision, e.g. 2026-01-01T00:00:00.000Z.
std::string format_iso8601(std::int64_t epoch_ms);

}  // namespace leaninst

#endif  // LEANINST_CLOCK_HPP_
