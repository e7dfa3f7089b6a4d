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

// HTTP transport for the live chat-completion backend. Kept in its own
// translation unit because httplib is expensive to compile.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "leaninst/error.hpp"
#include "leaninst/llm_gateway.hpp"

namespace leaninst {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // /v1 (no trailing slash)
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::kConfig, "base URL lacks a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

const char* env_or_null(const char* name) {
  const char* v = std::getenv(name);
  return (v && *v) ? v : nullptr;
}

}  // namespace

LiveBackend::LiveBackend(LiveBackendOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    fail(ErrorCode::kConfig, "live backend requires LEANINST_LLM_BASE_URL");
  }
  split_url(options_.base_url);
}

LiveBackendOptions LiveBackend::options_from_env() {
  LiveBackendOptions o;
  if (const char* v = env_or_null("LEANINST_LLM_BASE_URL")) o.base_url = v;
  if (const char* v = env_or_null("LEANINST_LLM_API_KEY")) o.api_key = v;
  if (const char* v = env_or_null("LEANINST_LLM_MODEL")) o.model_override = v;
  return o;
}

std::string LiveBackend::complete(const CompletionRequest& request) {
  const SplitUrl url = split_url(options_.base_url);
  const GenParams& params = *request.params;
  nlohmann::json body{
      {"model", options_.model_override.value_or(params.model_name)},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_tokens},
      {"top_p", params.top_p},
      {"frequency_penalty", params.frequency_penalty},
      {"stream", false}};
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  const auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  double backoff = options_.backoff_seconds;
  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2;
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(url.path + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out =
          err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && std::chrono::steady_clock::now() - started >= timeout);
      if (timed_out) {
        last_error = "timeout";
        if (attempt == options_.retries) {
          throw GatewayError(ErrorCode::kTimeout, "chat completion timed out");
        }
        continue;
      }
      last_error = httplib::to_string(err);
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw GatewayError(ErrorCode::kBackendUnavailable,
                         "chat completion failed: HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200));
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError(ErrorCode::kBackendUnavailable,
                         std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw GatewayError(ErrorCode::kBackendUnavailable, "chat completion failed: " + last_error);
}

}  // namespace leaninst
