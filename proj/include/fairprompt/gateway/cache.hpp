// Copyright 2026 The fairprompt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <string>

#include <openssl/evp.h>

#include "fairprompt/gateway/types.hpp"
#include "fairprompt/util/fs.hpp"

namespace fairprompt::gateway {

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::InvalidArgument, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

/// Digest over the semantic request fields only; endpoint URL and
/// credentials never enter it. json objects keep keys sorted, so dump() is
/// canonical.
inline std::string cache_key(const ChatRequest& request) { return sha256_hex(to_json(request).dump()); }

/// Content-addressed store: <dir>/<first two hex chars>/<key>.json holding
/// {cache_key, request_echo, response, created_at, payload_digest}.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
  }

  static std::string payload_digest(const json& request_echo, const json& response) {
    return sha256_hex(json{{"request_echo", request_echo}, {"response", response}}.dump());
  }

  std::optional<ChatResponse> get(const std::string& key) const {
    const auto path = entry_path(key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    json entry;
    try {
      entry = json::parse(util::read_file(path));
    } catch (const json::exception&) {
      fail(ErrorCode::CacheCorrupt, "unparseable cache entry " + path.string());
    }
    try {
      const auto& echo = entry.at("request_echo");
      const auto& response = entry.at("response");
      if (entry.at("payload_digest").get<std::string>() != payload_digest(echo, response))
        fail(ErrorCode::CacheCorrupt, "payload digest mismatch in " + path.string());
      if (entry.at("cache_key").get<std::string>() != key || cache_key(request_from_json(echo)) != key)
        fail(ErrorCode::CacheCorrupt, "key mismatch in " + path.string());
      auto r = response_from_json(response);
      r.cached = true;
      return r;
    } catch (const json::exception& ex) {
      fail(ErrorCode::CacheCorrupt, std::string("malformed cache entry: ") + ex.what());
    }
  }

  void put(const std::string& key, const ChatRequest& request, const ChatResponse& response) const {
    const json echo = to_json(request);
    const json resp = to_json(response);
    const json entry{{"cache_key", key},
                     {"request_echo", echo},
                     {"response", resp},
                     {"created_at", now_iso8601()},
                     {"payload_digest", payload_digest(echo, resp)}};
    util::write_file_atomic(entry_path(key), entry.dump(2));
  }

  std::size_t size() const {
    std::size_t n = 0;
    std::error_code ec;
    if (!std::filesystem::exists(dir_, ec)) return 0;
    for (const auto& f : std::filesystem::recursive_directory_iterator(dir_))
      if (f.is_regular_file() && f.path().extension() == ".json") ++n;
    return n;
  }

 private:
  static std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::filesystem::path dir_;
};

}  // namespace fairprompt::gateway
