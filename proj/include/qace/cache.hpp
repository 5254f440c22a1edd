// Copyright 2026 The QACE Authors
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

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "qace/error.hpp"

namespace qace {

inline std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorKind::kCacheError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

// Content address of one logical backend request. The canonical body is the
// compact dump of the request object; nlohmann::json keeps object keys
// sorted, so field order in the caller never matters.
struct CacheKey {
  std::string digest;
  std::string canonical_request;

  static CacheKey Of(std::string_view backend_id, std::string_view capability,
                     const nlohmann::json& request) {
    CacheKey key;
    key.canonical_request = request.dump();
    std::string material;
    material.reserve(backend_id.size() + capability.size() +
                     key.canonical_request.size() + 2);
    material.append(backend_id).push_back('\x1f');
    material.append(capability).push_back('\x1f');
    material.append(key.canonical_request);
    key.digest = Sha256Hex(material);
    return key;
  }

  bool operator==(const CacheKey&) const = default;
};

// Persistent response store, one JSON file per entry:
//   {key, canonical_request, response, backend_id, timestamp}
// Writes go through a temporary file and a rename, so concurrent writers of
// the same key leave one complete entry (last write wins).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path directory)
      : directory_(std::move(directory)) {
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    if (ec) {
      spdlog::warn("cache directory {} unusable ({}); caching disabled",
                   directory_.string(), ec.message());
      writable_ = false;
    }
  }

  const std::filesystem::path& directory() const { return directory_; }

  std::optional<nlohmann::json> Get(const CacheKey& key) {
    Touch(key);
    std::ifstream in(PathOf(key), std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json entry;
    try {
      in >> entry;
    } catch (const nlohmann::json::exception& e) {
      spdlog::warn("ignoring corrupt cache entry {}: {}", key.digest, e.what());
      return std::nullopt;
    }
    if (entry.value("canonical_request", std::string()) !=
        key.canonical_request) {
      throw Error(ErrorKind::kCacheError,
                  "digest collision or tampered entry for key " + key.digest);
    }
    hits_.fetch_add(1);
    return entry.at("response");
  }

  // Returns false (after a warning) when the entry could not be persisted.
  bool Put(const CacheKey& key, std::string_view backend_id,
           const nlohmann::json& response) {
    Touch(key);
    if (!writable_) return false;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    nlohmann::json entry = {
        {"key", key.digest},
        {"canonical_request", key.canonical_request},
        {"response", response},
        {"backend_id", backend_id},
        {"timestamp",
         std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
    const auto target = PathOf(key);
    std::ostringstream tmp_name;
    tmp_name << key.digest << ".tmp." << std::this_thread::get_id() << "."
             << counter_.fetch_add(1);
    const auto tmp = directory_ / tmp_name.str();
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << entry.dump() << '\n';
      if (!out) {
        spdlog::warn("CacheError: cannot write {}; passing through",
                     tmp.string());
        return false;
      }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
      spdlog::warn("CacheError: cannot store {}: {}; passing through",
                   target.string(), ec.message());
      std::filesystem::remove(tmp, ec);
      return false;
    }
    stores_.fetch_add(1);
    return true;
  }

  std::size_t hits() const { return hits_.load(); }
  std::size_t stores() const { return stores_.load(); }

  // Digest over the sorted set of keys this process has looked up or
  // stored; stable between a cold and a warm run of the same workload.
  std::string TouchedDigest() const {
    std::lock_guard lock(mutex_);
    std::string joined;
    for (const auto& k : touched_) joined += k + "\n";
    return Sha256Hex(joined);
  }

 private:
  std::filesystem::path PathOf(const CacheKey& key) const {
    return directory_ / (key.digest + ".json");
  }

  void Touch(const CacheKey& key) {
    std::lock_guard lock(mutex_);
    touched_.insert(key.digest);
  }

  std::filesystem::path directory_;
  bool writable_ = true;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> stores_{0};
  std::atomic<std::size_t> counter_{0};
  mutable std::mutex mutex_;
  std::set<std::string> touched_;
};

}  // namespace qace
