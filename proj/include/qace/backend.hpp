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

// Model backends speak one protocol with a handful of capabilities:
//
//   generate_questions  {caption, spans:[{text, head_noun, char_start,
//                        char_end}]}        -> {questions:[{question, span_index}]}
//   answer_text         {question, context} -> {answer, p_unanswerable}
//   answer_visual       {question, image_id}-> {answer, p_unanswerable}
//   similarity          {a, b}              -> {score}
//   extract_spans       {caption}           -> {spans:[...]}        (optional)
//
// Two implementations live here: MockBackend replays a JSON script, and
// StreamBackend talks JSON lines to a child process over its stdin/stdout,
// wrapping every message in an envelope {id, capability, request} and
// matching replies {id, response} / {id, error:{kind, message}} by id.

#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "qace/error.hpp"

namespace qace {

enum class Capability {
  kGenerateQuestions,
  kAnswerText,
  kAnswerVisual,
  kSimilarity,
  kExtractSpans,
};

inline constexpr std::array<Capability, 5> kAllCapabilities = {
    Capability::kGenerateQuestions, Capability::kAnswerText,
    Capability::kAnswerVisual, Capability::kSimilarity,
    Capability::kExtractSpans};

inline std::string_view CapabilityName(Capability c) {
  switch (c) {
    case Capability::kGenerateQuestions: return "generate_questions";
    case Capability::kAnswerText: return "answer_text";
    case Capability::kAnswerVisual: return "answer_visual";
    case Capability::kSimilarity: return "similarity";
    case Capability::kExtractSpans: return "extract_spans";
  }
  return "unknown";
}

inline std::optional<Capability> ParseCapability(std::string_view name) {
  for (Capability c : kAllCapabilities) {
    if (CapabilityName(c) == name) return c;
  }
  return std::nullopt;
}

// Maps an {kind, message} error object sent by a backend onto Error.
inline Error BackendError(const nlohmann::json& error) {
  const std::string kind =
      error.is_object() ? error.value("kind", std::string()) : std::string();
  const std::string message =
      error.is_object() ? error.value("message", std::string())
                        : error.is_string() ? error.get<std::string>() : "";
  for (int i = 0; i <= static_cast<int>(ErrorKind::kFeatureShapeError); ++i) {
    const auto k = static_cast<ErrorKind>(i);
    if (ErrorKindName(k) == kind) return Error(k, message);
  }
  return Error(ErrorKind::kBackendUnavailable,
               "backend error " + kind + ": " + message);
}

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Must be safe to call concurrently.
  virtual nlohmann::json Call(Capability capability,
                              const nlohmann::json& request) = 0;
};

// Canned responses keyed by (capability, request). A scripted request matches
// a live one when every field it names is equal in the live request (arrays
// element-wise); exact canonical matches are looked up first. An entry may
// hold an "error" object instead of a "response".
class MockScript {
 public:
  struct Entry {
    Capability capability;
    nlohmann::json request;
    std::optional<nlohmann::json> response;
    std::optional<nlohmann::json> error;
  };

  static MockScript FromJson(const nlohmann::json& doc) {
    MockScript script;
    script.backend_id_ = doc.value("backend_id", std::string("mock"));
    for (const auto& raw : doc.at("entries")) {
      const auto cap = ParseCapability(raw.at("capability").get<std::string>());
      if (!cap) {
        throw Error(ErrorKind::kConfigError,
                    "mock script: unknown capability " +
                        raw.at("capability").dump());
      }
      Entry entry{*cap, raw.at("request"), std::nullopt, std::nullopt};
      if (raw.contains("response")) entry.response = raw.at("response");
      if (raw.contains("error")) entry.error = raw.at("error");
      if (!entry.response && !entry.error) {
        throw Error(ErrorKind::kConfigError,
                    "mock script entry without response or error: " +
                        raw.dump());
      }
      script.Add(std::move(entry));
    }
    return script;
  }

  static MockScript Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kConfigError, "cannot open mock script " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kConfigError,
                  "mock script " + path + ": " + e.what());
    }
    return FromJson(doc);
  }

  void set_backend_id(std::string id) { backend_id_ = std::move(id); }
  const std::string& backend_id() const { return backend_id_; }

  void Add(Entry entry) {
    exact_.emplace(ExactKey(entry.capability, entry.request), entries_.size());
    entries_.push_back(std::move(entry));
  }

  void AddResponse(Capability c, nlohmann::json request,
                   nlohmann::json response) {
    Add({c, std::move(request), std::move(response), std::nullopt});
  }

  const Entry* Find(Capability c, const nlohmann::json& request) const {
    if (const auto it = exact_.find(ExactKey(c, request)); it != exact_.end()) {
      return &entries_[it->second];
    }
    for (const auto& entry : entries_) {
      if (entry.capability == c && Matches(entry.request, request)) {
        return &entry;
      }
    }
    return nullptr;
  }

  std::size_t size() const { return entries_.size(); }

  static bool Matches(const nlohmann::json& pattern,
                      const nlohmann::json& actual) {
    if (pattern.is_object()) {
      if (!actual.is_object()) return false;
      for (const auto& [key, value] : pattern.items()) {
        const auto it = actual.find(key);
        if (it == actual.end() || !Matches(value, *it)) return false;
      }
      return true;
    }
    if (pattern.is_array()) {
      if (!actual.is_array() || actual.size() != pattern.size()) return false;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (!Matches(pattern[i], actual[i])) return false;
      }
      return true;
    }
    return pattern == actual;
  }

 private:
  static std::string ExactKey(Capability c, const nlohmann::json& request) {
    return std::string(CapabilityName(c)) + '\x1f' + request.dump();
  }

  std::string backend_id_ = "mock";
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> exact_;
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockScript script) : script_(std::move(script)) {}

  std::string id() const override { return script_.backend_id(); }

  nlohmann::json Call(Capability capability,
                      const nlohmann::json& request) override {
    {
      std::lock_guard lock(mutex_);
      ++calls_[capability];
    }
    const auto* entry = script_.Find(capability, request);
    if (entry == nullptr) {
      throw Error(ErrorKind::kScriptedMiss,
                  std::string(CapabilityName(capability)) + " " + request.dump());
    }
    if (entry->error) throw BackendError(*entry->error);
    return *entry->response;
  }

  std::size_t calls(Capability capability) const {
    std::lock_guard lock(mutex_);
    const auto it = calls_.find(capability);
    return it == calls_.end() ? 0 : it->second;
  }

  std::size_t total_calls() const {
    std::lock_guard lock(mutex_);
    std::size_t total = 0;
    for (const auto& [_, n] : calls_) total += n;
    return total;
  }

  void ResetCounters() {
    std::lock_guard lock(mutex_);
    calls_.clear();
  }

  const MockScript& script() const { return script_; }

 private:
  MockScript script_;
  mutable std::mutex mutex_;
  std::map<Capability, std::size_t> calls_;
};

// JSON lines over a child process. The child is started with /bin/sh -c.
class StreamBackend : public Backend {
 public:
  StreamBackend(std::string command, std::string backend_id)
      : command_(std::move(command)), backend_id_(std::move(backend_id)) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw Error(ErrorKind::kBackendUnavailable,
                  std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      throw Error(ErrorKind::kBackendUnavailable,
                  std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    ::fcntl(write_fd_, F_SETFD, FD_CLOEXEC);
    ::fcntl(read_fd_, F_SETFD, FD_CLOEXEC);
    reader_ = std::thread([this] { ReadLoop(); });
  }

  StreamBackend(const StreamBackend&) = delete;
  StreamBackend& operator=(const StreamBackend&) = delete;

  ~StreamBackend() override {
    {
      std::lock_guard lock(write_mutex_);
      if (write_fd_ >= 0) ::close(write_fd_);
      write_fd_ = -1;
    }
    if (reader_.joinable()) reader_.join();
    if (read_fd_ >= 0) ::close(read_fd_);
    int status = 0;
    if (pid_ > 0) ::waitpid(pid_, &status, 0);
  }

  std::string id() const override { return backend_id_; }

  nlohmann::json Call(Capability capability,
                      const nlohmann::json& request) override {
    const std::uint64_t id = next_id_.fetch_add(1);
    std::future<nlohmann::json> reply;
    {
      std::lock_guard lock(pending_mutex_);
      if (closed_) {
        throw Error(ErrorKind::kBackendUnavailable,
                    "backend process exited: " + command_);
      }
      reply = pending_[id].get_future();
    }
    const nlohmann::json envelope = {{"id", id},
                                     {"capability", CapabilityName(capability)},
                                     {"request", request}};
    const std::string line = envelope.dump() + "\n";
    {
      std::lock_guard lock(write_mutex_);
      if (write_fd_ < 0 || !WriteAll(line)) {
        Fail(id, Error(ErrorKind::kBackendUnavailable,
                       "cannot write to backend: " + command_));
      }
    }
    nlohmann::json message = reply.get();
    if (message.contains("error")) throw BackendError(message.at("error"));
    if (!message.contains("response")) {
      throw Error(ErrorKind::kProtocolViolation,
                  "reply without response: " + message.dump());
    }
    return message.at("response");
  }

 private:
  bool WriteAll(std::string_view data) {
    while (!data.empty()) {
      const ssize_t n = ::write(write_fd_, data.data(), data.size());
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
  }

  void Fail(std::uint64_t id, const Error& error) {
    std::lock_guard lock(pending_mutex_);
    const auto it = pending_.find(id);
    if (it == pending_.end()) return;
    it->second.set_exception(std::make_exception_ptr(error));
    pending_.erase(it);
  }

  void Deliver(const std::string& line) {
    nlohmann::json message;
    try {
      message = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      FailAll(Error(ErrorKind::kProtocolViolation, "unparseable reply: " + line));
      return;
    }
    if (!message.is_object() || !message.contains("id") ||
        !message.at("id").is_number_integer()) {
      FailAll(Error(ErrorKind::kProtocolViolation, "reply without id: " + line));
      return;
    }
    const auto id = message.at("id").get<std::uint64_t>();
    std::lock_guard lock(pending_mutex_);
    const auto it = pending_.find(id);
    if (it == pending_.end()) return;  // stale or duplicate reply
    it->second.set_value(std::move(message));
    pending_.erase(it);
  }

  void FailAll(const Error& error) {
    std::lock_guard lock(pending_mutex_);
    for (auto& [_, promise] : pending_) {
      promise.set_exception(std::make_exception_ptr(error));
    }
    pending_.clear();
  }

  void ReadLoop() {
    std::string buffer;
    char chunk[4096];
    while (true) {
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t newline;
      while ((newline = buffer.find('\n')) != std::string::npos) {
        std::string line = buffer.substr(0, newline);
        buffer.erase(0, newline + 1);
        if (!line.empty()) Deliver(line);
      }
    }
    {
      std::lock_guard lock(pending_mutex_);
      closed_ = true;
    }
    FailAll(Error(ErrorKind::kBackendUnavailable,
                  "backend closed its output: " + command_));
  }

  std::string command_;
  std::string backend_id_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::thread reader_;
  std::mutex write_mutex_;
  std::mutex pending_mutex_;
  bool closed_ = false;
  std::map<std::uint64_t, std::promise<nlohmann::json>> pending_;
  std::atomic<std::uint64_t> next_id_{1};
};

// Backend from a CLI spec: "mock:<script.json>" or "exec:<shell command>".
inline std::unique_ptr<Backend> MakeBackend(const std::string& spec,
                                            const std::string& backend_id = "") {
  if (spec.rfind("mock:", 0) == 0) {
    auto script = MockScript::Load(spec.substr(5));
    if (!backend_id.empty()) script.set_backend_id(backend_id);
    return std::make_unique<MockBackend>(std::move(script));
  }
  if (spec.rfind("exec:", 0) == 0) {
    return std::make_unique<StreamBackend>(
        spec.substr(5), backend_id.empty() ? spec : backend_id);
  }
  throw Error(ErrorKind::kConfigError,
              "backend must be mock:<path> or exec:<command>, got '" + spec + "'");
}

}  // namespace qace
