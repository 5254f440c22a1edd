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

// Serves a mock script over the JSON-lines stream protocol on stdin/stdout.
// Usage: qace_mock_server <script.json> [--concurrent]
//
// With --concurrent every request is answered from its own thread, so
// replies can arrive out of order.

#include <chrono>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qace/backend.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: qace_mock_server <script.json> [--concurrent]\n";
    return 2;
  }
  const bool concurrent = argc > 2 && std::string(argv[2]) == "--concurrent";
  qace::MockBackend backend = [&] {
    try {
      return qace::MockBackend(qace::MockScript::Load(argv[1]));
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      std::exit(2);
    }
  }();

  std::mutex out_mutex;
  const auto handle = [&](std::string line) {
    nlohmann::json reply;
    try {
      const auto message = nlohmann::json::parse(line);
      reply["id"] = message.at("id");
      const auto cap =
          qace::ParseCapability(message.at("capability").get<std::string>());
      if (!cap) {
        reply["error"] = {{"kind", "ProtocolViolation"},
                          {"message", "unknown capability"}};
      } else {
        reply["response"] = backend.Call(*cap, message.at("request"));
      }
    } catch (const qace::Error& e) {
      reply["error"] = {{"kind", qace::ErrorKindName(e.kind())}, {"message", e.what()}};
    } catch (const std::exception& e) {
      reply["error"] = {{"kind", "ProtocolViolation"}, {"message", e.what()}};
    }
    std::lock_guard lock(out_mutex);
    std::cout << reply.dump() << "\n" << std::flush;
  };

  std::vector<std::thread> workers;
  std::string line;
  std::size_t n = 0;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (concurrent) {
      // Stagger so later requests can overtake earlier ones.
      const auto delay = std::chrono::milliseconds((n++ % 3) * 2);
      workers.emplace_back([&, line, delay] {
        std::this_thread::sleep_for(delay);
        handle(line);
      });
    } else {
      handle(line);
    }
  }
  for (auto& w : workers) w.join();
  return 0;
}
