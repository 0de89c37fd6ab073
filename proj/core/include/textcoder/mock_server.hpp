#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "textcoder/gateway.hpp"

namespace textcoder {

// Local OpenAI-compatible server answering from MockFixtures. Serves
// POST <prefix>/completions and <prefix>/chat/completions and counts every
// request it receives, which makes "zero network calls" checkable from
// outside the client.
class MockLlmServer {
 public:
  explicit MockLlmServer(MockFixtures fixtures, std::string path_prefix = "/v1");
  ~MockLlmServer();

  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

  // The next requests answer with these statuses (one per request) before
  // normal service resumes.
  void inject_failures(std::vector<int> statuses);

  std::size_t request_count() const noexcept { return requests_.load(); }
  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::size_t> requests_{0};
  std::thread thread_;
  int port_ = 0;
  std::string host_;
  std::string prefix_;
};

}  // namespace textcoder
