#include "textcoder/mock_server.hpp"

#include <httplib.h>

#include <deque>
#include "json.hpp"

#include "textcoder/error.hpp"
#include "textcoder/text.hpp"

namespace textcoder {

using nlohmann::json;

struct MockLlmServer::Impl {
  MockFixtures fixtures;
  httplib::Server server;
  std::mutex mu;
  std::deque<int> failures;
};

namespace {

std::size_t rough_tokens(const std::string& s) { return (text::codepoint_count(s) + 3) / 4; }

}  // namespace

MockLlmServer::MockLlmServer(MockFixtures fixtures, std::string path_prefix)
    : impl_(std::make_unique<Impl>()), prefix_(std::move(path_prefix)) {
  impl_->fixtures = std::move(fixtures);
  auto handler = [this](bool chat) {
    return [this, chat](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      {
        std::lock_guard lock(impl_->mu);
        if (!impl_->failures.empty()) {
          res.status = impl_->failures.front();
          impl_->failures.pop_front();
          res.set_content(R"({"error":{"message":"injected failure"}})", "application/json");
          return;
        }
      }
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        res.status = 400;
        res.set_content(R"({"error":{"message":"bad json"}})", "application/json");
        return;
      }
      std::string prompt;
      if (chat) {
        if (body.contains("messages") && !body["messages"].empty()) {
          prompt = body["messages"].back().value("content", "");
        }
      } else {
        prompt = body.value("prompt", "");
      }
      const auto answer = impl_->fixtures.respond(prompt);
      if (!answer) {
        res.status = 404;
        res.set_content(R"({"error":{"message":"no fixture"}})", "application/json");
        return;
      }
      json choice = chat ? json{{"index", 0},
                                {"message", {{"role", "assistant"}, {"content", *answer}}},
                                {"finish_reason", "stop"}}
                         : json{{"index", 0}, {"text", *answer}, {"finish_reason", "stop"}};
      const auto pt = rough_tokens(prompt);
      const auto ct = rough_tokens(*answer);
      const json out = {{"id", "mock"},
                        {"object", chat ? "chat.completion" : "text_completion"},
                        {"model", body.value("model", "mock")},
                        {"choices", json::array({choice})},
                        {"usage",
                         {{"prompt_tokens", pt}, {"completion_tokens", ct}, {"total_tokens", pt + ct}}}};
      res.set_content(out.dump(), "application/json");
    };
  };
  impl_->server.Post(prefix_ + "/completions", handler(false));
  impl_->server.Post(prefix_ + "/chat/completions", handler(true));
}

MockLlmServer::~MockLlmServer() { stop(); }

int MockLlmServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? impl_->server.bind_to_any_port(host) : port;
  if (port != 0 && !impl_->server.bind_to_port(host, port)) port_ = -1;
  if (port_ < 0) throw ConfigError("mock server cannot bind " + host);
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void MockLlmServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!impl_->server.listen(host, port)) throw ConfigError("mock server cannot listen");
}

void MockLlmServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

void MockLlmServer::inject_failures(std::vector<int> statuses) {
  std::lock_guard lock(impl_->mu);
  impl_->failures.assign(statuses.begin(), statuses.end());
}

std::string MockLlmServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_) + prefix_;
}

}  // namespace textcoder
