#include <httplib.h>

#include <cstdlib>
#include "json.hpp"

#include "textcoder/error.hpp"
#include "textcoder/gateway.hpp"

namespace textcoder {
namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint base_url '" + url + "' lacks a scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl p;
  p.scheme_host_port = url.substr(0, path_start);
  if (path_start != std::string::npos) p.path_prefix = url.substr(path_start);
  while (!p.path_prefix.empty() && p.path_prefix.back() == '/') p.path_prefix.pop_back();
  return p;
}

class HttpBackend final : public CompletionBackend {
 public:
  explicit HttpBackend(const ModelEndpoint& ep) : url_(parse_base_url(ep.base_url)) {
    if (!ep.auth_env.empty()) {
      const char* token = std::getenv(ep.auth_env.c_str());
      if (!token || !*token) {
        throw ConfigError("environment variable " + ep.auth_env + " (API key) is not set");
      }
      token_ = token;
    }
  }

  BackendReply send(const ModelEndpoint& ep, const CompletionRequest& req) override {
    json body = {{"model", ep.model_name},
                 {"temperature", req.temperature},
                 {"max_tokens", req.max_output_tokens}};
    if (!ep.stop.empty()) body["stop"] = ep.stop;
    std::string path = url_.path_prefix;
    if (ep.api == ApiStyle::kChat) {
      body["messages"] = json::array({{{"role", "user"}, {"content", req.prompt}}});
      path += "/chat/completions";
    } else {
      body["prompt"] = req.prompt;
      path += "/completions";
    }

    httplib::Client client(url_.scheme_host_port);
    const auto secs = static_cast<time_t>(ep.timeout_s);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    const auto res = client.Post(path, headers, body.dump(), "application/json");
    BackendReply reply;
    if (!res) {
      reply.status = 0;
      reply.error = httplib::to_string(res.error());
      return reply;
    }
    reply.status = res->status;
    if (res->status < 200 || res->status >= 300) {
      reply.error = res->body.substr(0, 500);
      return reply;
    }
    try {
      const auto j = json::parse(res->body);
      const auto& choice = j.at("choices").at(0);
      if (choice.contains("message")) {
        reply.text = choice.at("message").at("content").get<std::string>();
      } else {
        reply.text = choice.at("text").get<std::string>();
      }
      if (j.contains("usage") && j.at("usage").is_object()) {
        const auto& u = j.at("usage");
        reply.usage = Usage{u.value("prompt_tokens", std::size_t{0}),
                            u.value("completion_tokens", std::size_t{0})};
      }
    } catch (const json::exception& e) {
      reply.error = std::string("unreadable completion body: ") + e.what();
    }
    return reply;
  }

 private:
  ParsedUrl url_;
  std::string token_;
};

}  // namespace

std::unique_ptr<CompletionBackend> make_http_backend(const ModelEndpoint& endpoint) {
  return std::make_unique<HttpBackend>(endpoint);
}

}  // namespace textcoder
