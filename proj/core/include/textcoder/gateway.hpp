#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "textcoder/budget.hpp"

namespace textcoder {

enum class ApiStyle { kCompletions, kChat };

struct RetryPolicy {
  int max_retries = 3;
  double base_backoff_s = 1.0;
};

struct ModelEndpoint {
  std::string base_url;    // e.g. https://api.openai.com/v1
  std::string model_name;  // e.g. text-davinci-003
  std::string auth_env;    // env var holding the bearer token; empty = no auth
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
  std::optional<CostModel> pricing;
  ApiStyle api = ApiStyle::kCompletions;
  double temperature = 0.0;
  std::size_t max_output_tokens = 16;
  std::vector<std::string> stop = {"\n\n"};
  double timeout_s = 60.0;
};

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;

  bool operator==(const Usage&) const = default;
};

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  std::size_t max_output_tokens = 16;
};

struct CompletionResponse {
  std::string text;
  std::optional<Usage> usage;
  double latency_s = 0.0;
  bool cache_hit = false;
};

// What a transport hands back. status 0 means no HTTP response at all
// (connect failure, timeout). A 2xx with a non-empty error is a body that
// could not be understood.
struct BackendReply {
  int status = 0;
  std::string text;
  std::optional<Usage> usage;
  std::string error;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual BackendReply send(const ModelEndpoint& endpoint, const CompletionRequest& request) = 0;
};

// HTTP transport for OpenAI-compatible completions / chat endpoints. Reads
// the bearer token once, at construction; throws ConfigError if the
// configured variable is unset.
std::unique_ptr<CompletionBackend> make_http_backend(const ModelEndpoint& endpoint);

// Deterministic canned responses. Lookup order: exact prompt hash, then the
// target sentence (text after the last "Text: "), then a pool entry picked by
// prompt hash, then `fallback`.
struct MockFixtures {
  std::map<std::string, std::string> by_prompt_hash;
  std::map<std::string, std::string> by_target;
  std::vector<std::string> pool;
  std::optional<std::string> fallback;

  std::optional<std::string> respond(const std::string& prompt) const;
  static MockFixtures load(const std::filesystem::path& path);
  static MockFixtures parse(const std::string& json_text);
};

std::unique_ptr<CompletionBackend> make_mock_backend(MockFixtures fixtures);

// Target sentence of a rendered prompt, or empty if there is none.
std::string prompt_target(const std::string& prompt);

struct CachedEntry {
  std::string text;
  std::optional<Usage> usage;
};

// Response cache keyed by SHA-256 of (model, prompt, temperature). With a
// directory the entries persist across runs, one JSON file per key.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  static std::string key(const std::string& model, const std::string& prompt, double temperature);

  std::optional<CachedEntry> get(const std::string& key);
  void put(const std::string& key, const CachedEntry& entry);

  // Serializes lookup + fill for one key across threads.
  std::mutex& key_mutex(const std::string& key);

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::optional<std::filesystem::path> dir_;
  std::mutex mu_;
  std::unordered_map<std::string, CachedEntry> memory_;
  std::unordered_map<std::string, std::unique_ptr<std::mutex>> key_mutexes_;
};

struct RunLogRecord {
  std::string run_id;
  std::string instance_id;
  std::string model;
  std::string prompt_hash;
  std::string response_text;
  std::optional<Usage> usage;
  std::string timestamp;  // ISO-8601 UTC
  double latency_s = 0.0;
  std::size_t prompt_chars = 0;
  bool cache_hit = false;  // replayed from the cache; nothing was billed
};

// Append-only JSONL log. Thread-safe.
class RunLog {
 public:
  explicit RunLog(const std::filesystem::path& path);
  void append(const RunLogRecord& record);
  static std::vector<RunLogRecord> read(const std::filesystem::path& path);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now());

struct KeyedPrompt {
  std::string instance_id;
  std::string prompt;
};

struct ItemError {
  std::string instance_id;
  std::string kind;  // "transport", "request", "error"
  int status = 0;
  std::string message;
};

struct BatchItem {
  std::string instance_id;
  std::optional<CompletionResponse> response;
};

struct BatchResult {
  std::vector<BatchItem> items;  // input order
  std::vector<ItemError> errors;
  bool ok() const { return errors.empty(); }
};

class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::duration<double>)>;

  Gateway(ModelEndpoint endpoint, std::shared_ptr<CompletionBackend> backend,
          std::shared_ptr<ResponseCache> cache = std::make_shared<ResponseCache>(),
          Sleeper sleeper = {});

  const ModelEndpoint& endpoint() const noexcept { return endpoint_; }

  // Cache first; otherwise the backend with exponential backoff on 429, 5xx
  // and connection failures.
  CompletionResponse complete(const CompletionRequest& request);

  CompletionRequest make_request(std::string prompt) const;

  // Runs with at most endpoint.max_in_flight concurrent requests. Results
  // keep input order; successful responses go to `log` in input order.
  BatchResult annotate_batch(std::span<const KeyedPrompt> prompts, const std::string& run_id,
                             RunLog* log = nullptr);

  std::size_t network_calls() const noexcept { return network_calls_.load(); }
  std::size_t peak_in_flight() const noexcept { return peak_in_flight_.load(); }

 private:
  BackendReply send_with_retries(const CompletionRequest& request);

  ModelEndpoint endpoint_;
  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  Sleeper sleeper_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_in_flight_{0};
};

}  // namespace textcoder
