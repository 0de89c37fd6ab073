#include "textcoder/gateway.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include "json.hpp"
#include <set>
#include <sstream>
#include <thread>

#include "textcoder/error.hpp"
#include "textcoder/hashing.hpp"
#include "textcoder/seed.hpp"
#include "textcoder/text.hpp"

namespace textcoder {

using nlohmann::json;

namespace {

json usage_to_json(const std::optional<Usage>& u) {
  if (!u) return nullptr;
  return {{"prompt_tokens", u->prompt_tokens}, {"completion_tokens", u->completion_tokens}};
}

std::optional<Usage> usage_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Usage{j.value("prompt_tokens", std::size_t{0}), j.value("completion_tokens", std::size_t{0})};
}

}  // namespace

// --- mock fixtures -----------------------------------------------------------

std::string prompt_target(const std::string& prompt) {
  const auto at = prompt.rfind("Text: ");
  if (at == std::string::npos) return {};
  const auto start = at + 6;
  const auto end = prompt.find('\n', start);
  return prompt.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::optional<std::string> MockFixtures::respond(const std::string& prompt) const {
  const auto hash = sha256_hex(prompt);
  if (const auto it = by_prompt_hash.find(hash); it != by_prompt_hash.end()) return it->second;
  if (!by_target.empty()) {
    if (const auto it = by_target.find(prompt_target(prompt)); it != by_target.end()) {
      return it->second;
    }
  }
  if (!pool.empty()) return pool[fnv1a64(hash) % pool.size()];
  return fallback;
}

MockFixtures MockFixtures::parse(const std::string& json_text) {
  MockFixtures f;
  try {
    const auto j = json::parse(json_text);
    if (j.contains("responses")) {
      for (const auto& [k, v] : j.at("responses").items()) f.by_prompt_hash[k] = v.get<std::string>();
    }
    if (j.contains("by_target")) {
      for (const auto& [k, v] : j.at("by_target").items()) f.by_target[k] = v.get<std::string>();
    }
    if (j.contains("pool")) f.pool = j.at("pool").get<std::vector<std::string>>();
    if (j.contains("default") && !j.at("default").is_null()) {
      f.fallback = j.at("default").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mock fixtures: ") + e.what());
  }
  return f;
}

MockFixtures MockFixtures::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock fixtures '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

class MockBackend final : public CompletionBackend {
 public:
  explicit MockBackend(MockFixtures f) : fixtures_(std::move(f)) {}

  BackendReply send(const ModelEndpoint&, const CompletionRequest& request) override {
    BackendReply r;
    const auto text = fixtures_.respond(request.prompt);
    if (!text) {
      r.status = 404;
      r.error = "no mock fixture for prompt " + sha256_hex(request.prompt);
      return r;
    }
    r.status = 200;
    r.text = *text;
    // Same heuristic the prompt builder uses: ceil(code points / 4).
    r.usage = Usage{(text::codepoint_count(request.prompt) + 3) / 4,
                    (text::codepoint_count(*text) + 3) / 4};
    return r;
  }

 private:
  MockFixtures fixtures_;
};

}  // namespace

std::unique_ptr<CompletionBackend> make_mock_backend(MockFixtures fixtures) {
  return std::make_unique<MockBackend>(std::move(fixtures));
}

// --- cache -------------------------------------------------------------------

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

std::string ResponseCache::key(const std::string& model, const std::string& prompt,
                               double temperature) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.17g", temperature);
  std::string material = model;
  material.push_back('\0');
  material += temp;
  material.push_back('\0');
  material += prompt;
  return sha256_hex(material);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return *dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CachedEntry> ResponseCache::get(const std::string& key) {
  {
    std::lock_guard lock(mu_);
    if (const auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  try {
    const auto j = json::parse(in);
    CachedEntry e{j.at("text").get<std::string>(), usage_from_json(j.value("usage", json()))};
    std::lock_guard lock(mu_);
    memory_[key] = e;
    return e;
  } catch (const json::exception&) {
    return std::nullopt;  // torn or foreign file: treat as a miss
  }
}

void ResponseCache::put(const std::string& key, const CachedEntry& entry) {
  {
    std::lock_guard lock(mu_);
    memory_[key] = entry;
  }
  if (!dir_) return;
  const auto path = path_for(key);
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << json{{"text", entry.text}, {"usage", usage_to_json(entry.usage)}}.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::mutex& ResponseCache::key_mutex(const std::string& key) {
  std::lock_guard lock(mu_);
  auto& slot = key_mutexes_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

// --- run log -----------------------------------------------------------------

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const auto secs = std::chrono::system_clock::to_time_t(t);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

RunLog::RunLog(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw ConfigError("cannot open run log '" + path.string() + "'");
}

void RunLog::append(const RunLogRecord& r) {
  const json j = {{"run_id", r.run_id},
                  {"instance_id", r.instance_id},
                  {"model", r.model},
                  {"prompt_hash", r.prompt_hash},
                  {"response_text", r.response_text},
                  {"usage", usage_to_json(r.usage)},
                  {"timestamp", r.timestamp},
                  {"latency_s", r.latency_s},
                  {"prompt_chars", r.prompt_chars},
                  {"cache_hit", r.cache_hit}};
  std::lock_guard lock(mu_);
  out_ << j.dump() << '\n';
  out_.flush();
}

std::vector<RunLogRecord> RunLog::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run log '" + path.string() + "'");
  std::vector<RunLogRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      RunLogRecord r;
      r.run_id = j.value("run_id", "");
      r.instance_id = j.value("instance_id", "");
      r.model = j.value("model", "");
      r.prompt_hash = j.value("prompt_hash", "");
      r.response_text = j.value("response_text", "");
      r.usage = usage_from_json(j.value("usage", json()));
      r.timestamp = j.value("timestamp", "");
      r.latency_s = j.value("latency_s", 0.0);
      r.prompt_chars = j.value("prompt_chars", std::size_t{0});
      r.cache_hit = j.value("cache_hit", false);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ConfigError("run log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// --- gateway -----------------------------------------------------------------

Gateway::Gateway(ModelEndpoint endpoint, std::shared_ptr<CompletionBackend> backend,
                 std::shared_ptr<ResponseCache> cache, Sleeper sleeper)
    : endpoint_(std::move(endpoint)),
      backend_(std::move(backend)),
      cache_(std::move(cache)),
      sleeper_(std::move(sleeper)) {
  if (endpoint_.max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (endpoint_.temperature < 0) throw ConfigError("temperature must be non-negative");
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (!cache_) cache_ = std::make_shared<ResponseCache>();
  if (!sleeper_) {
    sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
  }
}

CompletionRequest Gateway::make_request(std::string prompt) const {
  return {std::move(prompt), endpoint_.temperature, endpoint_.max_output_tokens};
}

BackendReply Gateway::send_with_retries(const CompletionRequest& request) {
  BackendReply reply;
  for (int attempt = 0;; ++attempt) {
    const auto now = ++in_flight_;
    auto peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    ++network_calls_;
    try {
      reply = backend_->send(endpoint_, request);
    } catch (const std::exception& e) {
      reply = BackendReply{0, {}, std::nullopt, e.what()};
    }
    --in_flight_;

    const bool retryable = reply.status == 0 || reply.status == 429 || reply.status >= 500;
    if (reply.status >= 200 && reply.status < 300) {
      if (!reply.error.empty()) throw RequestError(reply.status, reply.error);
      return reply;
    }
    if (!retryable) {
      throw RequestError(reply.status, "request rejected with HTTP " +
                                           std::to_string(reply.status) +
                                           (reply.error.empty() ? "" : ": " + reply.error));
    }
    if (attempt >= endpoint_.retry.max_retries) {
      throw TransportError(reply.status, "giving up after " + std::to_string(attempt + 1) +
                                             " attempts; last status " +
                                             std::to_string(reply.status) +
                                             (reply.error.empty() ? "" : " (" + reply.error + ")"));
    }
    sleeper_(std::chrono::duration<double>(endpoint_.retry.base_backoff_s * std::pow(2.0, attempt)));
  }
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw PreconditionError("prompt is empty");
  if (request.temperature < 0) throw PreconditionError("temperature must be non-negative");
  const auto start = std::chrono::steady_clock::now();
  const auto key = ResponseCache::key(endpoint_.model_name, request.prompt, request.temperature);

  std::lock_guard key_lock(cache_->key_mutex(key));
  CompletionResponse resp;
  if (auto hit = cache_->get(key)) {
    resp.text = std::move(hit->text);
    resp.usage = hit->usage;
    resp.cache_hit = true;
  } else {
    auto reply = send_with_retries(request);
    resp.text = std::move(reply.text);
    resp.usage = reply.usage;
    cache_->put(key, CachedEntry{resp.text, resp.usage});
  }
  resp.latency_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return resp;
}

BatchResult Gateway::annotate_batch(std::span<const KeyedPrompt> prompts, const std::string& run_id,
                                    RunLog* log) {
  {
    std::set<std::string> ids;
    for (const auto& p : prompts) {
      if (!ids.insert(p.instance_id).second) {
        throw PreconditionError("duplicate instance id '" + p.instance_id + "' in batch");
      }
    }
  }
  BatchResult result;
  result.items.resize(prompts.size());
  std::vector<std::optional<ItemError>> errors(prompts.size());
  std::vector<std::string> stamps(prompts.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      const auto& p = prompts[i];
      result.items[i].instance_id = p.instance_id;
      try {
        result.items[i].response = complete(make_request(p.prompt));
        stamps[i] = utc_timestamp();
      } catch (const TransportError& e) {
        errors[i] = ItemError{p.instance_id, "transport", e.status(), e.what()};
      } catch (const RequestError& e) {
        errors[i] = ItemError{p.instance_id, "request", e.status(), e.what()};
      } catch (const std::exception& e) {
        errors[i] = ItemError{p.instance_id, "error", 0, e.what()};
      }
    }
  };

  const auto n_workers = std::min(endpoint_.max_in_flight, prompts.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (errors[i]) {
      result.errors.push_back(std::move(*errors[i]));
      continue;
    }
    if (!log) continue;
    const auto& resp = *result.items[i].response;
    log->append(RunLogRecord{run_id, prompts[i].instance_id, endpoint_.model_name,
                             sha256_hex(prompts[i].prompt), resp.text, resp.usage, stamps[i],
                             resp.latency_s, text::codepoint_count(prompts[i].prompt),
                             resp.cache_hit});
  }
  return result;
}

}  // namespace textcoder
