#include "textcoder/run_config.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "textcoder/error.hpp"
#include "textcoder/seed.hpp"

namespace textcoder {
namespace fs = std::filesystem;
namespace {

template <typename T>
T get(const YAML::Node& node, const char* key, T fallback) {
  if (!node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::optional<fs::path> path_field(const YAML::Node& node, const char* key, const fs::path& base) {
  if (!node[key] || node[key].IsNull()) return std::nullopt;
  fs::path p = get<std::string>(node, key, "");
  if (p.empty()) return std::nullopt;
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

fs::path required_path(const YAML::Node& node, const char* key, const fs::path& base) {
  auto p = path_field(node, key, base);
  if (!p) throw ConfigError(std::string("config is missing '") + key + "'");
  return *p;
}

ApiStyle parse_api(const std::string& s) {
  if (s == "completions") return ApiStyle::kCompletions;
  if (s == "chat") return ApiStyle::kChat;
  throw ConfigError("endpoint api must be 'completions' or 'chat', got '" + s + "'");
}

}  // namespace

TaskSelection parse_task_selection(std::string_view s) {
  if (s.empty() || s == "joint") return TaskSelection::joint();
  return TaskSelection::single(std::string(s));
}

std::string to_string(const TaskSelection& s) { return s.is_joint() ? "joint" : *s.task_id; }

RunConfig parse_run_config(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("run config must be a mapping");

  RunConfig cfg;
  cfg.task_suite = required_path(root, "task_suite", base_dir);
  cfg.instances = required_path(root, "instances", base_dir);
  if (auto p = path_field(root, "examples", base_dir)) cfg.examples = *p;
  cfg.gold = path_field(root, "gold", base_dir);
  cfg.pricing = path_field(root, "pricing", base_dir);
  cfg.mock_fixtures = path_field(root, "mock", base_dir);
  cfg.cache_dir = path_field(root, "cache_dir", base_dir);
  if (auto p = path_field(root, "output_dir", base_dir)) cfg.output_dir = *p;
  cfg.seed = get<std::uint64_t>(root, "seed", 0);

  if (const auto pn = root["prompt"]) {
    auto& ps = cfg.prompt;
    ps.tasks = parse_task_selection(get<std::string>(pn, "tasks", "joint"));
    ps.description_level = parse_description_level(get<std::string>(pn, "description_level", "none"));
    ps.n_examples = get<std::size_t>(pn, "n_examples", 0);
    if (pn["instruction"]) ps.instruction = get<std::string>(pn, "instruction", "");
    ps.chars_per_token = get<double>(pn, "chars_per_token", 4.0);
    if (const auto on = pn["order"]) {
      int set = 0;
      if (on["index"]) {
        ps.order.index = get<std::size_t>(on, "index", 0);
        ++set;
      }
      if (on["permutation"]) {
        ps.order.permutation = get<std::vector<std::size_t>>(on, "permutation", {});
        ++set;
      }
      if (on["seed"]) {
        ps.order.shuffle_seed = get<std::uint64_t>(on, "seed", 0);
        ++set;
      }
      if (set > 1) throw ConfigError("prompt.order takes one of index, permutation, seed");
    }
  }

  if (const auto en = root["endpoint"]) {
    auto& ep = cfg.endpoint;
    ep.base_url = get<std::string>(en, "base_url", "");
    ep.model_name = get<std::string>(en, "model", "");
    ep.auth_env = get<std::string>(en, "auth_env", "");
    ep.max_in_flight = get<std::size_t>(en, "max_in_flight", ep.max_in_flight);
    ep.api = parse_api(get<std::string>(en, "api", "completions"));
    ep.temperature = get<double>(en, "temperature", ep.temperature);
    ep.max_output_tokens = get<std::size_t>(en, "max_output_tokens", ep.max_output_tokens);
    ep.timeout_s = get<double>(en, "timeout_s", ep.timeout_s);
    if (en["stop"]) ep.stop = get<std::vector<std::string>>(en, "stop", {});
    if (const auto rn = en["retry"]) {
      ep.retry.max_retries = get<int>(rn, "max_retries", ep.retry.max_retries);
      ep.retry.base_backoff_s = get<double>(rn, "base_backoff_s", ep.retry.base_backoff_s);
    }
    if (const auto pn = en["pricing"]) {
      CostModel cm;
      cm.input_rate = get<double>(pn, "input_rate", 0.0);
      cm.output_rate = get<double>(pn, "output_rate", 0.0);
      cm.currency = get<std::string>(pn, "currency", cm.currency);
      if (cm.input_rate < 0 || cm.output_rate < 0) {
        throw ConfigError("endpoint.pricing rates must be >= 0");
      }
      ep.pricing = cm;
    }
    if (ep.max_in_flight == 0) throw ConfigError("endpoint.max_in_flight must be at least 1");
    if (ep.retry.max_retries < 0) throw ConfigError("endpoint.retry.max_retries must be >= 0");
  }
  if (cfg.endpoint.model_name.empty()) cfg.endpoint.model_name = "mock";
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  auto cfg = parse_run_config(ss.str(), base);
  cfg.source = path;
  return cfg;
}

void RunConfig::validate() const {
  const auto must_exist = [](const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  must_exist(task_suite, "task suite");
  must_exist(instances, "instances file");
  if (prompt.n_examples > 0) {
    if (examples.empty()) throw ConfigError("n_examples > 0 but no examples file configured");
    must_exist(examples, "examples file");
  }
  if (gold) must_exist(*gold, "gold file");
  if (pricing) must_exist(*pricing, "pricing file");
  if (mock_fixtures) must_exist(*mock_fixtures, "mock fixtures");
  if (!mock_fixtures && endpoint.base_url.empty()) {
    throw ConfigError("no endpoint.base_url and no mock fixtures configured");
  }
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir)) {
    throw ConfigError("output directory not writable: " + output_dir.string());
  }
}

ExampleOrder resolve_example_order(const OrderSpec& spec, std::size_t n_examples,
                                   std::uint64_t global_seed) {
  ExampleOrder order;
  if (n_examples == 0) return order;
  if (spec.index) {
    const auto orders = enumerate_orders(n_examples, *spec.index + 1,
                                         derive_seed(global_seed, "orders"));
    order.permutation = orders.at(*spec.index);
  } else if (!spec.permutation.empty()) {
    validate_permutation(spec.permutation, n_examples);
    order.permutation = spec.permutation;
  } else if (spec.shuffle_seed) {
    order.seed = spec.shuffle_seed;
  }
  return order;
}

PromptConfig make_prompt_config(const PromptSpec& spec, std::uint64_t global_seed) {
  PromptConfig cfg;
  cfg.tasks = spec.tasks;
  cfg.description_level = spec.description_level;
  cfg.n_examples = spec.n_examples;
  cfg.example_order = resolve_example_order(spec.order, spec.n_examples, global_seed);
  if (spec.instruction) cfg.instruction_text = *spec.instruction;
  cfg.chars_per_token = spec.chars_per_token;
  return cfg;
}

}  // namespace textcoder
