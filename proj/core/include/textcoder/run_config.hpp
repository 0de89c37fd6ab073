#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textcoder/gateway.hpp"
#include "textcoder/prompt.hpp"

namespace textcoder {

// How the example order of a run is chosen. At most one of these is set;
// none means authored order.
struct OrderSpec {
  std::optional<std::size_t> index;              // n-th order from enumerate_orders
  std::vector<std::size_t> permutation;          // explicit
  std::optional<std::uint64_t> shuffle_seed;     // one seeded shuffle

  bool operator==(const OrderSpec&) const = default;
};

struct PromptSpec {
  TaskSelection tasks;
  DescriptionLevel description_level = DescriptionLevel::kNone;
  std::size_t n_examples = 0;
  OrderSpec order;
  std::optional<std::string> instruction;
  double chars_per_token = 4.0;

  bool operator==(const PromptSpec&) const = default;
};

// Everything one annotate / evaluate run depends on. Relative paths in the
// YAML file resolve against the file's directory.
struct RunConfig {
  std::filesystem::path source;  // config file, if loaded from one
  std::filesystem::path task_suite;
  std::filesystem::path instances;
  std::filesystem::path examples;
  std::optional<std::filesystem::path> gold;
  std::optional<std::filesystem::path> pricing;
  std::optional<std::filesystem::path> mock_fixtures;
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path output_dir = "out";
  PromptSpec prompt;
  ModelEndpoint endpoint;
  std::uint64_t seed = 0;

  // Checks that referenced inputs exist and the output directory can be
  // created. Throws ConfigError.
  void validate() const;
};

RunConfig parse_run_config(std::string_view yaml_text,
                           const std::filesystem::path& base_dir = std::filesystem::path("."));
RunConfig load_run_config(const std::filesystem::path& path);

// Resolves the order spec for `n_examples` items under `global_seed`.
ExampleOrder resolve_example_order(const OrderSpec& spec, std::size_t n_examples,
                                   std::uint64_t global_seed);

PromptConfig make_prompt_config(const PromptSpec& spec, std::uint64_t global_seed);

// "joint" or a task id.
TaskSelection parse_task_selection(std::string_view s);
std::string to_string(const TaskSelection& s);

}  // namespace textcoder
