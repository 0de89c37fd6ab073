#include <benchmark/benchmark.h>

#include <string>

#include "textcoder/prompt.hpp"
#include "textcoder/records.hpp"
#include "textcoder/task_schema.hpp"

namespace {

using namespace textcoder;

const TaskSuite& suite() {
  static const auto s = load_task_suite_file(std::string(TEXTCODER_SOURCE_DIR) + "/configs/fatherhood_suite.yaml");
  return s;
}

const std::vector<FewShotExample>& pool() {
  static const auto e = validate_examples(
      suite(), load_examples(std::string(TEXTCODER_SOURCE_DIR) + "/configs/example_pool.jsonl"));
  return e;
}

void BM_BuildPrompt(benchmark::State& state) {
  PromptConfig cfg;
  cfg.tasks = TaskSelection::joint();
  cfg.description_level = DescriptionLevel::kLong;
  cfg.n_examples = static_cast<std::size_t>(state.range(0));
  const std::string target = "pappan läser för barnet .";
  for (auto _ : state) benchmark::DoNotOptimize(build_prompt(cfg, suite(), pool(), target));
}
BENCHMARK(BM_BuildPrompt)->Arg(0)->Arg(15);

void BM_EnumerateOrders(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_orders(n, 3, 42));
}
BENCHMARK(BM_EnumerateOrders)->Arg(5)->Arg(15);

}  // namespace
