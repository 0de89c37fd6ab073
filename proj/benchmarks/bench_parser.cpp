#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "textcoder/label_parser.hpp"
#include "textcoder/task_schema.hpp"

namespace {

using namespace textcoder;

const TaskSuite& suite() {
  static const auto s = load_task_suite_file(std::string(TEXTCODER_SOURCE_DIR) + "/configs/fatherhood_suite.yaml");
  return s;
}

void BM_ParseJoint(benchmark::State& state) {
  const std::vector<std::string> answers = {
      " passive, explicit, descriptive", "Label: active_positive_caring, implicit, ideal.",
      "not_applicable", "ACTIVE_NEGATIVE, EXPLICIT, DESCRIPTIVE", "I think it is passive"};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_labels(answers[i++ % answers.size()], suite(), TaskSelection::joint()));
  }
}
BENCHMARK(BM_ParseJoint);

}  // namespace
