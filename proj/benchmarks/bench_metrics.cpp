#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "textcoder/metrics.hpp"

namespace {

std::vector<std::string> random_labels(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back("label_" + std::to_string(gen() % k));
  return out;
}

void BM_CohenKappa(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_labels(n, 6, 1);
  const auto b = random_labels(n, 6, 2);
  for (auto _ : state) benchmark::DoNotOptimize(textcoder::cohen_kappa(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_CohenKappa)->Arg(350)->Arg(1910)->Arg(100000);

void BM_MacroF1(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_labels(n, 6, 3);
  const auto b = random_labels(n, 6, 4);
  for (auto _ : state) benchmark::DoNotOptimize(textcoder::macro_f1(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MacroF1)->Arg(350)->Arg(1910)->Arg(100000);

void BM_LeaveOneOut(benchmark::State& state) {
  std::vector<textcoder::LabelVector> panel;
  for (std::uint64_t h = 0; h < 3; ++h) {
    textcoder::LabelVector v;
    v.annotator_id = "h" + std::to_string(h + 1);
    v.task_id = "involvement";
    v.labels = random_labels(350, 6, 10 + h);
    panel.push_back(std::move(v));
  }
  for (auto _ : state) benchmark::DoNotOptimize(textcoder::leave_one_out(panel));
}
BENCHMARK(BM_LeaveOneOut);

}  // namespace
