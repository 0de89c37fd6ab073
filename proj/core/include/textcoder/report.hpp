#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "textcoder/budget.hpp"
#include "textcoder/ensemble.hpp"
#include "textcoder/metrics.hpp"

namespace textcoder {

// Two decimals, and never "-0.00".
std::string fixed2(double v);

struct EvalRow {
  MetricReport scores;
  std::string tasks = "n.a.";
  std::string description = "n.a.";
  std::string n_examples = "n.a.";
};

// Humans block (each coder plus the average), then one block per model.
struct EvalTable {
  std::string task_id;
  std::size_t n_instances = 0;
  std::vector<std::vector<EvalRow>> blocks;
  std::vector<std::string> notes;
};

std::string render_eval_table(const EvalTable& table);
std::string eval_tables_json(const std::vector<EvalTable>& tables);

struct EnsembleReport {
  std::string task_id;
  std::vector<std::string> order_labels;  // one per run, e.g. "0", "1"
  EnsembleSummary summary;
};

std::string render_ensemble(const EnsembleReport& report);
std::string ensemble_json(const EnsembleReport& report);

struct SweepRow {
  std::string cell;  // stable key, e.g. "tasks=joint level=long n=15 order=0"
  std::string tasks;
  std::string description;
  std::size_t n_examples = 0;
  std::string order;
  MetricReport scores;
  std::size_t fallbacks = 0;
  std::size_t errors = 0;
  std::size_t estimated_prompt_tokens = 0;  // mean over instances
};

// Sorted by kappa, best first; equal kappas keep cell-key order.
std::vector<SweepRow> sort_sweep(std::vector<SweepRow> rows);
std::string render_sweep(const std::string& task_id, const std::vector<SweepRow>& sorted);
std::string sweep_json(const std::string& task_id, const std::vector<SweepRow>& sorted);

struct BudgetReport {
  std::string model;
  CostModel pricing;
  std::size_t requests = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::size_t estimated_requests = 0;  // requests whose usage was estimated
  std::optional<CorpusCost> actual;
  std::optional<std::size_t> projected_instances;
  std::optional<double> projected_total;
  std::optional<std::size_t> human_instances;
  std::optional<HumanBaseline> human;
  std::optional<HumanCost> human_cost;
  std::optional<double> machine_minutes;
  std::optional<double> speedup;
};

std::string render_budget(const BudgetReport& report);
std::string budget_json(const BudgetReport& report);

}  // namespace textcoder
