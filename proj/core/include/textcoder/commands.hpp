#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textcoder/corpus.hpp"
#include "textcoder/gateway.hpp"
#include "textcoder/metrics.hpp"

namespace textcoder::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kPartialFailure = 2,
  kTransportExhausted = 3,
};

// 0 with no errors; 3 when every item failed in transport; 2 otherwise.
int exit_code_for(std::span<const ItemError> errors, std::size_t n_items);

// Runs `fn`, reporting library errors on `err` and mapping them to exit codes.
int guarded(const std::function<int()>& fn, std::ostream& err);

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> endpoint;  // overrides endpoint.base_url
  std::optional<std::filesystem::path> mock;
  bool dump_prompts = false;
  std::optional<std::filesystem::path> dump_dir;  // default: the output directory
};

struct IngestOptions {
  CommonOptions common;
  std::filesystem::path corpus;
  std::filesystem::path keywords;
  std::optional<std::filesystem::path> pos;
  bool skip_pos = false;
  std::optional<YearRange> years;
  std::size_t validation_size = 0;
  std::optional<std::filesystem::path> exclude_examples;
};

struct AnnotateOptions {
  CommonOptions common;
  std::optional<std::string> run_id;
  std::optional<std::filesystem::path> instances;
  std::optional<std::size_t> limit;
};

struct EvaluateOptions {
  CommonOptions common;
  std::optional<std::filesystem::path> suite;
  std::optional<std::filesystem::path> gold;
  std::vector<std::string> predictions;  // "name=path" or "path"
  std::optional<std::filesystem::path> scores;
  std::vector<std::string> tasks;  // empty: every task in the gold file
  bool exclude_not_applicable = false;
};

struct SweepOptions {
  CommonOptions common;
  std::optional<std::filesystem::path> grid;
  std::vector<std::string> levels;
  std::vector<std::size_t> n_examples;
  std::vector<std::string> task_modes;  // "joint", "single" or a task id
  std::vector<std::size_t> orders;
  std::optional<std::string> task;  // evaluated task; default the first
};

struct EnsembleOptions {
  CommonOptions common;
  std::size_t orders = 3;
  std::optional<std::string> task;
  bool want_std = true;
  std::optional<std::filesystem::path> scores;  // precomputed per-order rows
  std::optional<MetricReport> reference_mean;
};

struct BudgetOptions {
  CommonOptions common;
  std::optional<std::filesystem::path> run_log;
  std::optional<std::filesystem::path> pricing;
  std::optional<std::string> model;
  std::optional<std::size_t> project_instances;
  std::optional<std::size_t> human_instances;
  double sentences_per_hour = 100.0;
  std::optional<double> wage;
  std::size_t coders = 1;
  std::optional<double> hours;
  std::string currency = "USD";
  std::optional<double> machine_minutes;
};

int cmd_ingest(const IngestOptions& opts, std::ostream& out);
int cmd_annotate(const AnnotateOptions& opts, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out);
int cmd_sweep(const SweepOptions& opts, std::ostream& out);
int cmd_ensemble(const EnsembleOptions& opts, std::ostream& out);
int cmd_budget(const BudgetOptions& opts, std::ostream& out);

// "47.97,61.71,54.05" -> kappa, raw, f1.
MetricReport parse_score_triple(const std::string& s);

}  // namespace textcoder::cli
