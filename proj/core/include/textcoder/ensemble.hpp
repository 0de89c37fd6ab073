#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textcoder/label_parser.hpp"
#include "textcoder/metrics.hpp"
#include "textcoder/task_schema.hpp"

namespace textcoder {

struct MajorityVote {
  std::string label;
  bool tie = false;  // the winner came from the seeded draw
};

// Most frequent label. Ties are broken by a draw over the sorted tied set,
// seeded from (seed, instance_id) alone, so adding or removing other
// instances never changes this one's outcome.
MajorityVote majority_vote(std::span<const std::string> per_run_labels, std::uint64_t seed,
                           std::string_view instance_id);

inline std::string majority_label(std::span<const std::string> per_run_labels,
                                  std::uint64_t seed, std::string_view instance_id) {
  return majority_vote(per_run_labels, seed, instance_id).label;
}

struct OrderRun {
  std::string order_id;
  std::vector<std::size_t> permutation;
  std::vector<AnnotationRecord> records;
};

struct RunSet {
  std::vector<OrderRun> runs;
  std::uint64_t seed = 0;

  // Throws PreconditionError on duplicate order ids or runs that cover
  // different instance ids.
  void validate() const;
};

struct MajorityResult {
  std::vector<AnnotationRecord> records;  // first run's instance order
  std::size_t ties = 0;
  bool tie_break_used() const { return ties > 0; }
};

// Per-instance, per-task majority across runs, with the gate re-applied to
// the voted vector.
MajorityResult majority_records(const RunSet& runs, const TaskSuite& suite);

// Labels for `task_id`, arranged in `order` (instance ids). Throws
// PreconditionError listing ids that are missing from `records`.
LabelVector label_vector(std::span<const AnnotationRecord> records, std::string_view task_id,
                         std::string annotator_id, std::span<const std::string> order);

struct EnsembleOptions {
  bool want_std = true;
  // Published mean to compare against; a difference above 0.005 in any
  // column is recorded in the summary notes.
  std::optional<MetricReport> reference_mean;
};

struct EnsembleSummary {
  std::vector<MetricReport> per_run;
  MetricReport mean;
  std::optional<MetricReport> stddev;
  std::optional<MetricReport> majority;
  std::size_t ties = 0;
  bool tie_break_used = false;
  std::vector<std::string> notes;
};

// Sample standard deviation (n - 1). Needs at least two values.
double sample_stddev(std::span<const double> values);

// Aggregates already-scored runs. `majority` is passed through.
EnsembleSummary summarize_scores(std::span<const MetricReport> per_run,
                                 const EnsembleOptions& options = {},
                                 std::optional<MetricReport> majority = std::nullopt);

// Scores each run and the majority vote against every panelist in turn.
EnsembleSummary summarize_runs(const RunSet& runs, const TaskSuite& suite,
                               std::string_view task_id, std::span<const LabelVector> gold_panel,
                               const EnsembleOptions& options = {});

}  // namespace textcoder
