#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace textcoder {

// One annotator's labels for one task, aligned to a shared instance index.
struct LabelVector {
  std::string annotator_id;
  std::string task_id;
  std::vector<std::string> labels;
  std::vector<std::string> instance_ids;  // optional; checked when both sides carry it
};

// Scores on the 0..100 scale used in reports. Unrounded.
struct MetricReport {
  std::string annotator_id;
  std::string task_id;
  double kappa = 0.0;
  double raw = 0.0;
  double f1 = 0.0;
  std::string against;
};

enum class Metric { kKappa, kRaw, kF1 };

// Cohen's kappa x100. Both vectors constant on the same label gives 100.
double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b);
// Percentage of positions where a and b agree.
double raw_agreement(std::span<const std::string> a, std::span<const std::string> b);
// Unweighted mean of per-class F1 over classes seen in gold or pred, x100.
double macro_f1(std::span<const std::string> pred, std::span<const std::string> gold);

double cohen_kappa(const LabelVector& a, const LabelVector& b);
double raw_agreement(const LabelVector& a, const LabelVector& b);
double macro_f1(const LabelVector& pred, const LabelVector& gold);

double score(Metric metric, const LabelVector& target, const LabelVector& reference);

// Mean of metric(target, p) over every p in the panel, each panelist taken in
// turn as the gold standard. The target itself must not be in the panel.
double avg_against_panel(const LabelVector& target, std::span<const LabelVector> panel,
                         Metric metric);

MetricReport report_against_panel(const LabelVector& target, std::span<const LabelVector> panel);

// Scores each annotator against all the others.
std::vector<MetricReport> leave_one_out(std::span<const LabelVector> annotators);

// Column-wise unweighted mean of the rows.
MetricReport panel_average(std::span<const MetricReport> rows,
                           std::string annotator_id = "Humans AVG");

struct ConfusionMatrix {
  std::vector<std::string> labels;  // sorted union of both vectors
  std::map<std::pair<std::string, std::string>, std::size_t> counts;  // (a, b) -> n

  std::size_t at(const std::string& a, const std::string& b) const;
  std::size_t total() const;
};

ConfusionMatrix confusion_matrix(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace textcoder
