#include "textcoder/metrics.hpp"

#include <algorithm>
#include <set>

#include "textcoder/error.hpp"
#include "textcoder/text.hpp"

namespace textcoder {
namespace {

void check_aligned(std::span<const std::string> a, std::span<const std::string> b,
                   bool allow_empty = false) {
  if (a.size() != b.size()) {
    throw PreconditionError("label vectors are misaligned (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty() && !allow_empty) throw PreconditionError("label vectors are empty");
}

void check_aligned(const LabelVector& a, const LabelVector& b) {
  check_aligned(a.labels, b.labels);
  if (!a.instance_ids.empty() && !b.instance_ids.empty() && a.instance_ids != b.instance_ids) {
    std::string where;
    const auto n = std::min(a.instance_ids.size(), b.instance_ids.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (a.instance_ids[i] != b.instance_ids[i]) {
        where = " (first difference at position " + std::to_string(i) + ": '" +
                a.instance_ids[i] + "' vs '" + b.instance_ids[i] + "')";
        break;
      }
    }
    throw PreconditionError("annotators '" + a.annotator_id + "' and '" + b.annotator_id +
                            "' cover different instances" + where);
  }
}

}  // namespace

double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  check_aligned(a, b);
  const auto n = static_cast<long double>(a.size());
  std::map<std::string, std::size_t> ma;
  std::map<std::string, std::size_t> mb;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ma[a[i]];
    ++mb[b[i]];
    if (a[i] == b[i]) ++matches;
  }
  // Integer numerators keep p_e == 1 exact.
  unsigned long long expected = 0;
  for (const auto& [label, ca] : ma) {
    if (const auto it = mb.find(label); it != mb.end()) expected += ca * it->second;
  }
  const auto n2 = static_cast<unsigned long long>(a.size()) * a.size();
  if (expected == n2) return 100.0;
  const long double po = static_cast<long double>(matches) / n;
  const long double pe = static_cast<long double>(expected) / static_cast<long double>(n2);
  return static_cast<double>(100.0L * (po - pe) / (1.0L - pe));
}

double raw_agreement(std::span<const std::string> a, std::span<const std::string> b) {
  check_aligned(a, b);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) matches += a[i] == b[i];
  return 100.0 * static_cast<double>(matches) / static_cast<double>(a.size());
}

double macro_f1(std::span<const std::string> pred, std::span<const std::string> gold) {
  check_aligned(pred, gold);
  std::set<std::string> classes(pred.begin(), pred.end());
  classes.insert(gold.begin(), gold.end());
  double sum = 0.0;
  for (const auto& c : classes) {
    std::size_t tp = 0;
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      predicted += pred[i] == c;
      actual += gold[i] == c;
      tp += pred[i] == c && gold[i] == c;
    }
    const double precision = predicted ? static_cast<double>(tp) / predicted : 0.0;
    const double recall = actual ? static_cast<double>(tp) / actual : 0.0;
    if (precision + recall > 0) sum += 2.0 * precision * recall / (precision + recall);
  }
  return 100.0 * sum / static_cast<double>(classes.size());
}

double cohen_kappa(const LabelVector& a, const LabelVector& b) {
  check_aligned(a, b);
  return cohen_kappa(a.labels, b.labels);
}

double raw_agreement(const LabelVector& a, const LabelVector& b) {
  check_aligned(a, b);
  return raw_agreement(a.labels, b.labels);
}

double macro_f1(const LabelVector& pred, const LabelVector& gold) {
  check_aligned(pred, gold);
  return macro_f1(pred.labels, gold.labels);
}

double score(Metric metric, const LabelVector& target, const LabelVector& reference) {
  switch (metric) {
    case Metric::kKappa:
      return cohen_kappa(target, reference);
    case Metric::kRaw:
      return raw_agreement(target, reference);
    case Metric::kF1:
      return macro_f1(target, reference);
  }
  return 0.0;
}

double avg_against_panel(const LabelVector& target, std::span<const LabelVector> panel,
                         Metric metric) {
  if (panel.empty()) throw PreconditionError("panel is empty");
  double sum = 0.0;
  for (const auto& p : panel) {
    if (p.annotator_id == target.annotator_id) {
      throw PreconditionError("annotator '" + target.annotator_id + "' is part of its own panel");
    }
    sum += score(metric, target, p);
  }
  return sum / static_cast<double>(panel.size());
}

MetricReport report_against_panel(const LabelVector& target, std::span<const LabelVector> panel) {
  MetricReport r;
  r.annotator_id = target.annotator_id;
  r.task_id = target.task_id;
  r.kappa = avg_against_panel(target, panel, Metric::kKappa);
  r.raw = avg_against_panel(target, panel, Metric::kRaw);
  r.f1 = avg_against_panel(target, panel, Metric::kF1);
  std::vector<std::string> names;
  for (const auto& p : panel) names.push_back(p.annotator_id);
  r.against = text::join(names, ",");
  return r;
}

std::vector<MetricReport> leave_one_out(std::span<const LabelVector> annotators) {
  if (annotators.size() < 2) throw PreconditionError("leave-one-out needs at least two annotators");
  std::vector<MetricReport> rows;
  for (std::size_t i = 0; i < annotators.size(); ++i) {
    std::vector<LabelVector> others;
    for (std::size_t j = 0; j < annotators.size(); ++j) {
      if (j != i) others.push_back(annotators[j]);
    }
    rows.push_back(report_against_panel(annotators[i], others));
  }
  return rows;
}

MetricReport panel_average(std::span<const MetricReport> rows, std::string annotator_id) {
  if (rows.empty()) throw PreconditionError("panel_average needs at least one row");
  MetricReport avg;
  avg.annotator_id = std::move(annotator_id);
  avg.task_id = rows.front().task_id;
  std::vector<std::string> names;
  for (const auto& r : rows) {
    if (r.task_id != avg.task_id) {
      throw PreconditionError("panel_average rows mix tasks '" + avg.task_id + "' and '" +
                              r.task_id + "'");
    }
    avg.kappa += r.kappa;
    avg.raw += r.raw;
    avg.f1 += r.f1;
    names.push_back(r.annotator_id);
  }
  const auto n = static_cast<double>(rows.size());
  avg.kappa /= n;
  avg.raw /= n;
  avg.f1 /= n;
  avg.against = "mean of " + text::join(names, ",");
  return avg;
}

std::size_t ConfusionMatrix::at(const std::string& a, const std::string& b) const {
  const auto it = counts.find({a, b});
  return it == counts.end() ? 0 : it->second;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& [k, v] : counts) t += v;
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> a, std::span<const std::string> b) {
  check_aligned(a, b, /*allow_empty=*/true);
  ConfusionMatrix m;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++m.counts[{a[i], b[i]}];
    labels.insert(a[i]);
    labels.insert(b[i]);
  }
  m.labels.assign(labels.begin(), labels.end());
  return m;
}

}  // namespace textcoder
