#include "textcoder/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "textcoder/error.hpp"
#include "textcoder/seed.hpp"
#include "textcoder/text.hpp"

namespace textcoder {

MajorityVote majority_vote(std::span<const std::string> per_run_labels, std::uint64_t seed,
                           std::string_view instance_id) {
  if (per_run_labels.empty()) throw PreconditionError("majority vote over an empty list");
  std::map<std::string, std::size_t> counts;
  for (const auto& l : per_run_labels) ++counts[l];
  std::size_t best = 0;
  for (const auto& [label, n] : counts) best = std::max(best, n);
  std::vector<std::string> tied;
  for (const auto& [label, n] : counts) {
    if (n == best) tied.push_back(label);  // map order: already sorted
  }
  if (tied.size() == 1) return {tied.front(), false};
  SeededRng rng(splitmix64(seed ^ fnv1a64(instance_id)));
  return {tied[static_cast<std::size_t>(rng.below(tied.size()))], true};
}

void RunSet::validate() const {
  if (runs.empty()) throw PreconditionError("run set is empty");
  std::set<std::string> ids;
  for (const auto& r : runs) {
    if (!ids.insert(r.order_id).second) {
      throw PreconditionError("duplicate order id '" + r.order_id + "'");
    }
  }
  std::set<std::string> reference;
  for (const auto& rec : runs.front().records) reference.insert(rec.instance_id);
  for (const auto& r : runs) {
    std::set<std::string> mine;
    for (const auto& rec : r.records) mine.insert(rec.instance_id);
    if (mine != reference || mine.size() != r.records.size()) {
      throw PreconditionError("run '" + r.order_id + "' covers different instances than run '" +
                              runs.front().order_id + "'");
    }
  }
}

MajorityResult majority_records(const RunSet& runset, const TaskSuite& suite) {
  runset.validate();
  std::vector<std::unordered_map<std::string, const AnnotationRecord*>> by_id(runset.runs.size());
  for (std::size_t r = 0; r < runset.runs.size(); ++r) {
    for (const auto& rec : runset.runs[r].records) by_id[r][rec.instance_id] = &rec;
  }
  const std::uint64_t tie_seed = derive_seed(runset.seed, "tiebreak");

  MajorityResult out;
  for (const auto& first : runset.runs.front().records) {
    AnnotationRecord voted;
    voted.instance_id = first.instance_id;
    voted.run_id = "majority";
    voted.task_ids = first.task_ids;
    for (std::size_t t = 0; t < first.task_ids.size(); ++t) {
      std::vector<std::string> column;
      bool all_fallback = true;
      for (std::size_t r = 0; r < runset.runs.size(); ++r) {
        const auto* rec = by_id[r].at(first.instance_id);
        const auto* label = rec->label_for(first.task_ids[t]);
        if (label == nullptr) {
          throw PreconditionError("run '" + runset.runs[r].order_id + "' has no label for task '" +
                                  first.task_ids[t] + "' on " + first.instance_id);
        }
        column.push_back(*label);
        const auto idx = static_cast<std::size_t>(label - rec->labels.data());
        all_fallback = all_fallback && rec->fallback_applied.at(idx);
      }
      // Task id joins the tie key so two tasks of one instance draw independently.
      const auto vote = majority_vote(column, tie_seed, first.instance_id + '\x1f' + first.task_ids[t]);
      out.ties += vote.tie;
      voted.labels.push_back(vote.label);
      voted.fallback_applied.push_back(all_fallback);
    }
    if (voted.task_ids.size() == suite.size()) {
      const auto gated = apply_gate(suite, voted.labels);
      for (std::size_t t = 0; t < gated.size(); ++t) {
        if (gated[t] != voted.labels[t]) voted.fallback_applied[t] = false;
      }
      voted.labels = gated;
    }
    out.records.push_back(std::move(voted));
  }
  return out;
}

LabelVector label_vector(std::span<const AnnotationRecord> records, std::string_view task_id,
                         std::string annotator_id, std::span<const std::string> order) {
  std::unordered_map<std::string, const AnnotationRecord*> by_id;
  for (const auto& r : records) by_id[r.instance_id] = &r;
  LabelVector v;
  v.annotator_id = std::move(annotator_id);
  v.task_id = std::string(task_id);
  std::vector<std::string> missing;
  for (const auto& id : order) {
    const auto it = by_id.find(id);
    const std::string* label = it == by_id.end() ? nullptr : it->second->label_for(task_id);
    if (label == nullptr) {
      missing.push_back(id);
      continue;
    }
    v.labels.push_back(*label);
    v.instance_ids.push_back(id);
  }
  if (!missing.empty()) {
    if (missing.size() > 10) {
      const auto more = missing.size() - 10;
      missing.resize(10);
      missing.push_back(fmt::format("... ({} more)", more));
    }
    throw PreconditionError("no '" + std::string(task_id) + "' label from " + v.annotator_id +
                            " for: " + text::join(missing, ", "));
  }
  return v;
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) {
    throw PreconditionError("standard deviation needs at least two runs, got " +
                            std::to_string(values.size()));
  }
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

EnsembleSummary summarize_scores(std::span<const MetricReport> per_run,
                                 const EnsembleOptions& options,
                                 std::optional<MetricReport> majority) {
  if (per_run.empty()) throw PreconditionError("no runs to summarize");
  EnsembleSummary s;
  s.per_run.assign(per_run.begin(), per_run.end());
  s.mean = panel_average(per_run, "Avg");
  s.mean.against = per_run.front().against;
  if (options.want_std) {
    std::vector<double> k;
    std::vector<double> r;
    std::vector<double> f;
    for (const auto& row : per_run) {
      k.push_back(row.kappa);
      r.push_back(row.raw);
      f.push_back(row.f1);
    }
    MetricReport sd;
    sd.annotator_id = "Std";
    sd.task_id = s.mean.task_id;
    sd.against = s.mean.against;
    sd.kappa = sample_stddev(k);
    sd.raw = sample_stddev(r);
    sd.f1 = sample_stddev(f);
    s.stddev = sd;
  }
  s.majority = std::move(majority);
  if (options.reference_mean) {
    const auto& ref = *options.reference_mean;
    const auto check = [&](std::string_view name, double computed, double reference) {
      if (std::fabs(computed - reference) > 0.005) {
        s.notes.push_back(fmt::format(
            "{} mean computes to {:.2f} from the per-run rows; the reference value is {:.2f} "
            "(difference {:+.2f}). The computed mean is reported.",
            name, computed, reference, computed - reference));
      }
    };
    check("kappa", s.mean.kappa, ref.kappa);
    check("raw", s.mean.raw, ref.raw);
    check("f1", s.mean.f1, ref.f1);
  }
  return s;
}

EnsembleSummary summarize_runs(const RunSet& runs, const TaskSuite& suite,
                               std::string_view task_id, std::span<const LabelVector> gold_panel,
                               const EnsembleOptions& options) {
  runs.validate();
  if (gold_panel.empty()) throw PreconditionError("gold panel is empty");
  if (options.want_std && runs.runs.size() < 2) {
    throw PreconditionError("standard deviation needs at least two runs, got " +
                            std::to_string(runs.runs.size()));
  }
  suite.task(task_id);
  const auto& order = gold_panel.front().instance_ids;
  if (order.empty()) throw PreconditionError("gold panel carries no instance ids");

  std::vector<MetricReport> rows;
  for (const auto& run : runs.runs) {
    const auto v = label_vector(run.records, task_id, run.order_id, order);
    rows.push_back(report_against_panel(v, gold_panel));
  }
  const auto maj = majority_records(runs, suite);
  const auto mv = label_vector(maj.records, task_id, "Majority", order);
  auto summary = summarize_scores(rows, options, report_against_panel(mv, gold_panel));
  summary.ties = maj.ties;
  summary.tie_break_used = maj.tie_break_used();
  return summary;
}

}  // namespace textcoder
