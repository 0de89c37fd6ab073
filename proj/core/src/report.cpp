#include "textcoder/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "json.hpp"

namespace textcoder {
namespace {

using nlohmann::json;

// Column-aligned plain-text table. The first column is left-aligned, the
// rest right-aligned; an empty row draws a rule.
std::string render_grid(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  const auto widen = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], r[i].size());
    }
  };
  widen(header);
  for (const auto& r : rows) widen(r);
  std::size_t total = 0;
  for (const auto w : width) total += w + 2;
  total -= 2;

  std::string out;
  const auto line = [&](const std::vector<std::string>& r) {
    std::string l;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) l += "  ";
      l += i == 0 ? fmt::format("{:<{}}", r[i], width[i]) : fmt::format("{:>{}}", r[i], width[i]);
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + '\n';
  };
  const std::string rule(total, '-');
  line(header);
  out += rule + '\n';
  for (const auto& r : rows) {
    if (r.empty()) {
      out += rule + '\n';
    } else {
      line(r);
    }
  }
  return out;
}

json scores_json(const MetricReport& m) {
  return {{"annotator", m.annotator_id}, {"task", m.task_id}, {"kappa", m.kappa},
          {"raw", m.raw},                {"f1", m.f1},        {"against", m.against}};
}

}  // namespace

std::string fixed2(double v) {
  auto s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string render_eval_table(const EvalTable& table) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t b = 0; b < table.blocks.size(); ++b) {
    if (b) rows.emplace_back();
    for (const auto& r : table.blocks[b]) {
      rows.push_back({r.scores.annotator_id, r.tasks, r.description, r.n_examples,
                      fixed2(r.scores.kappa), fixed2(r.scores.raw), fixed2(r.scores.f1)});
    }
  }
  std::string out = fmt::format("task: {}", table.task_id);
  if (table.n_instances) out += fmt::format(" ({} instances)", table.n_instances);
  out += '\n';
  out += render_grid({"Annotator", "Tasks", "Label description", "N. Examples", "Kappa", "Raw", "F1"},
                     rows);
  for (const auto& n : table.notes) out += "note: " + n + '\n';
  return out;
}

std::string eval_tables_json(const std::vector<EvalTable>& tables) {
  json arr = json::array();
  for (const auto& t : tables) {
    json rows = json::array();
    for (std::size_t b = 0; b < t.blocks.size(); ++b) {
      for (const auto& r : t.blocks[b]) {
        auto j = scores_json(r.scores);
        j["block"] = b;
        j["tasks"] = r.tasks;
        j["description"] = r.description;
        j["n_examples"] = r.n_examples;
        rows.push_back(std::move(j));
      }
    }
    arr.push_back({{"task", t.task_id}, {"n_instances", t.n_instances}, {"rows", rows},
                   {"notes", t.notes}});
  }
  return arr.dump(2) + '\n';
}

std::string render_ensemble(const EnsembleReport& report) {
  const auto& s = report.summary;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < s.per_run.size(); ++i) {
    const auto label = i < report.order_labels.size() ? report.order_labels[i] : std::to_string(i);
    rows.push_back({label, fixed2(s.per_run[i].kappa), fixed2(s.per_run[i].raw),
                    fixed2(s.per_run[i].f1)});
  }
  rows.emplace_back();
  rows.push_back({"Avg", fixed2(s.mean.kappa), fixed2(s.mean.raw), fixed2(s.mean.f1)});
  if (s.stddev) {
    rows.push_back({"Std", fixed2(s.stddev->kappa), fixed2(s.stddev->raw), fixed2(s.stddev->f1)});
  }
  if (s.majority) {
    rows.emplace_back();
    rows.push_back(
        {"Majority", fixed2(s.majority->kappa), fixed2(s.majority->raw), fixed2(s.majority->f1)});
  }
  std::string out = fmt::format("task: {}\n", report.task_id);
  out += render_grid({"Examples order", "Kappa", "Raw", "F1"}, rows);
  if (s.majority) {
    out += fmt::format("tie-break used: {} ({} tied votes)\n", s.tie_break_used ? "yes" : "no",
                       s.ties);
  }
  for (const auto& n : s.notes) out += "note: " + n + '\n';
  return out;
}

std::string ensemble_json(const EnsembleReport& report) {
  const auto& s = report.summary;
  json runs = json::array();
  for (std::size_t i = 0; i < s.per_run.size(); ++i) {
    auto j = scores_json(s.per_run[i]);
    j["order"] = i < report.order_labels.size() ? report.order_labels[i] : std::to_string(i);
    runs.push_back(std::move(j));
  }
  json j = {{"task", report.task_id}, {"runs", runs}, {"mean", scores_json(s.mean)},
            {"tie_break_used", s.tie_break_used}, {"ties", s.ties}, {"notes", s.notes}};
  j["std"] = s.stddev ? scores_json(*s.stddev) : json(nullptr);
  j["majority"] = s.majority ? scores_json(*s.majority) : json(nullptr);
  return j.dump(2) + '\n';
}

std::vector<SweepRow> sort_sweep(std::vector<SweepRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.scores.kappa != b.scores.kappa) return a.scores.kappa > b.scores.kappa;
    return a.cell < b.cell;
  });
  return rows;
}

std::string render_sweep(const std::string& task_id, const std::vector<SweepRow>& sorted) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : sorted) {
    rows.push_back({r.tasks, r.description, std::to_string(r.n_examples), r.order,
                    fixed2(r.scores.kappa), fixed2(r.scores.raw), fixed2(r.scores.f1),
                    std::to_string(r.fallbacks), std::to_string(r.errors),
                    std::to_string(r.estimated_prompt_tokens)});
  }
  return fmt::format("task: {}\n", task_id) +
         render_grid({"Tasks", "Label description", "N. Examples", "Order", "Kappa", "Raw", "F1",
                      "Fallbacks", "Errors", "~Tokens"},
                     rows);
}

std::string sweep_json(const std::string& task_id, const std::vector<SweepRow>& sorted) {
  json rows = json::array();
  for (const auto& r : sorted) {
    auto j = scores_json(r.scores);
    j["cell"] = r.cell;
    j["tasks"] = r.tasks;
    j["description"] = r.description;
    j["n_examples"] = r.n_examples;
    j["order"] = r.order;
    j["fallbacks"] = r.fallbacks;
    j["errors"] = r.errors;
    j["estimated_prompt_tokens"] = r.estimated_prompt_tokens;
    rows.push_back(std::move(j));
  }
  return json{{"task", task_id}, {"rows", rows}}.dump(2) + '\n';
}

std::string render_budget(const BudgetReport& r) {
  std::string out;
  const auto& cur = r.pricing.currency;
  if (r.actual) {
    out += fmt::format("model: {}\n", r.model);
    out += fmt::format("rates: {} / {} {} per 1000 prompt / completion tokens\n",
                       r.pricing.input_rate, r.pricing.output_rate, cur);
    out += fmt::format("requests: {} ({} with estimated usage)\n", r.requests, r.estimated_requests);
    out += fmt::format("tokens: {} prompt, {} completion\n", r.prompt_tokens, r.completion_tokens);
    out += fmt::format("actual spend: {} (mean {} per request)\n", format_money(r.actual->total, cur),
                       format_money(r.actual->mean, cur, 4));
  }
  if (r.projected_total && r.projected_instances) {
    out += fmt::format("projected for {} instances: {}\n", *r.projected_instances,
                       format_money(*r.projected_total, cur));
  }
  if (r.human && r.human_cost) {
    const auto& h = *r.human;
    out += fmt::format("human baseline: {} instances, {} h at {}/h x {} coder(s) = {}\n",
                       r.human_instances.value_or(0), fmt::format("{:.2f}", r.human_cost->hours),
                       format_money(h.wage_per_hour, h.currency), h.n_coders,
                       format_money(r.human_cost->total, h.currency));
  }
  if (r.speedup && r.machine_minutes) {
    out += fmt::format("machine time: {:.2f} min, speedup over one coder: {:.2f}x\n",
                       *r.machine_minutes, *r.speedup);
  }
  if (out.empty()) out = "nothing to report\n";
  return out;
}

std::string budget_json(const BudgetReport& r) {
  json j;
  j["model"] = r.model;
  j["pricing"] = {{"input_rate", r.pricing.input_rate},
                  {"output_rate", r.pricing.output_rate},
                  {"currency", r.pricing.currency}};
  j["requests"] = r.requests;
  j["estimated_requests"] = r.estimated_requests;
  j["prompt_tokens"] = r.prompt_tokens;
  j["completion_tokens"] = r.completion_tokens;
  if (r.actual) {
    j["actual"] = {{"total", r.actual->total},
                   {"mean", r.actual->mean},
                   {"total_minor_units", to_minor_units(r.actual->total)}};
  }
  if (r.projected_total) {
    j["projected"] = {{"instances", r.projected_instances.value_or(0)},
                      {"total", *r.projected_total},
                      {"total_minor_units", to_minor_units(*r.projected_total)}};
  }
  if (r.human && r.human_cost) {
    j["human"] = {{"instances", r.human_instances.value_or(0)},
                  {"sentences_per_hour", r.human->sentences_per_hour},
                  {"wage_per_hour", r.human->wage_per_hour},
                  {"n_coders", r.human->n_coders},
                  {"currency", r.human->currency},
                  {"hours", r.human_cost->hours},
                  {"total", r.human_cost->total},
                  {"total_minor_units", to_minor_units(r.human_cost->total)}};
  }
  if (r.speedup) j["speedup"] = *r.speedup;
  if (r.machine_minutes) j["machine_minutes"] = *r.machine_minutes;
  return j.dump(2) + '\n';
}

}  // namespace textcoder
