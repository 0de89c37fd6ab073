// textcoder: code text with an LLM and audit it against human coders.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "textcoder/commands.hpp"

namespace tc = textcoder::cli;

namespace {

void add_common(CLI::App* app, tc::CommonOptions& c) {
  app->add_option("--config", c.config, "Run configuration (YAML)");
  app->add_option("--seed", c.seed, "Global seed; overrides the config");
  app->add_option("--out", c.out, "Output directory; overrides the config");
  app->add_option("--endpoint", c.endpoint, "Base URL of an OpenAI-compatible API");
  app->add_option("--mock", c.mock, "Answer from a fixtures file instead of a live endpoint");
  app->add_option_function<std::vector<std::string>>(
         "--dump-prompts",
         [&c](const std::vector<std::string>& v) {
           c.dump_prompts = true;
           if (!v.empty() && !v.front().empty()) c.dump_dir = v.front();
         },
         "Write every rendered prompt (to DIR, default the output directory)")
      ->expected(0, 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-assisted text coding: prompts, annotation, agreement and cost"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "textcoder 0.3.0");

  tc::IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Split a corpus into keyword-filtered sentences");
  add_common(c_ingest, ingest.common);
  c_ingest->add_option("--corpus", ingest.corpus, "Corpus directory")->required();
  c_ingest->add_option("--keywords", ingest.keywords, "Keyword list, one per line")->required();
  c_ingest->add_option("--pos", ingest.pos, "POS sidecar (instance_id, token index, tag)");
  c_ingest->add_flag("--skip-pos", ingest.skip_pos, "Keep keyword matches without a noun check");
  int year_min = 0;
  int year_max = 0;
  auto* o_ymin = c_ingest->add_option("--year-min", year_min, "Earliest document year");
  auto* o_ymax = c_ingest->add_option("--year-max", year_max, "Latest document year");
  c_ingest->add_option("--validation-size", ingest.validation_size,
                       "Draw a validation set of this size");
  c_ingest->add_option("--exclude", ingest.exclude_examples,
                       "Examples file whose sentences never enter the validation set");

  tc::AnnotateOptions annotate;
  auto* c_annotate = app.add_subcommand("annotate", "Label instances through the endpoint");
  add_common(c_annotate, annotate.common);
  c_annotate->add_option("--run-id", annotate.run_id, "Run id stored with each record");
  c_annotate->add_option("--instances", annotate.instances, "Instances file; overrides the config");
  c_annotate->add_option("--limit", annotate.limit, "Only the first N instances");

  tc::EvaluateOptions evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Agreement with human coders");
  add_common(c_eval, evaluate.common);
  c_eval->add_option("--suite", evaluate.suite, "Task suite; overrides the config");
  c_eval->add_option("--gold", evaluate.gold, "Gold labels CSV; overrides the config");
  c_eval->add_option("--predictions", evaluate.predictions,
                     "Annotations to score, as PATH or NAME=PATH (repeatable)");
  c_eval->add_option("--scores", evaluate.scores,
                     "Precomputed rows (annotator,kappa,raw,f1) to average");
  c_eval->add_option("--task", evaluate.tasks, "Restrict to these tasks (repeatable)");
  c_eval->add_flag("--exclude-not-applicable", evaluate.exclude_not_applicable,
                   "Drop instances any annotator marked not applicable for the task");

  tc::SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Evaluate a grid of prompt settings");
  add_common(c_sweep, sweep.common);
  c_sweep->add_option("--grid", sweep.grid, "Grid file (YAML)");
  c_sweep->add_option("--levels", sweep.levels, "Description levels")->delimiter(',');
  c_sweep->add_option("--n-examples", sweep.n_examples, "Example counts")->delimiter(',');
  c_sweep->add_option("--task-modes", sweep.task_modes, "joint, single or task ids")
      ->delimiter(',');
  c_sweep->add_option("--orders", sweep.orders, "Example order indices")->delimiter(',');
  c_sweep->add_option("--task", sweep.task, "Task to score");

  tc::EnsembleOptions ensemble;
  std::string reference;
  bool no_std = false;
  auto* c_ens = app.add_subcommand("ensemble", "Several example orders plus a majority vote");
  add_common(c_ens, ensemble.common);
  c_ens->add_option("--orders", ensemble.orders, "Number of example orders")->capture_default_str();
  c_ens->add_option("--task", ensemble.task, "Task to score");
  c_ens->add_flag("--no-std", no_std, "Skip the standard deviation row");
  c_ens->add_option("--scores", ensemble.scores, "Precomputed per-order rows to summarize");
  c_ens->add_option("--reference", reference, "Published mean as kappa,raw,f1 to compare against");

  tc::BudgetOptions budget;
  auto* c_budget = app.add_subcommand("budget", "API spend and the human-coder baseline");
  add_common(c_budget, budget.common);
  c_budget->add_option("--run-log", budget.run_log, "run_log.jsonl from annotate");
  c_budget->add_option("--pricing", budget.pricing, "Pricing file; overrides the config");
  c_budget->add_option("--model", budget.model, "Price every request as this model");
  c_budget->add_option("--project", budget.project_instances, "Project the cost to N instances");
  c_budget->add_option("--human-instances", budget.human_instances, "Sentences for human coders");
  c_budget->add_option("--rate", budget.sentences_per_hour, "Sentences per coder hour")
      ->capture_default_str();
  c_budget->add_option("--wage", budget.wage, "Hourly wage per coder");
  c_budget->add_option("--coders", budget.coders, "Number of coders")->capture_default_str();
  c_budget->add_option("--hours", budget.hours, "Coding hours; overrides the rate");
  c_budget->add_option("--currency", budget.currency, "Currency of the wage")
      ->capture_default_str();
  c_budget->add_option("--machine-minutes", budget.machine_minutes,
                       "Wall-clock minutes of the model run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tc::kConfigError;
  }

  return tc::guarded(
      [&]() -> int {
        if (*c_ingest) {
          if (*o_ymin || *o_ymax) {
            ingest.years = textcoder::YearRange{*o_ymin ? year_min : -1000000,
                                                *o_ymax ? year_max : 1000000};
          }
          return tc::cmd_ingest(ingest, std::cout);
        }
        if (*c_annotate) return tc::cmd_annotate(annotate, std::cout);
        if (*c_eval) return tc::cmd_evaluate(evaluate, std::cout);
        if (*c_sweep) return tc::cmd_sweep(sweep, std::cout);
        if (*c_ens) {
          ensemble.want_std = !no_std;
          if (!reference.empty()) ensemble.reference_mean = tc::parse_score_triple(reference);
          return tc::cmd_ensemble(ensemble, std::cout);
        }
        return tc::cmd_budget(budget, std::cout);
      },
      std::cerr);
}
