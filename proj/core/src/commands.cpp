#include "textcoder/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "textcoder/budget.hpp"
#include "textcoder/ensemble.hpp"
#include "textcoder/error.hpp"
#include "textcoder/label_parser.hpp"
#include "textcoder/prompt.hpp"
#include "textcoder/records.hpp"
#include "textcoder/report.hpp"
#include "textcoder/run_config.hpp"
#include "textcoder/seed.hpp"
#include "textcoder/task_schema.hpp"
#include "textcoder/text.hpp"

namespace textcoder::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- shared plumbing ----------------------------------------------------------

RunConfig open_config(const CommonOptions& common) {
  if (!common.config) throw ConfigError("--config is required for this command");
  auto cfg = load_run_config(*common.config);
  if (common.seed) cfg.seed = *common.seed;
  if (common.out) cfg.output_dir = *common.out;
  if (common.endpoint) {
    cfg.endpoint.base_url = *common.endpoint;
    cfg.mock_fixtures.reset();
  }
  if (common.mock) cfg.mock_fixtures = *common.mock;
  return cfg;
}

struct Workspace {
  RunConfig cfg;
  TaskSuite suite;
  std::vector<Instance> instances;
  std::vector<FewShotExample> examples;
  std::shared_ptr<Gateway> gateway;
};

std::shared_ptr<Gateway> make_gateway(const RunConfig& cfg) {
  std::shared_ptr<CompletionBackend> backend;
  if (cfg.mock_fixtures) {
    backend = make_mock_backend(MockFixtures::load(*cfg.mock_fixtures));
  } else {
    backend = make_http_backend(cfg.endpoint);
  }
  const auto cache_dir = cfg.cache_dir.value_or(cfg.output_dir / "cache");
  return std::make_shared<Gateway>(cfg.endpoint, std::move(backend),
                                   std::make_shared<ResponseCache>(cache_dir));
}

Workspace open_workspace(RunConfig cfg) {
  cfg.validate();
  auto suite = load_task_suite_file(cfg.task_suite);
  auto instances = load_instances(cfg.instances);
  std::vector<FewShotExample> examples;
  if (!cfg.examples.empty() && fs::exists(cfg.examples)) {
    examples = validate_examples(suite, load_examples(cfg.examples));
  }
  auto gateway = make_gateway(cfg);
  return Workspace{std::move(cfg), std::move(suite), std::move(instances), std::move(examples),
                   std::move(gateway)};
}

// "1,2,3" for joint prompts, the 1-based task number otherwise.
std::string task_numbers(const TaskSuite& suite, const TaskSelection& sel) {
  if (!sel.is_joint()) {
    const auto idx = suite.task_index(*sel.task_id);
    return idx ? std::to_string(*idx + 1) : *sel.task_id;
  }
  std::vector<std::string> n;
  for (std::size_t i = 0; i < suite.size(); ++i) n.push_back(std::to_string(i + 1));
  return text::join(n, ",");
}

std::string order_label(const OrderSpec& spec, std::size_t n_examples) {
  if (n_examples == 0) return "-";
  if (spec.index) return std::to_string(*spec.index);
  if (!spec.permutation.empty()) return "custom";
  if (spec.shuffle_seed) return "shuffle:" + std::to_string(*spec.shuffle_seed);
  return "0";
}

struct PassResult {
  std::vector<AnnotationRecord> records;
  std::vector<ItemError> errors;
  std::size_t network_calls = 0;
  std::size_t estimated_prompt_tokens = 0;  // mean per instance
  std::vector<std::string> warnings;
};

json segments_json(const Prompt& p) {
  json segs = json::array();
  for (const auto& s : p.segments) {
    segs.push_back({{"kind", std::string(to_string(s.kind))}, {"begin", s.begin}, {"end", s.end}});
  }
  return segs;
}

PassResult annotate_pass(Gateway& gateway, const TaskSuite& suite,
                         std::span<const FewShotExample> examples,
                         std::span<const Instance> instances, const PromptConfig& pc,
                         const std::string& run_id, RunLog* log,
                         const std::optional<fs::path>& dump_path) {
  PassResult result;
  std::vector<KeyedPrompt> prompts;
  prompts.reserve(instances.size());
  std::string dump;
  std::size_t token_sum = 0;
  for (const auto& inst : instances) {
    auto p = build_prompt(pc, suite, examples, inst);
    if (result.warnings.empty()) result.warnings = p.warnings;
    token_sum += p.stats.estimated_tokens;
    if (dump_path) {
      dump += json{{"instance_id", inst.id},
                   {"prompt", p.text},
                   {"segments", segments_json(p)},
                   {"words", p.stats.words},
                   {"characters", p.stats.characters},
                   {"estimated_tokens", p.stats.estimated_tokens}}
                  .dump();
      dump += '\n';
    }
    prompts.push_back({inst.id, std::move(p.text)});
  }
  if (!instances.empty()) result.estimated_prompt_tokens = token_sum / instances.size();
  if (dump_path) write_text_file(*dump_path, dump);

  const auto before = gateway.network_calls();
  auto batch = gateway.annotate_batch(prompts, run_id, log);
  result.network_calls = gateway.network_calls() - before;
  for (const auto& item : batch.items) {
    if (!item.response) continue;
    auto rec = parse_labels(item.response->text, suite, pc.tasks);
    rec.instance_id = item.instance_id;
    rec.run_id = run_id;
    result.records.push_back(std::move(rec));
  }
  result.errors = std::move(batch.errors);
  return result;
}

json errors_json(std::span<const ItemError> errors) {
  json arr = json::array();
  for (const auto& e : errors) {
    arr.push_back({{"instance_id", e.instance_id}, {"kind", e.kind}, {"status", e.status},
                   {"message", e.message}});
  }
  return arr;
}

std::vector<std::string> selected_task_ids(const TaskSuite& suite, const TaskSelection& sel) {
  if (!sel.is_joint()) return {*sel.task_id};
  std::vector<std::string> ids;
  for (const auto& t : suite.tasks()) ids.push_back(t.id);
  return ids;
}

std::size_t count_fallbacks(std::span<const AnnotationRecord> records) {
  std::size_t n = 0;
  for (const auto& r : records) n += r.any_fallback();
  return n;
}

std::string first_task_id(const TaskSuite& suite) { return suite.tasks().front().id; }

// Not-applicable label of a task, if it has one.
std::optional<std::string> not_applicable_of(const TaskSuite& suite, const CodingTask& task) {
  if (task.not_applicable) return task.not_applicable;
  if (suite.gate() && suite.gate()->task_id == task.id) return suite.gate()->label_id;
  return std::nullopt;
}

// Keeps only positions where no vector carries `na`.
void drop_not_applicable(std::vector<LabelVector*> vectors, const std::string& na) {
  if (vectors.empty()) return;
  const auto n = vectors.front()->labels.size();
  std::vector<bool> keep(n, true);
  for (const auto* v : vectors) {
    for (std::size_t i = 0; i < n; ++i) {
      if (v->labels[i] == na) keep[i] = false;
    }
  }
  for (auto* v : vectors) {
    LabelVector kept = *v;
    kept.labels.clear();
    kept.instance_ids.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (!keep[i]) continue;
      kept.labels.push_back(v->labels[i]);
      if (!v->instance_ids.empty()) kept.instance_ids.push_back(v->instance_ids[i]);
    }
    *v = std::move(kept);
  }
}

// Humans block: each coder scored against the others, then their mean.
std::vector<EvalRow> human_rows(std::span<const LabelVector> panel) {
  std::vector<EvalRow> rows;
  std::vector<MetricReport> reports;
  if (panel.size() >= 2) reports = leave_one_out(panel);
  for (const auto& r : reports) rows.push_back(EvalRow{r});
  if (!reports.empty()) rows.push_back(EvalRow{panel_average(reports)});
  return rows;
}

std::optional<std::time_t> parse_utc(const std::string& s) {
  std::tm tm{};
  int ms = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d.%dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                  &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms) < 6) {
    return std::nullopt;
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return timegm(&tm);
}

}  // namespace

// --- exit codes ---------------------------------------------------------------

int exit_code_for(std::span<const ItemError> errors, std::size_t n_items) {
  if (errors.empty()) return kOk;
  const bool all_transport = std::all_of(errors.begin(), errors.end(),
                                         [](const ItemError& e) { return e.kind == "transport"; });
  if (all_transport && errors.size() == n_items) return kTransportExhausted;
  return kPartialFailure;
}

int guarded(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const TransportError& e) {
    err << "error: " << e.what() << '\n';
    return kTransportExhausted;
  } catch (const RequestError& e) {
    err << "error: " << e.what() << '\n';
    return kPartialFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const YAML::Exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

MetricReport parse_score_triple(const std::string& s) {
  const auto parts = text::split(s, ',');
  if (parts.size() != 3) throw ConfigError("expected kappa,raw,f1 but got '" + s + "'");
  MetricReport m;
  try {
    m.kappa = std::stod(parts[0]);
    m.raw = std::stod(parts[1]);
    m.f1 = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("expected three numbers in '" + s + "'");
  }
  m.annotator_id = "reference";
  return m;
}

// --- ingest -------------------------------------------------------------------

int cmd_ingest(const IngestOptions& opts, std::ostream& out) {
  if (!opts.pos && !opts.skip_pos) {
    throw ConfigError("a POS sidecar is required (--pos FILE), or pass --skip-pos");
  }
  const auto keywords = load_keywords(opts.keywords);
  const auto docs = load_corpus(opts.corpus, opts.years);
  std::vector<Instance> sentences;
  for (const auto& d : docs) {
    auto s = split_sentences(d);
    sentences.insert(sentences.end(), std::make_move_iterator(s.begin()),
                     std::make_move_iterator(s.end()));
  }
  auto kept = keyword_filter(sentences, keywords);
  const auto after_keywords = kept.size();
  if (opts.pos) kept = pos_filter(kept, keywords, load_pos_sidecar(*opts.pos));

  const fs::path dir = opts.common.out.value_or(".");
  write_text_file(dir / "instances.jsonl", instances_to_jsonl(kept));

  json summary = {{"documents", docs.size()},
                  {"sentences", sentences.size()},
                  {"keyword_matches", after_keywords},
                  {"instances", kept.size()},
                  {"pos_filtered", opts.pos.has_value()}};
  out << fmt::format("{} documents, {} sentences, {} keyword matches, {} instances\n",
                     docs.size(), sentences.size(), after_keywords, kept.size());

  if (opts.validation_size > 0) {
    std::set<std::string> exclude;
    if (opts.exclude_examples) {
      std::set<std::string> texts;
      for (const auto& ex : load_examples(*opts.exclude_examples)) {
        if (!ex.instance_id.empty()) exclude.insert(ex.instance_id);
        texts.insert(normalize(ex.text));
      }
      for (const auto& inst : kept) {
        if (texts.count(inst.text)) exclude.insert(inst.id);
      }
    }
    const auto seed = derive_seed(opts.common.seed.value_or(0), "validation");
    const auto split = split_validation(kept, opts.validation_size, seed, exclude);
    write_text_file(dir / "validation.jsonl", instances_to_jsonl(split.validation));
    write_text_file(dir / "remainder.jsonl", instances_to_jsonl(split.remainder));
    std::size_t excluded = 0;
    for (const auto& inst : kept) excluded += exclude.count(inst.id);
    summary["validation"] = split.validation.size();
    summary["remainder"] = split.remainder.size();
    summary["excluded"] = excluded;
    out << fmt::format("validation {}, remainder {}, excluded {}\n", split.validation.size(),
                       split.remainder.size(), excluded);
  }
  write_text_file(dir / "ingest.json", summary.dump(2) + '\n');
  return kOk;
}

// --- annotate -----------------------------------------------------------------

int cmd_annotate(const AnnotateOptions& opts, std::ostream& out) {
  auto cfg = open_config(opts.common);
  if (opts.instances) cfg.instances = *opts.instances;
  auto ws = open_workspace(std::move(cfg));
  if (opts.limit && *opts.limit < ws.instances.size()) ws.instances.resize(*opts.limit);

  const auto pc = make_prompt_config(ws.cfg.prompt, ws.cfg.seed);
  const auto run_id = opts.run_id.value_or("annotate");
  const auto dir = ws.cfg.output_dir;
  fs::remove(dir / "run_log.jsonl");
  RunLog log(dir / "run_log.jsonl");
  std::optional<fs::path> dump;
  if (opts.common.dump_prompts) dump = opts.common.dump_dir.value_or(dir) / "prompts.jsonl";

  const auto pass = annotate_pass(*ws.gateway, ws.suite, ws.examples, ws.instances, pc, run_id,
                                  &log, dump);
  const auto task_ids = selected_task_ids(ws.suite, pc.tasks);
  write_text_file(dir / "annotations.jsonl", annotations_to_jsonl(pass.records));
  write_text_file(dir / "annotations.csv", annotations_to_csv(pass.records, task_ids));
  write_text_file(dir / "errors.json", errors_json(pass.errors).dump(2) + '\n');

  const int code = exit_code_for(pass.errors, ws.instances.size());
  const json manifest = {
      {"run_id", run_id},
      {"model", ws.cfg.endpoint.model_name},
      {"tasks", to_string(pc.tasks)},
      {"task_numbers", task_numbers(ws.suite, pc.tasks)},
      {"description_level", std::string(to_string(pc.description_level))},
      {"n_examples", pc.n_examples},
      {"order", order_label(ws.cfg.prompt.order, pc.n_examples)},
      {"seed", ws.cfg.seed},
      {"instances", ws.instances.size()},
      {"records", pass.records.size()},
      {"fallbacks", count_fallbacks(pass.records)},
      {"errors", pass.errors.size()},
      {"network_calls", pass.network_calls},
      {"estimated_prompt_tokens", pass.estimated_prompt_tokens},
      {"warnings", pass.warnings},
      {"exit_code", code}};
  write_text_file(dir / "run.json", manifest.dump(2) + '\n');

  for (const auto& w : pass.warnings) out << "warning: " << w << '\n';
  out << fmt::format("{} of {} instances annotated, {} with fallback labels, {} errors, "
                     "{} network calls\n",
                     pass.records.size(), ws.instances.size(), count_fallbacks(pass.records),
                     pass.errors.size(), pass.network_calls);
  for (const auto& e : pass.errors) {
    out << fmt::format("  {} [{} {}] {}\n", e.instance_id, e.kind, e.status, e.message);
  }
  return code;
}

// --- evaluate -----------------------------------------------------------------

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out) {
  std::optional<RunConfig> cfg;
  if (opts.common.config) cfg = open_config(opts.common);
  const auto out_dir = opts.common.out ? opts.common.out : (cfg ? std::optional(cfg->output_dir)
                                                                : std::nullopt);
  std::vector<EvalTable> tables;

  if (opts.scores) {
    const std::string task = opts.tasks.empty() ? "precomputed" : opts.tasks.front();
    const auto rows = load_scores(*opts.scores, task);
    EvalTable t;
    t.task_id = task;
    std::vector<EvalRow> block;
    for (const auto& r : rows) block.push_back(EvalRow{r});
    block.push_back(EvalRow{panel_average(rows)});
    t.blocks.push_back(std::move(block));
    tables.push_back(std::move(t));
  } else {
    const auto suite_path = opts.suite ? *opts.suite : (cfg ? cfg->task_suite : fs::path());
    if (suite_path.empty()) throw ConfigError("no task suite: pass --suite or --config");
    const auto gold_path = opts.gold ? opts.gold : (cfg ? cfg->gold : std::nullopt);
    if (!gold_path) throw ConfigError("no gold file: pass --gold or set 'gold' in the config");
    const auto suite = load_task_suite_file(suite_path);
    const auto gold = load_gold(*gold_path, suite);

    struct Prediction {
      std::string name;
      std::vector<AnnotationRecord> records;
      json run;
    };
    std::vector<Prediction> preds;
    for (const auto& spec : opts.predictions) {
      Prediction p;
      fs::path path = spec;
      if (const auto eq = spec.find('='); eq != std::string::npos) {
        p.name = spec.substr(0, eq);
        path = spec.substr(eq + 1);
      }
      if (fs::is_directory(path)) path /= "annotations.jsonl";
      p.records = load_annotations(path);
      const auto manifest = path.parent_path() / "run.json";
      if (fs::exists(manifest)) p.run = json::parse(read_text_file(manifest));
      if (p.name.empty()) {
        p.name = p.run.is_object() ? p.run.value("model", path.stem().string())
                                   : path.stem().string();
      }
      preds.push_back(std::move(p));
    }

    std::vector<std::string> task_ids = opts.tasks;
    if (task_ids.empty()) {
      for (const auto& t : suite.tasks()) {
        if (!gold.panel(t.id).empty()) task_ids.push_back(t.id);
      }
    }
    if (task_ids.empty()) throw ConfigError("gold file has no columns for any task");

    for (const auto& task_id : task_ids) {
      const auto& task = suite.task(task_id);
      auto panel = gold.panel(task_id);
      if (panel.empty()) throw ConfigError("gold file has no columns for task '" + task_id + "'");
      std::vector<LabelVector> model_vectors;
      std::vector<const Prediction*> covering;
      for (const auto& p : preds) {
        const bool covers = std::any_of(p.records.begin(), p.records.end(), [&](const auto& r) {
          return r.label_for(task_id) != nullptr;
        });
        if (!covers) continue;
        model_vectors.push_back(label_vector(p.records, task_id, p.name, gold.instance_ids));
        covering.push_back(&p);
      }

      EvalTable t;
      t.task_id = task_id;
      if (opts.exclude_not_applicable) {
        if (const auto na = not_applicable_of(suite, task)) {
          std::vector<LabelVector*> all;
          for (auto& v : panel) all.push_back(&v);
          for (auto& v : model_vectors) all.push_back(&v);
          drop_not_applicable(all, *na);
          t.notes.push_back("instances labelled '" + *na + "' by any annotator are excluded");
        }
      }
      t.n_instances = panel.front().labels.size();
      if (t.n_instances == 0) throw PreconditionError("no instances left to evaluate");

      if (auto humans = human_rows(panel); !humans.empty()) t.blocks.push_back(std::move(humans));
      std::vector<EvalRow> models;
      for (std::size_t i = 0; i < model_vectors.size(); ++i) {
        EvalRow row{report_against_panel(model_vectors[i], panel)};
        const auto& run = covering[i]->run;
        if (run.is_object()) {
          row.tasks = run.value("task_numbers", row.tasks);
          row.description = run.value("description_level", row.description);
          row.n_examples = std::to_string(run.value("n_examples", std::size_t{0}));
        }
        models.push_back(std::move(row));
      }
      if (!models.empty()) t.blocks.push_back(std::move(models));
      tables.push_back(std::move(t));
    }
  }

  std::string text;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i) text += '\n';
    text += render_eval_table(tables[i]);
  }
  out << text;
  if (out_dir) {
    write_text_file(*out_dir / "evaluation.txt", text);
    write_text_file(*out_dir / "evaluation.json", eval_tables_json(tables));
  }
  return kOk;
}

// --- sweep --------------------------------------------------------------------

int cmd_sweep(const SweepOptions& opts, std::ostream& out) {
  auto ws = open_workspace(open_config(opts.common));
  if (!ws.cfg.gold) throw ConfigError("sweep needs a gold file ('gold' in the config)");
  const auto gold = load_gold(*ws.cfg.gold, ws.suite);

  auto levels = opts.levels;
  auto counts = opts.n_examples;
  auto modes = opts.task_modes;
  auto orders = opts.orders;
  std::optional<std::string> task = opts.task;
  bool any_axis = !levels.empty() || !counts.empty() || !modes.empty() || !orders.empty();
  if (opts.grid) {
    const auto root = YAML::LoadFile(opts.grid->string());
    const auto axis = [&](const char* key, auto& target) {
      if (!root[key]) return;
      any_axis = true;
      using T = typename std::decay_t<decltype(target)>::value_type;
      const auto values = root[key].template as<std::vector<T>>();
      if (values.empty()) throw ConfigError(std::string("sweep grid axis '") + key + "' is empty");
      if (target.empty()) target = values;
    };
    axis("description_levels", levels);
    axis("n_examples", counts);
    axis("tasks", modes);
    axis("orders", orders);
    if (!task && root["task"]) task = root["task"].as<std::string>();
  }
  if (!any_axis) throw ConfigError("sweep grid is empty: give at least one axis");

  const auto eval_task = task.value_or(first_task_id(ws.suite));
  ws.suite.task(eval_task);
  const auto& base = ws.cfg.prompt;
  if (levels.empty()) levels = {std::string(to_string(base.description_level))};
  if (counts.empty()) counts = {base.n_examples};
  if (modes.empty()) modes = {to_string(base.tasks)};
  if (orders.empty()) orders = {base.order.index.value_or(0)};

  auto panel = gold.panel(eval_task);
  if (panel.empty()) throw ConfigError("gold file has no columns for task '" + eval_task + "'");

  struct Cell {
    std::string key;
    PromptSpec spec;
    PromptConfig pc;
  };
  std::vector<Cell> cells;
  std::set<std::string> seen_keys;
  std::size_t requested = 0;
  for (const auto& mode : modes) {
    for (const auto& level : levels) {
      for (const auto n : counts) {
        for (const auto o : orders) {
          ++requested;
          PromptSpec spec = base;
          spec.tasks = mode == "single" ? TaskSelection::single(eval_task) : parse_task_selection(mode);
          if (!spec.tasks.is_joint() && *spec.tasks.task_id != eval_task) {
            throw ConfigError("sweep task mode '" + mode + "' does not cover evaluated task '" +
                              eval_task + "'");
          }
          spec.description_level = parse_description_level(level);
          spec.n_examples = n;
          spec.order = OrderSpec{};
          if (n > 0) spec.order.index = o;
          Cell c;
          c.key = fmt::format("tasks={} level={} n={} order={}", to_string(spec.tasks), level, n,
                              order_label(spec.order, n));
          // Cells that resolve to the same prompt settings run once.
          if (!seen_keys.insert(c.key).second) continue;
          c.spec = spec;
          c.pc = make_prompt_config(spec, ws.cfg.seed);
          cells.push_back(std::move(c));
        }
      }
    }
  }

  const auto dir = ws.cfg.output_dir;
  fs::remove(dir / "run_log.jsonl");
  RunLog log(dir / "run_log.jsonl");
  std::vector<SweepRow> rows;
  std::vector<ItemError> all_errors;
  std::size_t calls = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto run_id = fmt::format("cell-{:02d}", i);
    std::optional<fs::path> dump;
    if (opts.common.dump_prompts) {
      dump = opts.common.dump_dir.value_or(dir / "cells") / (run_id + ".prompts.jsonl");
    }
    const auto pass = annotate_pass(*ws.gateway, ws.suite, ws.examples, ws.instances, c.pc,
                                    run_id, &log, dump);
    calls += pass.network_calls;
    write_text_file(dir / "cells" / (run_id + ".annotations.jsonl"),
                    annotations_to_jsonl(pass.records));
    SweepRow row;
    row.cell = c.key;
    row.tasks = task_numbers(ws.suite, c.spec.tasks);
    row.description = std::string(to_string(c.spec.description_level));
    row.n_examples = c.spec.n_examples;
    row.order = order_label(c.spec.order, c.spec.n_examples);
    row.fallbacks = count_fallbacks(pass.records);
    row.errors = pass.errors.size();
    row.estimated_prompt_tokens = pass.estimated_prompt_tokens;
    row.scores.annotator_id = run_id;
    row.scores.task_id = eval_task;
    if (pass.errors.empty()) {
      const auto v = label_vector(pass.records, eval_task, run_id, gold.instance_ids);
      row.scores = report_against_panel(v, panel);
    } else {
      row.scores.kappa = row.scores.raw = row.scores.f1 = std::nan("");
      all_errors.insert(all_errors.end(), pass.errors.begin(), pass.errors.end());
    }
    rows.push_back(std::move(row));
  }

  const auto sorted = sort_sweep(std::move(rows));
  const auto text = render_sweep(eval_task, sorted);
  out << text;
  out << fmt::format("{} cells requested, {} unique, {} network calls\n", requested, cells.size(),
                     calls);
  write_text_file(dir / "sweep.txt", text);
  write_text_file(dir / "sweep.json", sweep_json(eval_task, sorted));
  write_text_file(dir / "errors.json", errors_json(all_errors).dump(2) + '\n');
  return exit_code_for(all_errors, all_errors.empty() ? 0 : cells.size() * ws.instances.size());
}

// --- ensemble -----------------------------------------------------------------

int cmd_ensemble(const EnsembleOptions& opts, std::ostream& out) {
  textcoder::EnsembleOptions eo;
  eo.want_std = opts.want_std;
  eo.reference_mean = opts.reference_mean;

  EnsembleReport report;
  std::optional<fs::path> dir = opts.common.out;
  int code = kOk;

  if (opts.scores) {
    auto rows = load_scores(*opts.scores, opts.task.value_or(""));
    std::optional<MetricReport> majority;
    std::erase_if(rows, [&](const MetricReport& r) {
      if (text::ascii_lower(r.annotator_id) != "majority") return false;
      majority = r;
      return true;
    });
    if (opts.want_std && rows.size() < 2) {
      throw PreconditionError("standard deviation needs at least two runs, got " +
                              std::to_string(rows.size()));
    }
    report.task_id = opts.task.value_or("precomputed");
    for (const auto& r : rows) report.order_labels.push_back(r.annotator_id);
    report.summary = summarize_scores(rows, eo, majority);
  } else {
    auto ws = open_workspace(open_config(opts.common));
    if (!dir) dir = ws.cfg.output_dir;
    if (!ws.cfg.gold) throw ConfigError("ensemble needs a gold file ('gold' in the config)");
    if (opts.orders == 0) throw ConfigError("--orders must be at least 1");
    if (opts.want_std && opts.orders < 2) {
      throw PreconditionError("standard deviation needs at least two runs, got " +
                              std::to_string(opts.orders));
    }
    const auto gold = load_gold(*ws.cfg.gold, ws.suite);
    const auto task_id = opts.task.value_or(first_task_id(ws.suite));
    const auto panel = gold.panel(task_id);
    if (panel.empty()) throw ConfigError("gold file has no columns for task '" + task_id + "'");

    fs::remove(*dir / "run_log.jsonl");
    RunLog log(*dir / "run_log.jsonl");
    RunSet runs;
    runs.seed = ws.cfg.seed;
    std::vector<ItemError> errors;
    for (std::size_t k = 0; k < opts.orders; ++k) {
      PromptSpec spec = ws.cfg.prompt;
      spec.order = OrderSpec{};
      spec.order.index = k;
      const auto pc = make_prompt_config(spec, ws.cfg.seed);
      const auto run_id = fmt::format("order-{}", k);
      std::optional<fs::path> dump;
      if (opts.common.dump_prompts) {
        dump = opts.common.dump_dir.value_or(*dir) / (run_id + ".prompts.jsonl");
      }
      auto pass = annotate_pass(*ws.gateway, ws.suite, ws.examples, ws.instances, pc, run_id,
                                &log, dump);
      write_text_file(*dir / (run_id + ".annotations.jsonl"), annotations_to_jsonl(pass.records));
      errors.insert(errors.end(), pass.errors.begin(), pass.errors.end());
      runs.runs.push_back(OrderRun{std::to_string(k), pc.example_order.permutation,
                                   std::move(pass.records)});
    }
    write_text_file(*dir / "errors.json", errors_json(errors).dump(2) + '\n');
    if (!errors.empty()) {
      out << fmt::format("{} requests failed; no summary written\n", errors.size());
      return exit_code_for(errors, opts.orders * ws.instances.size());
    }
    report.task_id = task_id;
    for (const auto& r : runs.runs) report.order_labels.push_back(r.order_id);
    report.summary = summarize_runs(runs, ws.suite, task_id, panel, eo);
    write_text_file(*dir / "majority.annotations.jsonl",
                    annotations_to_jsonl(majority_records(runs, ws.suite).records));
  }

  const auto text = render_ensemble(report);
  out << text;
  if (dir) {
    write_text_file(*dir / "ensemble.txt", text);
    write_text_file(*dir / "ensemble.json", ensemble_json(report));
  }
  return code;
}

// --- budget -------------------------------------------------------------------

int cmd_budget(const BudgetOptions& opts, std::ostream& out) {
  std::optional<RunConfig> cfg;
  if (opts.common.config) cfg = open_config(opts.common);
  const auto pricing_path = opts.pricing ? opts.pricing : (cfg ? cfg->pricing : std::nullopt);
  std::optional<PricingTable> table;
  if (pricing_path) {
    table = load_pricing(*pricing_path);
  } else if (cfg && cfg->endpoint.pricing) {
    table = PricingTable{{cfg->endpoint.model_name, *cfg->endpoint.pricing}};
  }
  const double cpt = cfg ? cfg->prompt.chars_per_token : 4.0;

  BudgetReport r;
  r.model = opts.model.value_or(cfg ? cfg->endpoint.model_name : "");

  if (opts.run_log) {
    if (!table) throw ConfigError("a run log was given but no pricing (--pricing or endpoint.pricing)");
    const auto records = RunLog::read(*opts.run_log);
    std::vector<double> costs;
    std::set<std::string> models;
    std::optional<std::time_t> first;
    std::optional<std::time_t> last;
    double last_latency = 0.0;
    for (const auto& rec : records) {
      if (rec.cache_hit) continue;
      const auto model = opts.model.value_or(rec.model);
      const auto& cm = pricing_for(*table, model);
      models.insert(model);
      std::size_t pt = 0;
      std::size_t ct = 0;
      if (rec.usage) {
        pt = rec.usage->prompt_tokens;
        ct = rec.usage->completion_tokens;
      } else {
        pt = static_cast<std::size_t>(std::ceil(static_cast<double>(rec.prompt_chars) / cpt));
        ct = estimate_tokens(rec.response_text, cpt);
        ++r.estimated_requests;
      }
      r.prompt_tokens += pt;
      r.completion_tokens += ct;
      costs.push_back(request_cost(pt, ct, cm));
      r.pricing = cm;
      if (const auto t = parse_utc(rec.timestamp)) {
        if (!first || *t < *first) first = *t;
        if (!last || *t >= *last) {
          last = *t;
          last_latency = rec.latency_s;
        }
      }
    }
    r.requests = costs.size();
    if (!costs.empty()) r.actual = corpus_cost(costs);
    if (!models.empty()) r.model = text::join({models.begin(), models.end()}, ",");
    if (first && last) {
      r.machine_minutes = (static_cast<double>(*last - *first) + last_latency) / 60.0;
    }
    if (r.actual && opts.project_instances) {
      r.projected_instances = opts.project_instances;
      r.projected_total = r.actual->mean * static_cast<double>(*opts.project_instances);
    }
  } else if (cfg && table) {
    // Pre-run estimate from rendered prompts; completions at their token cap.
    const auto& cm = pricing_for(*table, r.model);
    r.pricing = cm;
    const auto suite = load_task_suite_file(cfg->task_suite);
    const auto instances = load_instances(cfg->instances);
    std::vector<FewShotExample> examples;
    if (!cfg->examples.empty() && fs::exists(cfg->examples)) {
      examples = validate_examples(suite, load_examples(cfg->examples));
    }
    const auto pc = make_prompt_config(cfg->prompt, cfg->seed);
    std::vector<double> costs;
    for (const auto& inst : instances) {
      const auto p = build_prompt(pc, suite, examples, inst);
      costs.push_back(request_cost(p.stats.estimated_tokens, cfg->endpoint.max_output_tokens, cm));
      r.prompt_tokens += p.stats.estimated_tokens;
      r.completion_tokens += cfg->endpoint.max_output_tokens;
    }
    if (!costs.empty()) {
      const auto cc = corpus_cost(costs);
      r.projected_instances = opts.project_instances.value_or(instances.size());
      r.projected_total = cc.mean * static_cast<double>(*r.projected_instances);
    }
  } else if (opts.model && table) {
    pricing_for(*table, *opts.model);
  }

  if (opts.machine_minutes) r.machine_minutes = opts.machine_minutes;
  if (opts.human_instances || opts.hours) {
    if (!opts.wage) throw ConfigError("the human baseline needs --wage");
    HumanBaseline h;
    h.sentences_per_hour = opts.sentences_per_hour;
    h.wage_per_hour = *opts.wage;
    h.n_coders = opts.coders;
    h.currency = opts.currency;
    const auto n = opts.human_instances.value_or(r.projected_instances.value_or(r.requests));
    r.human = h;
    r.human_instances = n;
    r.human_cost = human_cost(n, h, opts.hours);
    if (r.machine_minutes && *r.machine_minutes > 0) {
      r.speedup = speedup(r.human_cost->hours * 60.0, *r.machine_minutes);
    }
  }

  const auto text = render_budget(r);
  out << text;
  const auto dir = opts.common.out ? opts.common.out : (cfg ? std::optional(cfg->output_dir)
                                                            : std::nullopt);
  if (dir) {
    write_text_file(*dir / "budget.txt", text);
    write_text_file(*dir / "budget.json", budget_json(r));
  }
  return kOk;
}

}  // namespace textcoder::cli
