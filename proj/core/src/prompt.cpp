#include "textcoder/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "textcoder/seed.hpp"
#include "textcoder/text.hpp"

namespace textcoder {

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kInstruction:
      return "instruction";
    case SegmentKind::kCodebook:
      return "codebook";
    case SegmentKind::kExamples:
      return "examples";
    case SegmentKind::kTarget:
      return "target";
  }
  return "unknown";
}

const Segment* Prompt::segment(SegmentKind kind) const {
  for (const auto& s : segments) {
    if (s.kind == kind) return &s;
  }
  return nullptr;
}

std::vector<FewShotExample> validate_examples(const TaskSuite& suite,
                                              std::vector<FewShotExample> examples) {
  const auto& tasks = suite.tasks();
  std::set<std::string> ids;
  for (auto& ex : examples) {
    if (!ids.insert(ex.instance_id).second) {
      throw SchemaError("duplicate few-shot example id '" + ex.instance_id + "'");
    }
    if (ex.labels.empty() || ex.labels.size() > tasks.size()) {
      throw SchemaError("example '" + ex.instance_id + "' has " +
                        std::to_string(ex.labels.size()) + " labels for " +
                        std::to_string(tasks.size()) + " tasks");
    }
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
      const auto r = resolve_label(tasks[i], ex.labels[i]);
      if (r.fallback) {
        throw SchemaError("example '" + ex.instance_id + "': unknown label '" + ex.labels[i] +
                          "' for task '" + tasks[i].id + "'");
      }
      ex.labels[i] = r.id;
    }
    if (ex.labels.size() < tasks.size() &&
        !(ex.labels.size() == 1 && suite.triggers_gate(ex.labels.front()))) {
      throw SchemaError("example '" + ex.instance_id + "' is missing labels and is not gated");
    }
    ex.labels = apply_gate(suite, ex.labels);
  }
  return examples;
}

DescriptionLevel effective_level(const CodingTask& task, DescriptionLevel requested) {
  for (int lv = static_cast<int>(requested); lv > 0; --lv) {
    if (task.offers(static_cast<DescriptionLevel>(lv))) return static_cast<DescriptionLevel>(lv);
  }
  return DescriptionLevel::kNone;
}

namespace {

void render_labels(std::string& out, const CodingTask& task, DescriptionLevel level) {
  for (const auto& l : task.labels) {
    out += "- ";
    out += l.id;
    const std::optional<std::string>* desc = nullptr;
    if (level == DescriptionLevel::kShort) desc = &l.description_short;
    if (level == DescriptionLevel::kLong) desc = &l.description_long;
    if (desc && desc->has_value()) {
      out += ": ";
      out += **desc;
    }
    out += '\n';
  }
}

std::vector<std::size_t> resolve_order(const ExampleOrder& order, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (order.seed) {
    SeededRng rng(*order.seed);
    rng.shuffle(perm);
    return perm;
  }
  if (order.permutation.empty()) return perm;
  validate_permutation(order.permutation, n);
  return order.permutation;
}

}  // namespace

Prompt build_prompt(const PromptConfig& cfg, const TaskSuite& suite,
                    std::span<const FewShotExample> examples, std::string_view target_text) {
  std::vector<std::size_t> selected_tasks;
  if (cfg.tasks.is_joint()) {
    bool any = false;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      selected_tasks.push_back(i);
      any = any || suite.tasks()[i].offers(cfg.description_level);
    }
    if (!any) {
      throw PreconditionError("no task offers " + std::string(to_string(cfg.description_level)) +
                              " descriptions");
    }
  } else {
    const auto idx = suite.task_index(*cfg.tasks.task_id);
    if (!idx) throw PreconditionError("unknown task '" + *cfg.tasks.task_id + "'");
    if (!suite.tasks()[*idx].offers(cfg.description_level)) {
      throw PreconditionError("task '" + *cfg.tasks.task_id + "' does not offer " +
                              std::string(to_string(cfg.description_level)) + " descriptions");
    }
    selected_tasks.push_back(*idx);
  }
  if (cfg.n_examples > examples.size()) {
    throw PreconditionError("n_examples " + std::to_string(cfg.n_examples) +
                            " exceeds the pool of " + std::to_string(examples.size()));
  }

  Prompt p;
  auto mark = [&p](SegmentKind kind, std::size_t begin) {
    if (p.text.size() > begin) p.segments.push_back({kind, begin, p.text.size()});
  };

  std::size_t begin = 0;
  std::string instruction(cfg.instruction_text);
  while (!instruction.empty() && (instruction.back() == '\n' || instruction.back() == '\r')) {
    instruction.pop_back();
  }
  p.text += instruction;
  p.text += '\n';
  mark(SegmentKind::kInstruction, begin);

  begin = p.text.size();
  for (const auto ti : selected_tasks) {
    const auto& task = suite.tasks()[ti];
    if (cfg.tasks.is_joint()) p.text += task.name + ":\n";
    render_labels(p.text, task, effective_level(task, cfg.description_level));
  }
  p.text += '\n';
  mark(SegmentKind::kCodebook, begin);

  begin = p.text.size();
  const auto perm = resolve_order(cfg.example_order, cfg.n_examples);
  std::vector<std::set<std::string>> seen(suite.size());
  for (const auto i : perm) {
    const auto& ex = examples[i];
    p.text += "Text: ";
    p.text += ex.text;
    p.text += "\nLabel: ";
    if (cfg.tasks.is_joint()) {
      if (suite.triggers_gate(ex.labels.front())) {
        p.text += ex.labels.front();
      } else {
        p.text += text::join(ex.labels, ", ");
      }
    } else {
      p.text += ex.labels.at(selected_tasks.front());
    }
    p.text += "\n\n";
    for (std::size_t t = 0; t < ex.labels.size() && t < seen.size(); ++t) {
      seen[t].insert(ex.labels[t]);
    }
  }
  mark(SegmentKind::kExamples, begin);

  begin = p.text.size();
  p.text += "Text: ";
  p.text += target_text;
  p.text += "\nLabel:";
  mark(SegmentKind::kTarget, begin);

  if (cfg.n_examples > 0) {
    for (const auto ti : selected_tasks) {
      for (const auto& l : suite.tasks()[ti].labels) {
        if (!seen[ti].count(l.id)) {
          p.warnings.push_back("no example covers label '" + l.id + "' of task '" +
                               suite.tasks()[ti].id + "'");
        }
      }
    }
  }

  p.stats.words = text::split_ws(p.text).size();
  p.stats.characters = text::codepoint_count(p.text);
  p.stats.estimated_tokens = estimate_tokens(p.text, cfg.chars_per_token);
  return p;
}

void validate_permutation(std::span<const std::size_t> order, std::size_t n) {
  if (order.size() != n) {
    throw PreconditionError("permutation has " + std::to_string(order.size()) +
                            " entries for " + std::to_string(n) + " items");
  }
  std::vector<bool> hit(n, false);
  for (const auto i : order) {
    if (i >= n || hit[i]) throw PreconditionError("malformed permutation");
    hit[i] = true;
  }
}

namespace {

// n! saturating at `cap`.
std::size_t factorial_capped(std::size_t n, std::size_t cap) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    if (f > cap / i) return cap;
    f *= i;
  }
  return f;
}

}  // namespace

std::vector<std::vector<std::size_t>> enumerate_orders(std::size_t n_items, std::size_t k_orders,
                                                       std::uint64_t seed) {
  if (k_orders == 0) throw PreconditionError("k_orders must be at least 1");
  constexpr std::size_t kCap = 1'000'000;
  const auto total = factorial_capped(n_items, kCap);
  if (total < kCap && k_orders > total) {
    throw PreconditionError(std::to_string(k_orders) + " orders requested but " +
                            std::to_string(n_items) + " items only have " + std::to_string(total));
  }
  std::vector<std::size_t> identity(n_items);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out{identity};
  SeededRng rng(seed);

  if (total <= 5040) {
    // Small n: sample without replacement from the full enumeration.
    std::vector<std::vector<std::size_t>> all;
    auto perm = identity;
    while (std::next_permutation(perm.begin(), perm.end())) all.push_back(perm);
    rng.shuffle(all);
    for (std::size_t i = 0; out.size() < k_orders; ++i) out.push_back(all[i]);
    return out;
  }
  std::set<std::vector<std::size_t>> seen{identity};
  while (out.size() < k_orders) {
    auto perm = identity;
    rng.shuffle(perm);
    if (seen.insert(perm).second) out.push_back(std::move(perm));
  }
  return out;
}

std::size_t estimate_tokens(std::string_view text, double chars_per_token) {
  if (!(chars_per_token > 0.0)) throw PreconditionError("chars_per_token must be positive");
  const auto chars = static_cast<double>(text::codepoint_count(text));
  return static_cast<std::size_t>(std::ceil(chars / chars_per_token));
}

}  // namespace textcoder
