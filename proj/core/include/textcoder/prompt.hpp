#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textcoder/corpus.hpp"
#include "textcoder/error.hpp"
#include "textcoder/task_schema.hpp"

namespace textcoder {

inline constexpr std::string_view kDefaultInstruction =
    "Label the Swedish text according to how it describes the role of the father in the "
    "family. Possible labels are:";

struct FewShotExample {
  std::string instance_id;
  std::string text;
  std::vector<std::string> labels;  // one per task, gate already applied

  bool operator==(const FewShotExample&) const = default;
};

// Resolves example labels strictly against the suite (no fallback) and
// expands gated examples to full vectors. Throws SchemaError on any label
// that is not an exact id or alias.
std::vector<FewShotExample> validate_examples(const TaskSuite& suite,
                                              std::vector<FewShotExample> examples);

struct ExampleOrder {
  std::vector<std::size_t> permutation;  // empty: authored order
  std::optional<std::uint64_t> seed;     // set: seeded shuffle, overrides permutation

  bool operator==(const ExampleOrder&) const = default;
};

struct PromptConfig {
  TaskSelection tasks;
  DescriptionLevel description_level = DescriptionLevel::kNone;
  std::size_t n_examples = 0;
  ExampleOrder example_order;
  std::string instruction_text{kDefaultInstruction};
  double chars_per_token = 4.0;

  bool operator==(const PromptConfig&) const = default;
};

enum class SegmentKind { kInstruction, kCodebook, kExamples, kTarget };
std::string_view to_string(SegmentKind kind);

struct Segment {
  SegmentKind kind;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct PromptStats {
  std::size_t words = 0;
  std::size_t characters = 0;  // code points
  std::size_t estimated_tokens = 0;
};

struct Prompt {
  std::string text;
  std::vector<Segment> segments;  // non-empty segments, in order, tiling text
  PromptStats stats;
  std::vector<std::string> warnings;

  const Segment* segment(SegmentKind kind) const;
  std::string_view slice(const Segment& s) const {
    return std::string_view(text).substr(s.begin, s.end - s.begin);
  }
};

// Level a task renders at: the requested one when offered, else the richest
// offered level below it.
DescriptionLevel effective_level(const CodingTask& task, DescriptionLevel requested);

// Layout:
//   <instruction>\n
//   [<task name>:\n]  (joint only, once per task)
//   - <label>[: <description>]\n ...
//   \n
//   Text: <example>\nLabel: <labels>\n\n ...
//   Text: <target>\nLabel:
Prompt build_prompt(const PromptConfig& cfg, const TaskSuite& suite,
                    std::span<const FewShotExample> examples, std::string_view target_text);

inline Prompt build_prompt(const PromptConfig& cfg, const TaskSuite& suite,
                           std::span<const FewShotExample> examples, const Instance& target) {
  return build_prompt(cfg, suite, examples, target.text);
}

// Throws PreconditionError unless `order` is a permutation of 0..n-1.
void validate_permutation(std::span<const std::size_t> order, std::size_t n);

template <typename T>
std::vector<T> permute_examples(std::span<const T> items, std::span<const std::size_t> order) {
  validate_permutation(order, items.size());
  std::vector<T> out;
  out.reserve(items.size());
  for (const auto i : order) out.push_back(items[i]);
  return out;
}

// k distinct permutations of n items; the first is always the identity.
std::vector<std::vector<std::size_t>> enumerate_orders(std::size_t n_items, std::size_t k_orders,
                                                       std::uint64_t seed);

std::size_t estimate_tokens(std::string_view text, double chars_per_token = 4.0);

}  // namespace textcoder
