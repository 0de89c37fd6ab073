#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textcoder {

enum class DescriptionLevel { kNone = 0, kShort = 1, kLong = 2 };

std::string_view to_string(DescriptionLevel level);
// Accepts "none", "short", "long"; throws ConfigError otherwise.
DescriptionLevel parse_description_level(std::string_view s);

struct LabelDef {
  std::string id;  // canonical lowercase token, e.g. "passive"
  std::vector<std::string> aliases;
  std::optional<std::string> description_short;
  std::optional<std::string> description_long;

  bool operator==(const LabelDef&) const = default;
};

struct CodingTask {
  std::string id;
  std::string name;
  std::vector<LabelDef> labels;
  std::string default_label;
  std::vector<DescriptionLevel> description_levels;
  // Label this task takes when the gate fires. Defaults to the gate's own
  // label id when the suite is loaded.
  std::optional<std::string> not_applicable;

  const LabelDef* find_label(std::string_view id) const;
  bool has_label(std::string_view id) const { return find_label(id) != nullptr; }
  bool offers(DescriptionLevel level) const;

  bool operator==(const CodingTask&) const = default;
};

// When the first task's label equals `label_id`, every downstream task is
// forced to its not-applicable label.
struct Gate {
  std::string task_id;
  std::string label_id;

  bool operator==(const Gate&) const = default;
};

struct LabelResolution {
  std::string id;
  bool fallback = false;

  bool operator==(const LabelResolution&) const = default;
};

// Which task(s) one prompt asks for: one task id, or all tasks jointly.
struct TaskSelection {
  std::optional<std::string> task_id;

  static TaskSelection joint() { return {}; }
  static TaskSelection single(std::string id) { return {std::move(id)}; }
  bool is_joint() const { return !task_id.has_value(); }
  bool operator==(const TaskSelection&) const = default;
};

// Validated, immutable set of coding tasks. Construction enforces every
// invariant and throws SchemaError naming the offending item.
class TaskSuite {
 public:
  TaskSuite(std::vector<CodingTask> tasks, std::optional<Gate> gate);

  const std::vector<CodingTask>& tasks() const noexcept { return tasks_; }
  const std::optional<Gate>& gate() const noexcept { return gate_; }
  std::size_t size() const noexcept { return tasks_.size(); }

  const CodingTask& task(std::string_view id) const;
  std::optional<std::size_t> task_index(std::string_view id) const;

  // True when the suite has a gate and `first_task_label` is its trigger.
  bool triggers_gate(std::string_view first_task_label) const;
  // Label task `index` takes under the gate. Index 0 returns the trigger.
  const std::string& gated_label(std::size_t index) const;

  bool operator==(const TaskSuite&) const = default;

 private:
  std::vector<CodingTask> tasks_;
  std::optional<Gate> gate_;
};

TaskSuite load_task_suite(std::string_view config_text);
TaskSuite load_task_suite_file(const std::filesystem::path& path);
std::string serialize_task_suite(const TaskSuite& suite);

// `labels` holds one id per task, or just the gating task's id. When the gate
// fires the result is the full gated vector; otherwise the input comes back
// unchanged. Unknown ids throw PreconditionError.
std::vector<std::string> apply_gate(const TaskSuite& suite,
                                    const std::vector<std::string>& labels);

// Case-insensitive, whitespace-trimmed match against ids, then aliases.
// Anything else maps to the task's default label with `fallback` set.
LabelResolution resolve_label(const CodingTask& task, std::string_view surface);

}  // namespace textcoder
