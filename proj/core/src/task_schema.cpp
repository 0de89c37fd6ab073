#include "textcoder/task_schema.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "textcoder/error.hpp"
#include "textcoder/text.hpp"

namespace textcoder {

std::string_view to_string(DescriptionLevel level) {
  switch (level) {
    case DescriptionLevel::kNone:
      return "none";
    case DescriptionLevel::kShort:
      return "short";
    case DescriptionLevel::kLong:
      return "long";
  }
  return "none";
}

DescriptionLevel parse_description_level(std::string_view s) {
  const auto v = text::ascii_lower(text::trim(s));
  if (v == "none") return DescriptionLevel::kNone;
  if (v == "short") return DescriptionLevel::kShort;
  if (v == "long") return DescriptionLevel::kLong;
  throw ConfigError("unknown description level '" + std::string(s) +
                    "' (expected none, short or long)");
}

const LabelDef* CodingTask::find_label(std::string_view id) const {
  for (const auto& l : labels) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

bool CodingTask::offers(DescriptionLevel level) const {
  for (const auto l : description_levels) {
    if (l == level) return true;
  }
  return false;
}

namespace {

bool has_forbidden_chars(std::string_view s) {
  return s.find_first_of(",\n\r") != std::string_view::npos;
}

void validate_task(const CodingTask& task) {
  if (task.id.empty()) throw SchemaError("task with empty id");
  if (task.labels.size() < 2) {
    throw SchemaError("task '" + task.id + "' needs at least two labels");
  }
  // Every id and alias, folded, must be unique within the task.
  std::map<std::string, std::string> seen;
  auto claim = [&](const std::string& surface, const std::string& owner) {
    const auto key = text::to_lower(text::trim(surface));
    if (key.empty()) {
      throw SchemaError("task '" + task.id + "': empty alias on label '" + owner + "'");
    }
    const auto [it, inserted] = seen.emplace(key, owner);
    if (!inserted) {
      throw SchemaError("task '" + task.id + "': label collision on '" + surface +
                        "' (used by '" + it->second + "' and '" + owner + "')");
    }
  };
  for (const auto& l : task.labels) {
    if (l.id.empty()) throw SchemaError("task '" + task.id + "' has a label with empty id");
    if (text::to_lower(l.id) != l.id || has_forbidden_chars(l.id) ||
        text::trim(l.id) != l.id) {
      throw SchemaError("task '" + task.id + "': label id '" + l.id +
                        "' must be lowercase, trimmed, and free of commas/newlines");
    }
    claim(l.id, l.id);
    for (const auto& a : l.aliases) {
      if (has_forbidden_chars(a)) {
        throw SchemaError("task '" + task.id + "': alias '" + a +
                          "' must not contain commas or newlines");
      }
      claim(a, l.id);
    }
  }
  if (!task.has_label(task.default_label)) {
    throw SchemaError("task '" + task.id + "': default label '" + task.default_label +
                      "' is not one of its labels");
  }
  for (const auto level : task.description_levels) {
    for (const auto& l : task.labels) {
      const bool present = level == DescriptionLevel::kShort  ? l.description_short.has_value()
                           : level == DescriptionLevel::kLong ? l.description_long.has_value()
                                                              : true;
      if (!present) {
        throw SchemaError("task '" + task.id + "' offers " + std::string(to_string(level)) +
                          " descriptions but label '" + l.id + "' has none");
      }
    }
  }
}

}  // namespace

TaskSuite::TaskSuite(std::vector<CodingTask> tasks, std::optional<Gate> gate)
    : tasks_(std::move(tasks)), gate_(std::move(gate)) {
  if (tasks_.empty()) throw SchemaError("task suite has no tasks");
  std::set<std::string> ids;
  for (const auto& t : tasks_) {
    validate_task(t);
    if (!ids.insert(t.id).second) throw SchemaError("duplicate task id '" + t.id + "'");
  }
  if (!gate_) return;
  if (!ids.count(gate_->task_id)) {
    throw SchemaError("gate references unknown task '" + gate_->task_id + "'");
  }
  if (tasks_.front().id != gate_->task_id) {
    throw SchemaError("gating task '" + gate_->task_id + "' must be the first task");
  }
  if (!tasks_.front().has_label(gate_->label_id)) {
    throw SchemaError("gate references unknown label '" + gate_->label_id + "' of task '" +
                      gate_->task_id + "'");
  }
  for (std::size_t i = 1; i < tasks_.size(); ++i) {
    auto& t = tasks_[i];
    if (!t.not_applicable) t.not_applicable = gate_->label_id;
    if (!t.has_label(*t.not_applicable)) {
      throw SchemaError("task '" + t.id + "' lacks the not-applicable label '" +
                        *t.not_applicable + "' required by the gate");
    }
  }
}

const CodingTask& TaskSuite::task(std::string_view id) const {
  if (const auto i = task_index(id)) return tasks_[*i];
  throw PreconditionError("unknown task '" + std::string(id) + "'");
}

std::optional<std::size_t> TaskSuite::task_index(std::string_view id) const {
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (tasks_[i].id == id) return i;
  }
  return std::nullopt;
}

bool TaskSuite::triggers_gate(std::string_view first_task_label) const {
  return gate_ && gate_->label_id == first_task_label;
}

const std::string& TaskSuite::gated_label(std::size_t index) const {
  if (!gate_) throw PreconditionError("suite has no gate");
  if (index == 0) return gate_->label_id;
  return *tasks_.at(index).not_applicable;
}

// --- config I/O -------------------------------------------------------------

namespace {

std::optional<std::string> optional_string(const YAML::Node& n, const char* key) {
  if (const auto v = n[key]; v && !v.IsNull()) return v.as<std::string>();
  return std::nullopt;
}

std::string required_string(const YAML::Node& n, const char* key, const std::string& where) {
  const auto v = n[key];
  if (!v || v.IsNull()) throw SchemaError(where + ": missing '" + key + "'");
  return v.as<std::string>();
}

CodingTask parse_task(const YAML::Node& node, std::size_t index) {
  CodingTask t;
  const std::string where = "task #" + std::to_string(index + 1);
  t.id = required_string(node, "id", where);
  t.name = optional_string(node, "name").value_or(t.id);
  const auto labels = node["labels"];
  if (!labels || !labels.IsSequence()) throw SchemaError("task '" + t.id + "': missing labels");
  for (const auto& ln : labels) {
    LabelDef l;
    if (ln.IsScalar()) {
      l.id = ln.as<std::string>();
    } else {
      l.id = required_string(ln, "id", "task '" + t.id + "' label");
      if (const auto a = ln["aliases"]) {
        for (const auto& alias : a) l.aliases.push_back(alias.as<std::string>());
      }
      l.description_short = optional_string(ln, "description_short");
      l.description_long = optional_string(ln, "description_long");
    }
    t.labels.push_back(std::move(l));
  }
  t.default_label = required_string(node, "default_label", "task '" + t.id + "'");
  t.not_applicable = optional_string(node, "not_applicable");
  if (const auto levels = node["description_levels"]) {
    for (const auto& lv : levels) {
      t.description_levels.push_back(parse_description_level(lv.as<std::string>()));
    }
  } else {
    t.description_levels.push_back(DescriptionLevel::kNone);
    bool all_short = true;
    bool all_long = true;
    for (const auto& l : t.labels) {
      all_short = all_short && l.description_short.has_value();
      all_long = all_long && l.description_long.has_value();
    }
    if (all_short) t.description_levels.push_back(DescriptionLevel::kShort);
    if (all_long) t.description_levels.push_back(DescriptionLevel::kLong);
  }
  return t;
}

}  // namespace

TaskSuite load_task_suite(std::string_view config_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(config_text));
  } catch (const YAML::Exception& e) {
    throw SchemaError(std::string("task suite does not parse: ") + e.what());
  }
  try {
    const auto tasks_node = root["tasks"];
    if (!tasks_node || !tasks_node.IsSequence() || tasks_node.size() == 0) {
      throw SchemaError("task suite needs a non-empty 'tasks' list");
    }
    std::vector<CodingTask> tasks;
    for (std::size_t i = 0; i < tasks_node.size(); ++i) {
      tasks.push_back(parse_task(tasks_node[i], i));
    }
    std::optional<Gate> gate;
    if (const auto g = root["gate"]; g && !g.IsNull()) {
      gate = Gate{required_string(g, "task", "gate"), required_string(g, "label", "gate")};
    }
    return TaskSuite(std::move(tasks), std::move(gate));
  } catch (const YAML::Exception& e) {
    throw SchemaError(std::string("task suite is malformed: ") + e.what());
  }
}

TaskSuite load_task_suite_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open task suite '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_task_suite(ss.str());
}

std::string serialize_task_suite(const TaskSuite& suite) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "tasks" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : suite.tasks()) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << t.id;
    out << YAML::Key << "name" << YAML::Value << t.name;
    out << YAML::Key << "default_label" << YAML::Value << t.default_label;
    if (t.not_applicable) {
      out << YAML::Key << "not_applicable" << YAML::Value << *t.not_applicable;
    }
    out << YAML::Key << "description_levels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto lv : t.description_levels) out << std::string(to_string(lv));
    out << YAML::EndSeq;
    out << YAML::Key << "labels" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : t.labels) {
      out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << l.id;
      if (!l.aliases.empty()) {
        out << YAML::Key << "aliases" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& a : l.aliases) out << YAML::DoubleQuoted << a;
        out << YAML::EndSeq;
      }
      if (l.description_short) {
        out << YAML::Key << "description_short" << YAML::Value << YAML::DoubleQuoted
            << *l.description_short;
      }
      if (l.description_long) {
        out << YAML::Key << "description_long" << YAML::Value << YAML::DoubleQuoted
            << *l.description_long;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;
  if (const auto& g = suite.gate()) {
    out << YAML::Key << "gate" << YAML::Value << YAML::BeginMap << YAML::Key << "task"
        << YAML::Value << g->task_id << YAML::Key << "label" << YAML::Value << g->label_id
        << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// --- gating and label resolution ---------------------------------------------

std::vector<std::string> apply_gate(const TaskSuite& suite,
                                    const std::vector<std::string>& labels) {
  const auto& tasks = suite.tasks();
  const bool gating_only = labels.size() == 1 && tasks.size() > 1 && suite.gate();
  if (labels.size() != tasks.size() && !gating_only) {
    throw PreconditionError("apply_gate expects " + std::to_string(tasks.size()) +
                            " labels, got " + std::to_string(labels.size()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!tasks[i].has_label(labels[i])) {
      throw PreconditionError("unknown label '" + labels[i] + "' for task '" + tasks[i].id + "'");
    }
  }
  if (labels.empty() || !suite.triggers_gate(labels.front())) return labels;
  std::vector<std::string> out;
  out.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) out.push_back(suite.gated_label(i));
  return out;
}

LabelResolution resolve_label(const CodingTask& task, std::string_view surface) {
  const auto key = text::to_lower(text::trim(surface));
  for (const auto& l : task.labels) {
    if (l.id == key) return {l.id, false};
  }
  for (const auto& l : task.labels) {
    for (const auto& a : l.aliases) {
      if (text::to_lower(text::trim(a)) == key) return {l.id, false};
    }
  }
  return {task.default_label, true};
}

}  // namespace textcoder
