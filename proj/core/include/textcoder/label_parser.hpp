#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "textcoder/task_schema.hpp"

namespace textcoder {

struct AnnotationRecord {
  std::string instance_id;
  std::string run_id;
  std::vector<std::string> task_ids;  // parallel to labels
  std::vector<std::string> labels;
  std::vector<bool> fallback_applied;
  bool extra_ignored = false;  // joint answer had more labels than tasks
  std::string raw_response;

  bool any_fallback() const;
  // Label for `task_id`, or nullptr when this record does not cover it.
  const std::string* label_for(std::string_view task_id) const;

  bool operator==(const AnnotationRecord&) const = default;
};

// Turns a raw completion into labels. Never throws: anything unrecognised
// becomes the task's default label with its fallback flag set. Only exact
// (case-insensitive) id/alias matches count; no searching inside prose.
AnnotationRecord parse_labels(std::string_view raw, const TaskSuite& suite,
                              const TaskSelection& mode);

}  // namespace textcoder
