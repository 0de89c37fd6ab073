#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textcoder/corpus.hpp"
#include "textcoder/label_parser.hpp"
#include "textcoder/metrics.hpp"
#include "textcoder/prompt.hpp"
#include "textcoder/task_schema.hpp"

namespace textcoder {

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// {"id", "doc_id", "text"} per line.
std::string instances_to_jsonl(std::span<const Instance> instances);
std::vector<Instance> instances_from_jsonl(std::string_view text);
std::vector<Instance> load_instances(const std::filesystem::path& path);

// {"id", "text", "labels": [...]} per line. A single-element labels array
// may hold just the gating label.
std::vector<FewShotExample> examples_from_jsonl(std::string_view text);
std::vector<FewShotExample> load_examples(const std::filesystem::path& path);

std::string annotations_to_jsonl(std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> annotations_from_jsonl(std::string_view text);
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
// instance_id, then one column per task, then a fallback column per task.
std::string annotations_to_csv(std::span<const AnnotationRecord> records,
                               std::span<const std::string> task_ids);

// Human gold labels. Header: "instance_id,<annotator>:<task>,...". Every
// cell must be an exact id or alias of its task.
struct GoldTable {
  std::vector<std::string> instance_ids;
  std::vector<std::string> annotators;  // first-seen order
  std::map<std::pair<std::string, std::string>, LabelVector> vectors;  // (annotator, task)

  std::vector<LabelVector> panel(std::string_view task_id) const;
};

GoldTable parse_gold_csv(std::string_view text, const TaskSuite& suite);
GoldTable load_gold(const std::filesystem::path& path, const TaskSuite& suite);

// Published or previously computed rows: "annotator,kappa,raw,f1".
std::vector<MetricReport> parse_scores_csv(std::string_view text, std::string task_id = "");
std::vector<MetricReport> load_scores(const std::filesystem::path& path, std::string task_id = "");

}  // namespace textcoder
