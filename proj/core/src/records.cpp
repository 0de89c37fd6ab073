#include "textcoder/records.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "textcoder/error.hpp"
#include "textcoder/text.hpp"

namespace textcoder {
namespace {

using nlohmann::json;

template <typename F>
void for_each_json_line(std::string_view text, std::string_view what, F&& f) {
  std::size_t line_no = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      f(j);
    } catch (const json::exception& e) {
      throw ConfigError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

double parse_number(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not a number in " + std::string(what) + ": '" + s + "'");
  }
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw ConfigError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string instances_to_jsonl(std::span<const Instance> instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += json{{"id", inst.id}, {"doc_id", inst.doc_id}, {"text", inst.text}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<Instance> instances_from_jsonl(std::string_view text) {
  std::vector<Instance> out;
  std::set<std::string> seen;
  for_each_json_line(text, "instances", [&](const json& j) {
    auto id = j.at("id").get<std::string>();
    if (!seen.insert(id).second) throw ConfigError("duplicate instance id '" + id + "'");
    out.push_back(make_instance(std::move(id), j.value("doc_id", std::string{}),
                                j.at("text").get<std::string>()));
  });
  return out;
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
  return instances_from_jsonl(read_text_file(path));
}

std::vector<FewShotExample> examples_from_jsonl(std::string_view text) {
  std::vector<FewShotExample> out;
  for_each_json_line(text, "examples", [&](const json& j) {
    FewShotExample ex;
    ex.instance_id = j.value("id", std::string{});
    ex.text = j.at("text").get<std::string>();
    ex.labels = j.at("labels").get<std::vector<std::string>>();
    out.push_back(std::move(ex));
  });
  return out;
}

std::vector<FewShotExample> load_examples(const std::filesystem::path& path) {
  return examples_from_jsonl(read_text_file(path));
}

std::string annotations_to_jsonl(std::span<const AnnotationRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["instance_id"] = r.instance_id;
    j["run_id"] = r.run_id;
    j["task_ids"] = r.task_ids;
    j["labels"] = r.labels;
    j["fallback_applied"] = std::vector<bool>(r.fallback_applied.begin(), r.fallback_applied.end());
    j["extra_ignored"] = r.extra_ignored;
    j["raw_response"] = r.raw_response;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<AnnotationRecord> annotations_from_jsonl(std::string_view text) {
  std::vector<AnnotationRecord> out;
  for_each_json_line(text, "annotations", [&](const json& j) {
    AnnotationRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.run_id = j.value("run_id", std::string{});
    r.task_ids = j.at("task_ids").get<std::vector<std::string>>();
    r.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("fallback_applied")) {
      for (const auto& b : j["fallback_applied"]) r.fallback_applied.push_back(b.get<bool>());
    } else {
      r.fallback_applied.assign(r.labels.size(), false);
    }
    r.extra_ignored = j.value("extra_ignored", false);
    r.raw_response = j.value("raw_response", std::string{});
    if (r.task_ids.size() != r.labels.size() || r.fallback_applied.size() != r.labels.size()) {
      throw ConfigError("annotation for '" + r.instance_id + "' has mismatched task/label counts");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  return annotations_from_jsonl(read_text_file(path));
}

std::string annotations_to_csv(std::span<const AnnotationRecord> records,
                               std::span<const std::string> task_ids) {
  std::string out = "instance_id";
  for (const auto& t : task_ids) out += "," + csv_escape(t);
  for (const auto& t : task_ids) out += "," + csv_escape(t + "_fallback");
  out += '\n';
  for (const auto& r : records) {
    out += csv_escape(r.instance_id);
    for (const auto& t : task_ids) {
      const auto* l = r.label_for(t);
      out += ",";
      if (l) out += csv_escape(*l);
    }
    for (const auto& t : task_ids) {
      out += ",";
      for (std::size_t i = 0; i < r.task_ids.size(); ++i) {
        if (r.task_ids[i] == t) out += r.fallback_applied[i] ? "1" : "0";
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<LabelVector> GoldTable::panel(std::string_view task_id) const {
  std::vector<LabelVector> out;
  for (const auto& a : annotators) {
    const auto it = vectors.find({a, std::string(task_id)});
    if (it != vectors.end()) out.push_back(it->second);
  }
  return out;
}

GoldTable parse_gold_csv(std::string_view text, const TaskSuite& suite) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw ConfigError("gold file is empty");
  const auto& header = rows.front();
  if (header.empty() || text::ascii_lower(text::trim(header[0])) != "instance_id") {
    throw ConfigError("gold file header must start with 'instance_id'");
  }
  GoldTable g;
  struct Column {
    std::string annotator;
    const CodingTask* task;
  };
  std::vector<Column> columns;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string h(text::trim(header[c]));
    const auto colon = h.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == h.size()) {
      throw ConfigError("gold column '" + h + "' is not <annotator>:<task>");
    }
    const auto annotator = h.substr(0, colon);
    const auto task_id = h.substr(colon + 1);
    if (!suite.task_index(task_id)) {
      throw ConfigError("gold column '" + h + "' names unknown task '" + task_id + "'");
    }
    const auto& task = suite.task(task_id);
    if (g.vectors.count({annotator, task_id})) throw ConfigError("duplicate gold column '" + h + "'");
    if (std::find(g.annotators.begin(), g.annotators.end(), annotator) == g.annotators.end()) {
      g.annotators.push_back(annotator);
    }
    auto& v = g.vectors[{annotator, task_id}];
    v.annotator_id = annotator;
    v.task_id = task_id;
    columns.push_back({annotator, &task});
  }
  std::set<std::string> seen;
  std::vector<std::string> problems;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw ConfigError("gold row " + std::to_string(r + 1) + " has " +
                        std::to_string(row.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    const std::string id(text::trim(row[0]));
    if (!seen.insert(id).second) throw ConfigError("duplicate instance id '" + id + "' in gold file");
    g.instance_ids.push_back(id);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& col = columns[c];
      const auto res = resolve_label(*col.task, row[c + 1]);
      if (res.fallback) {
        problems.push_back(id + " " + col.annotator + ":" + col.task->id + "='" + row[c + 1] + "'");
      }
      auto& v = g.vectors[{col.annotator, col.task->id}];
      v.labels.push_back(res.id);
      v.instance_ids.push_back(id);
    }
  }
  if (!problems.empty()) {
    const auto n = problems.size();
    if (n > 10) problems.resize(10);
    throw SchemaError("gold file has " + std::to_string(n) + " unknown label(s): " +
                      text::join(problems, "; "));
  }
  return g;
}

GoldTable load_gold(const std::filesystem::path& path, const TaskSuite& suite) {
  return parse_gold_csv(read_text_file(path), suite);
}

std::vector<MetricReport> parse_scores_csv(std::string_view text, std::string task_id) {
  const auto rows = parse_csv(text);
  std::vector<MetricReport> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && text::ascii_lower(text::trim(row[0])) == "annotator") continue;
    if (row.size() < 4) {
      throw ConfigError("scores row " + std::to_string(r + 1) + " needs annotator,kappa,raw,f1");
    }
    MetricReport m;
    m.annotator_id = std::string(text::trim(row[0]));
    m.task_id = task_id;
    m.kappa = parse_number(std::string(text::trim(row[1])), "scores kappa");
    m.raw = parse_number(std::string(text::trim(row[2])), "scores raw");
    m.f1 = parse_number(std::string(text::trim(row[3])), "scores f1");
    m.against = "precomputed";
    out.push_back(std::move(m));
  }
  if (out.empty()) throw ConfigError("scores file has no rows");
  return out;
}

std::vector<MetricReport> load_scores(const std::filesystem::path& path, std::string task_id) {
  return parse_scores_csv(read_text_file(path), std::move(task_id));
}

}  // namespace textcoder
