#include "textcoder/label_parser.hpp"

#include <algorithm>

#include "textcoder/text.hpp"

namespace textcoder {

bool AnnotationRecord::any_fallback() const {
  return std::any_of(fallback_applied.begin(), fallback_applied.end(), [](bool b) { return b; });
}

const std::string* AnnotationRecord::label_for(std::string_view task_id) const {
  for (std::size_t i = 0; i < task_ids.size() && i < labels.size(); ++i) {
    if (task_ids[i] == task_id) return &labels[i];
  }
  return nullptr;
}

namespace {

constexpr std::string_view kQuoteMarks[] = {"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98",
                                            "\xE2\x80\x99", "\xC2\xAB", "\xC2\xBB"};

bool strip_one(std::string_view& s, bool front) {
  if (s.empty()) return false;
  const char c = front ? s.front() : s.back();
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '"' || c == '\'' || c == '`' ||
      c == '.') {
    front ? s.remove_prefix(1) : s.remove_suffix(1);
    return true;
  }
  for (const auto q : kQuoteMarks) {
    if (front ? s.starts_with(q) : s.ends_with(q)) {
      front ? s.remove_prefix(q.size()) : s.remove_suffix(q.size());
      return true;
    }
  }
  return false;
}

std::string_view strip(std::string_view s) {
  while (strip_one(s, true)) {
  }
  while (strip_one(s, false)) {
  }
  return s;
}

std::string_view clean(std::string_view raw) {
  auto s = strip(raw);
  if (text::starts_with_icase(s, "label:")) s = strip(s.substr(6));
  return s;
}

}  // namespace

AnnotationRecord parse_labels(std::string_view raw, const TaskSuite& suite,
                              const TaskSelection& mode) {
  AnnotationRecord rec;
  rec.raw_response = std::string(raw);
  const auto& tasks = suite.tasks();
  const auto body = clean(raw);

  if (!mode.is_joint()) {
    const auto idx = suite.task_index(*mode.task_id);
    // An unknown task cannot produce labels; surface it as a flagged empty
    // record rather than throwing.
    if (!idx) {
      rec.task_ids = {*mode.task_id};
      rec.labels = {""};
      rec.fallback_applied = {true};
      return rec;
    }
    const auto r = resolve_label(tasks[*idx], body);
    rec.task_ids = {tasks[*idx].id};
    rec.labels = {r.id};
    rec.fallback_applied = {r.fallback};
    return rec;
  }

  std::vector<std::string> pieces;
  if (!body.empty()) {
    for (const auto& p : text::split(body, ',')) pieces.emplace_back(strip(p));
  }
  rec.extra_ignored = pieces.size() > tasks.size();
  for (const auto& t : tasks) rec.task_ids.push_back(t.id);
  rec.labels.resize(tasks.size());
  rec.fallback_applied.assign(tasks.size(), false);

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (i < pieces.size()) {
      const auto r = resolve_label(tasks[i], pieces[i]);
      rec.labels[i] = r.id;
      rec.fallback_applied[i] = r.fallback;
    } else {
      rec.labels[i] = tasks[i].default_label;
      rec.fallback_applied[i] = true;
    }
  }

  if (suite.triggers_gate(rec.labels.front())) {
    // A lone gating label is a complete answer; anything else under the gate
    // is a hierarchy conflict and gets overwritten.
    const bool lone_gate = pieces.size() == 1 && !rec.fallback_applied.front();
    for (std::size_t i = 1; i < tasks.size(); ++i) {
      const auto& forced = suite.gated_label(i);
      if (lone_gate) {
        rec.labels[i] = forced;
        rec.fallback_applied[i] = false;
      } else if (rec.labels[i] != forced) {
        rec.labels[i] = forced;
        rec.fallback_applied[i] = true;
      }
    }
  }
  return rec;
}

}  // namespace textcoder
