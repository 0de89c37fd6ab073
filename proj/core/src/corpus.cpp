#include "textcoder/corpus.hpp"

#include <algorithm>
#include <fstream>
#include "json.hpp"
#include <sstream>
#include <unordered_set>

#include "textcoder/error.hpp"
#include "textcoder/seed.hpp"
#include "textcoder/text.hpp"

namespace textcoder {

std::vector<std::string> Instance::tokens() const {
  std::vector<std::string> out;
  out.reserve(token_spans.size());
  for (const auto& s : token_spans) out.push_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

Instance make_instance(std::string id, std::string doc_id, std::string normalized_text) {
  Instance inst{std::move(id), std::move(doc_id), std::move(normalized_text), {}};
  const auto& t = inst.text;
  std::size_t i = 0;
  while (i < t.size()) {
    while (i < t.size() && t[i] == ' ') ++i;
    const std::size_t b = i;
    while (i < t.size() && t[i] != ' ') ++i;
    if (i > b) inst.token_spans.push_back({b, i});
  }
  return inst;
}

namespace {

enum class CharClass { kSpace, kWord, kPunct };

struct Glyph {
  std::string_view bytes;
  char32_t cp;
};

std::vector<Glyph> decode(std::string_view s) {
  std::vector<Glyph> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    }
    if (i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      const auto bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) {
        len = 1;
        cp = b0;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    out.push_back({s.substr(i, len), cp});
    i += len;
  }
  return out;
}

bool is_space_cp(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
         cp == 0xA0 || cp == 0x2007 || cp == 0x202F;
}

bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) {
    if (cp == '_') return false;
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E);
}

bool is_digit_cp(char32_t cp) { return cp >= '0' && cp <= '9'; }

bool number_internal(char32_t cp) { return cp == '.' || cp == ',' || cp == ':' || cp == '/'; }

}  // namespace

std::string normalize(std::string_view raw) {
  std::string lowered = text::to_lower(raw);
  for (auto& c : lowered) {
    if (c >= '0' && c <= '9') c = '0';
  }
  const auto glyphs = decode(lowered);
  const std::size_t n = glyphs.size();

  std::vector<CharClass> cls(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cp = glyphs[i].cp;
    cls[i] = is_space_cp(cp) ? CharClass::kSpace
             : is_punct_cp(cp) ? CharClass::kPunct
                               : CharClass::kWord;
  }
  // Re-class punctuation that behaves as part of a word.
  for (std::size_t i = 0; i < n; ++i) {
    if (cls[i] != CharClass::kPunct) continue;
    const auto cp = glyphs[i].cp;
    if (number_internal(cp) && i > 0 && i + 1 < n && is_digit_cp(glyphs[i - 1].cp) &&
        is_digit_cp(glyphs[i + 1].cp)) {
      cls[i] = CharClass::kWord;
    } else if (cp == '-') {
      const bool prev_dash = i > 0 && glyphs[i - 1].cp == '-';
      const bool next_dash = i + 1 < n && glyphs[i + 1].cp == '-';
      if (!prev_dash && !next_dash) cls[i] = CharClass::kWord;
    }
  }

  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < n; ++i) {
    switch (cls[i]) {
      case CharClass::kSpace:
        flush();
        break;
      case CharClass::kWord:
        current.append(glyphs[i].bytes);
        break;
      case CharClass::kPunct: {
        flush();
        std::string run(glyphs[i].bytes);
        while (i + 1 < n && cls[i + 1] == CharClass::kPunct && glyphs[i + 1].cp == glyphs[i].cp) {
          run.append(glyphs[++i].bytes);
        }
        tokens.push_back(std::move(run));
        break;
      }
    }
  }
  flush();
  return text::join(tokens, " ");
}

namespace {

bool is_terminal(std::string_view tok) {
  if (tok == "\xE2\x80\xA6") return true;  // horizontal ellipsis
  return !tok.empty() && tok.find_first_not_of(".!?") == std::string_view::npos;
}

bool is_closer(std::string_view tok) {
  return tok == ")" || tok == "]" || tok == "''" || tok == "\"" || tok == "\xC2\xBB" ||
         tok == "\xE2\x80\x9D" || tok == "\xE2\x80\x99";
}

bool is_abbreviation(std::string_view prev, const SentenceRules& rules) {
  if (prev.size() == 1 && prev[0] >= 'a' && prev[0] <= 'z') return true;
  return rules.abbreviations.count(std::string(prev)) > 0;
}

}  // namespace

std::vector<Instance> split_sentences(const Document& doc, const SentenceRules& rules) {
  const auto tokens = text::split_ws(normalize(doc.raw_text));
  std::vector<Instance> out;
  std::vector<std::string> sentence;
  auto emit = [&] {
    if (sentence.empty()) return;
    out.push_back(make_instance(doc.id + ":" + std::to_string(out.size()), doc.id,
                                text::join(sentence, " ")));
    sentence.clear();
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    sentence.push_back(tokens[i]);
    if (!is_terminal(tokens[i])) continue;
    if (tokens[i] == "." && sentence.size() >= 2 &&
        is_abbreviation(sentence[sentence.size() - 2], rules)) {
      continue;
    }
    while (i + 1 < tokens.size() && is_closer(tokens[i + 1])) sentence.push_back(tokens[++i]);
    emit();
  }
  emit();
  return out;
}

namespace {

std::unordered_set<std::string> keyword_set(const std::vector<std::string>& keywords) {
  if (keywords.empty()) throw PreconditionError("keyword list is empty");
  std::unordered_set<std::string> set;
  for (const auto& k : keywords) {
    const auto norm = normalize(k);
    if (norm.empty()) continue;
    if (norm.find(' ') != std::string::npos) {
      throw PreconditionError("keyword '" + k + "' is not a single token");
    }
    set.insert(norm);
  }
  if (set.empty()) throw PreconditionError("keyword list is empty");
  return set;
}

}  // namespace

std::vector<Instance> keyword_filter(std::span<const Instance> instances,
                                     const std::vector<std::string>& keywords) {
  const auto set = keyword_set(keywords);
  std::vector<Instance> out;
  for (const auto& inst : instances) {
    for (const auto& s : inst.token_spans) {
      if (set.count(inst.text.substr(s.begin, s.end - s.begin))) {
        out.push_back(inst);
        break;
      }
    }
  }
  return out;
}

std::vector<Instance> pos_filter(std::span<const Instance> instances,
                                 const std::vector<std::string>& keywords, const PosIndex& pos,
                                 const std::set<std::string>& noun_tags) {
  const auto set = keyword_set(keywords);
  std::vector<std::string> missing;
  std::vector<Instance> out;
  for (const auto& inst : instances) {
    const auto it = pos.find(inst.id);
    if (it == pos.end()) {
      missing.push_back(inst.id);
      continue;
    }
    const auto& tags = it->second;
    if (tags.size() != inst.token_spans.size()) {
      throw PreconditionError("instance '" + inst.id + "' has " +
                              std::to_string(inst.token_spans.size()) + " tokens but " +
                              std::to_string(tags.size()) + " POS tags");
    }
    for (std::size_t i = 0; i < tags.size(); ++i) {
      const auto& s = inst.token_spans[i];
      if (set.count(inst.text.substr(s.begin, s.end - s.begin)) && noun_tags.count(tags[i])) {
        out.push_back(inst);
        break;
      }
    }
  }
  if (!missing.empty()) {
    throw PreconditionError("missing POS annotation for " + std::to_string(missing.size()) +
                            " instance(s): " + text::join(missing, ", "));
  }
  return out;
}

ValidationSplit split_validation(std::span<const Instance> instances, std::size_t n,
                                 std::uint64_t seed, const std::set<std::string>& exclude_ids) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!exclude_ids.count(instances[i].id)) candidates.push_back(i);
  }
  if (n > candidates.size()) {
    throw PreconditionError("validation size " + std::to_string(n) + " exceeds the " +
                            std::to_string(candidates.size()) + " eligible instances");
  }
  auto order = candidates;
  SeededRng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(chosen.begin(), chosen.end());

  ValidationSplit split;
  std::size_t c = 0;
  for (const auto idx : candidates) {
    if (c < chosen.size() && chosen[c] == idx) {
      split.validation.push_back(instances[idx]);
      ++c;
    } else {
      split.remainder.push_back(instances[idx]);
    }
  }
  return split;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<Document> load_corpus(const std::filesystem::path& dir,
                                  std::optional<YearRange> years) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("corpus directory '" + dir.string() + "' not found");
  std::vector<Document> docs;
  const auto manifest = dir / "manifest.jsonl";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        Document d;
        d.id = j.at("id").get<std::string>();
        d.doc_type = j.value("type", std::string());
        d.year = j.value("year", 0);
        d.raw_text = read_file(dir / j.at("path").get<std::string>());
        docs.push_back(std::move(d));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.stem().string(), "", 0, read_file(f)});
  }
  std::set<std::string> ids;
  std::vector<Document> kept;
  for (auto& d : docs) {
    if (!ids.insert(d.id).second) throw ConfigError("duplicate document id '" + d.id + "'");
    if (years && !years->contains(d.year)) continue;
    kept.push_back(std::move(d));
  }
  return kept;
}

PosIndex load_pos_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open POS sidecar '" + path.string() + "'");
  std::map<std::string, std::map<std::size_t, std::string>> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) {
      throw ConfigError("POS sidecar line " + std::to_string(lineno) + ": expected 3 columns");
    }
    std::size_t idx = 0;
    try {
      idx = std::stoul(cols[1]);
    } catch (const std::exception&) {
      throw ConfigError("POS sidecar line " + std::to_string(lineno) + ": bad token index");
    }
    raw[cols[0]][idx] = std::string(text::trim(cols[2]));
  }
  PosIndex out;
  for (auto& [id, by_index] : raw) {
    std::vector<std::string> tags;
    for (auto& [idx, tag] : by_index) {
      if (idx != tags.size()) {
        throw ConfigError("POS sidecar: instance '" + id + "' skips token index " +
                          std::to_string(tags.size()));
      }
      tags.push_back(std::move(tag));
    }
    out.emplace(id, std::move(tags));
  }
  return out;
}

std::vector<std::string> load_keywords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open keyword file '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  return out;
}

}  // namespace textcoder
