#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace textcoder {

struct Document {
  std::string id;
  std::string doc_type;  // e.g. "motion", "proposition"
  int year = 0;
  std::string raw_text;
};

// Byte range of one token inside Instance::text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const TokenSpan&) const = default;
};

struct Instance {
  std::string id;
  std::string doc_id;
  std::string text;  // normalized: lowercase, digits folded to '0'
  std::vector<TokenSpan> token_spans;

  std::vector<std::string> tokens() const;
};

// Builds an instance from already-normalized text, filling token_spans.
Instance make_instance(std::string id, std::string doc_id, std::string normalized_text);

// instance id -> one tag per token, as produced by an external tagger.
using PosIndex = std::map<std::string, std::vector<std::string>>;

// Lowercases, folds every decimal digit to '0', and separates punctuation from
// words with single spaces. Punctuation between two digits ("0000:00",
// "0000/00") and single hyphens inside words ("mor-") stay attached; runs of
// one punctuation character ("--", "``") form a single token. Idempotent.
std::string normalize(std::string_view raw);

struct SentenceRules {
  // Tokens that, when followed by ".", do not end a sentence. Single-letter
  // tokens are always treated as abbreviations.
  std::set<std::string> abbreviations = {"ang", "bet", "bl", "ca",  "dvs", "enl", "ex",
                                         "fr",  "jfr", "kap", "mom", "nr",  "prop", "resp",
                                         "sid", "tex", "vol", "no",  "pp",  "fig"};
};

// Splits a document into sentence instances with ids "<doc id>:<index>".
std::vector<Instance> split_sentences(const Document& doc, const SentenceRules& rules = {});

// Keeps instances containing at least one keyword as a whole token.
std::vector<Instance> keyword_filter(std::span<const Instance> instances,
                                     const std::vector<std::string>& keywords);

// Keeps instances where at least one keyword token is tagged as a noun.
std::vector<Instance> pos_filter(std::span<const Instance> instances,
                                 const std::vector<std::string>& keywords, const PosIndex& pos,
                                 const std::set<std::string>& noun_tags = {"NOUN", "NN"});

struct ValidationSplit {
  std::vector<Instance> validation;
  std::vector<Instance> remainder;
};

// Draws `n` instances (never from exclude_ids) without replacement. Both
// outputs keep corpus order; excluded instances appear in neither.
ValidationSplit split_validation(std::span<const Instance> instances, std::size_t n,
                                 std::uint64_t seed, const std::set<std::string>& exclude_ids);

struct YearRange {
  int min = 0;
  int max = 0;
  bool contains(int year) const { return year >= min && year <= max; }
};

// Reads `dir/manifest.jsonl` ({id, type, year, path}) when present, otherwise
// every *.txt file in name order (id = file stem, no type/year). Documents
// outside `years` are skipped.
std::vector<Document> load_corpus(const std::filesystem::path& dir,
                                  std::optional<YearRange> years = std::nullopt);

// Tab-separated "instance_id  token_index  tag" lines.
PosIndex load_pos_sidecar(const std::filesystem::path& path);

// One keyword per line; blank lines and '#' comments ignored.
std::vector<std::string> load_keywords(const std::filesystem::path& path);

}  // namespace textcoder
