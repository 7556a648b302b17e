#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defx/tags.hpp"

namespace defx {

struct Token {
  std::string text;
  std::size_t index = 0;  // position within the owning sentence
  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::optional<std::vector<SlotTag>> gold_tags;  // same length as tokens when present
  std::optional<std::string> doc_id;
  std::optional<int> sent_index;

  bool operator==(const Sentence&) const = default;
  std::size_t size() const { return tokens.size(); }
  std::string text() const;  // tokens joined with single spaces
};

struct Dataset {
  std::vector<Sentence> sentences;
  std::string name;
  bool operator==(const Dataset&) const = default;
};

struct FoldAssignment {
  std::vector<int> fold_of;  // sentence index -> fold id in [0, k)
  int k = 0;
  std::vector<std::vector<std::size_t>> folds() const;
};

struct ConllParseResult {
  Dataset dataset;
  std::size_t bio_repairs = 0;      // tags rewritten to restore valid BIO
  std::size_t ignored_columns = 0;  // lines carrying columns beyond token/tag
  std::size_t warnings() const { return bio_repairs + ignored_columns; }
};

// token<TAB>tag lines, blank line between sentences, UTF-8. Stray I- openings
// are repaired (not rejected) and counted; extra columns are ignored with a
// warning. Unknown tags and malformed lines raise Error with the line number.
ConllParseResult parse_conll(std::string_view text, std::string name = "");

// Inverse of parse_conll on warning-free data; output ends with exactly one
// trailing newline. Throws on unlabeled sentences and format-breaking tokens.
std::string write_conll(const Dataset& d);

// Balanced random fold assignment, deterministic given (d, k, seed).
FoldAssignment split_folds(const Dataset& d, int k, std::uint64_t seed);

// JSONL: {"doc_id","sent_index","tokens":[...],"tags":[...]} per line.
// Absent optional fields are omitted.
std::string write_jsonl(const std::vector<Sentence>& sentences);
std::vector<Sentence> parse_jsonl(std::string_view text);

// Reads .conll/.jsonl by extension (anything not *.jsonl parses as CoNLL).
Dataset load_dataset(const std::string& path);

}  // namespace defx
