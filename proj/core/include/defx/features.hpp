#pragma once

#include <array>
#include <map>
#include <memory>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defx/corpus.hpp"

namespace defx {

// Binary features of one token, template:value strings with set semantics.
struct FeatureVector {
  std::vector<std::string> active;  // sorted, unique

  void add(std::string name);
  void finish();  // sort + dedupe
  bool contains(std::string_view name) const;
  bool operator==(const FeatureVector&) const = default;
};

// Line-oriented cue patterns: FLAG<TAB>token-regex [token-regex ...].
// Each element must fully match one token (case-insensitive); a multi-element
// rule matches consecutive tokens. Matched tokens receive FLAG, the two
// tokens on either side receive FLAG@-2/@-1/@+1/@+2.
struct PatternInventory {
  struct Rule {
    std::string flag;
    std::vector<std::string> elements;
    std::vector<std::regex> compiled;
  };
  std::vector<Rule> rules;

  static const PatternInventory& defaults();
  static PatternInventory parse(std::string_view text);
  static PatternInventory load(const std::string& path);
};

using FlagSet = std::vector<std::string>;  // sorted, unique

std::vector<FlagSet> pattern_flags(const Sentence& s, const PatternInventory& inv);

// Parenthesized short form with its long-form token range [long_start,
// long_end) in the same sentence.
struct AbbreviationPair {
  std::string short_form;
  std::size_t long_start = 0;
  std::size_t long_end = 0;
  bool operator==(const AbbreviationPair&) const = default;
};

// Schwartz-Hearst pairing: candidate short form is a single parenthesized
// token of 2-10 chars with at least one letter and an alphanumeric first
// char; long-form window is min(|s|+5, 2|s|) preceding tokens; characters
// match right to left with the first short-form char anchored to a word
// start.
std::vector<AbbreviationPair> detect_abbreviations(const Sentence& s);

bool is_short_form_candidate(std::string_view token);

// Rule lexicon tagset: NOUN VERB ADJ ADV DET PREP PUNCT NUM MATH OTHER.
std::string_view coarse_pos(std::string_view token);

std::string word_shape(std::string_view token);

using ScoreKey = std::pair<std::string, int>;  // (doc_id, sent_index)

// Precomputed per-token annotations from external tools (POS tags,
// dependency heads, entity labels), ingested per sentence. heads are 0-based
// token indices with -1 for the root. Any field may be empty.
struct TokenAnnotations {
  std::vector<std::string> pos;
  std::vector<int> heads;
  std::vector<std::string> entities;
};

using AnnotationMap = std::map<ScoreKey, TokenAnnotations>;

// JSONL: {"doc_id","sent_index","pos":[...],"heads":[...],"entities":[...]}.
AnnotationMap parse_annotations(std::string_view text);
AnnotationMap load_annotations(const std::string& path);

// nullptr when the sentence has no provenance or no entry; throws when a
// present field's length disagrees with the sentence, naming the key.
const TokenAnnotations* find_annotations(const AnnotationMap& annotations, const Sentence& s);

class FeatureExtractor {
 public:
  FeatureExtractor();
  explicit FeatureExtractor(PatternInventory inv);

  // annotations are not owned and must outlive extraction
  void set_annotations(const AnnotationMap* annotations) { annotations_ = annotations; }

  std::vector<FeatureVector> extract(const Sentence& s) const;
  std::vector<FeatureVector> operator()(const Sentence& s) const { return extract(s); }

 private:
  std::shared_ptr<const PatternInventory> inventory_;
  const AnnotationMap* annotations_ = nullptr;
};

// Per-token rows of 5 scores in tag-index order, added to CRF emission
// potentials at decode time.
struct ExternalScores {
  std::vector<std::array<double, kNumTags>> rows;
};

using ScoreMap = std::map<ScoreKey, ExternalScores>;

// JSONL: {"doc_id","sent_index","scores":[[5 floats] x T]}. Non-finite
// values raise Error at parse time.
ScoreMap parse_external_scores(std::string_view text);
ScoreMap load_external_scores(const std::string& path);

// Looks up scores for a sentence; returns nullptr when the sentence has no
// provenance or no entry. Throws when the row count disagrees with the
// sentence length, naming (doc_id, sent_index).
const ExternalScores* find_scores(const ScoreMap& scores, const Sentence& s);

// Checks every sentence with an entry against its row count.
void validate_scores(const ScoreMap& scores, const std::vector<Sentence>& sentences);

}  // namespace defx
