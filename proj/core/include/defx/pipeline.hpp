#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "defx/crf.hpp"
#include "defx/eval.hpp"
#include "defx/heuristics.hpp"
#include "defx/preprocess.hpp"

namespace defx {

struct TermSpanRecord {
  Span span;
  TermType type;
  std::string text;
};

struct DefSpanRecord {
  Span span;
  std::string text;
};

// One definitional sentence: at least one TERM and one DEF span.
struct GlossaryRecord {
  std::string doc_id;
  int sent_index = 0;
  std::string text;
  std::vector<TermSpanRecord> terms;
  std::vector<DefSpanRecord> defs;
  bool is_ensemble = false;
};

struct ScanStats {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t definitional = 0;
  std::array<std::size_t, 5> term_type_counts{};  // indexed by TermType

  double avg_defs_per_doc() const {
    return documents == 0 ? 0.0 : static_cast<double>(definitional) / documents;
  }
  void merge(const ScanStats& other);
};

struct ScanOptions {
  bool emit_negatives = false;
  bool constrained = false;
  std::optional<AbbrevList> abbrev;  // sentence-split exceptions override
};

struct ScanResult {
  std::vector<GlossaryRecord> records;
  std::vector<std::pair<int, std::string>> negatives;  // (sent_index, text)
  ScanStats stats;
};

// normalize -> segment -> featurize -> decode (majority vote when more than
// one model) -> postprocess -> collect definitional sentences. Errors
// propagate with the doc_id prefixed.
ScanResult scan_document(const RawDocument& doc, std::span<const CrfModel> models,
                         const FeatureExtractor& features,
                         const HeuristicsConfig& heuristics = {},
                         const ScoreMap* scores = nullptr,
                         const ScanOptions& options = {});

std::string glossary_to_jsonl(const std::vector<GlossaryRecord>& records);
std::string stats_to_json(const ScanStats& stats);

struct TaxonomyReport {
  std::map<std::string, double> term_categories;  // proportions, sum to 1
  std::map<std::string, double> def_categories;
  std::map<std::string, double> term_boundaries;
  std::map<std::string, double> def_boundaries;
  std::size_t term_count = 0;
  std::size_t def_count = 0;
};

// Category proportions of predicted spans against gold sentences matched by
// (doc_id, sent_index). Definition categories are overlap proxies (labeled
// as such in the output): a predicted DEF either overlaps a gold DEF or not.
TaxonomyReport analyze_predictions(const std::vector<GlossaryRecord>& records,
                                   const Dataset& gold);

std::string taxonomy_to_json(const TaxonomyReport& report);

}  // namespace defx
