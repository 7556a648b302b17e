#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "defx/corpus.hpp"
#include "defx/crf.hpp"
#include "defx/heuristics.hpp"

namespace defx {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PRF from_pr(double p, double r);
  static PRF from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
  bool operator==(const PRF&) const = default;
};

struct EvalReport {
  PRF macro;  // unweighted mean P/R over the four non-O classes, F from those means
  PRF term;   // micro-pooled over B-TERM/I-TERM
  PRF def_;   // micro-pooled over B-DEF/I-DEF
  PRF partial_term;
  PRF partial_def;
  PRF partial_pooled;
  double partial_f = 0.0;  // partial_pooled.f1
  double classification_accuracy = 0.0;
  std::array<PRF, 4> per_class{};        // B-TERM, I-TERM, B-DEF, I-DEF
  std::array<std::size_t, kNumTags> support{};  // gold counts per tag, O included
  std::vector<std::string> zero_support_classes;
};

// Token-level P/R/F per non-O class plus the macro/TERM/DEF aggregates.
// Classes with zero support and zero predictions contribute 0 to the macro
// mean and are flagged. Lengths must align per sentence.
EvalReport tag_metrics(const std::vector<std::vector<SlotTag>>& gold,
                       const std::vector<std::vector<SlotTag>>& pred);

struct PartialResult {
  PRF term;
  PRF def_;
  PRF pooled;
};

// Greedy max-overlap matching per sentence per kind (ties toward the
// leftmost gold span); a predicted span counts as TP iff its match overlaps
// by at least one token. Micro-pooled over the corpus.
PartialResult partial_match_f(const std::vector<std::vector<Span>>& gold,
                              const std::vector<std::vector<Span>>& pred);

double classification_accuracy(const std::vector<bool>& gold_flags,
                               const std::vector<bool>& pred_flags);

// Gold flag for a sentence: >=1 TERM span and >=1 DEF span.
bool gold_is_definitional(const Sentence& s);

// Metrics of postprocessed predictions against a labeled dataset.
EvalReport evaluate(const std::vector<Sentence>& gold,
                    const std::vector<SentencePrediction>& preds);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

// Per-token plurality vote over k aligned tag sequences; ties prefer O, then
// the lowest tag index. k = 1 is the identity.
std::vector<SlotTag> majority_vote(const std::vector<std::vector<SlotTag>>& predictions);

// majority_vote followed by postprocess.
SentencePrediction ensemble_vote(const std::vector<std::vector<SlotTag>>& predictions,
                                 const HeuristicsConfig& cfg = {});

struct CrossvalResult {
  std::vector<EvalReport> fold_reports;
  EvalReport mean;  // component-wise arithmetic mean; supports summed
  std::vector<CrfModel> models;
  FoldAssignment assignment;
};

// Train on k-1 folds, postprocess + evaluate on the held-out fold.
// Deterministic given seed (fold split and per-fold training seeds derive
// from it); folds may train in parallel without changing results.
CrossvalResult crossval(const Dataset& data, int k, std::uint64_t seed,
                        const TrainConfig& config, const FeatureFn& features,
                        const HeuristicsConfig& heuristics = {}, unsigned jobs = 1);

enum class EdgeFit { Exact, TooLong, CutOff };
enum class BoundarySummary {
  Correct,
  TooLongLeft,
  TooLongRight,
  CutOffLeft,
  CutOffRight,
  Mixed,
  Spurious
};

struct BoundaryCategory {
  std::optional<EdgeFit> left;   // empty when spurious
  std::optional<EdgeFit> right;  // empty when spurious
  BoundarySummary summary = BoundarySummary::Spurious;
};

std::string_view to_string(BoundarySummary s);

// Matches pred to the max-overlap same-kind gold span (ties toward the
// leftmost); no overlap at all -> spurious.
BoundaryCategory boundary_category(const Span& pred, const std::vector<Span>& gold);

enum class TermType { Textual, Acronym, AcronymText, Symbol, SymbolText };

std::string_view to_string(TermType t);

// Tokens starting with '$' or equal to EQUATION put the span in the SYMBOL
// family; detected short forms and ALL-CAPS tokens of length 2-6 count as
// acronyms.
TermType term_type(const std::vector<std::string>& span_tokens,
                   const std::set<std::string>& short_forms = {});

// 1 - Jaccard * monotonicity. Computed from integer counts with a single
// division, so fixture ratios are exact.
double masi_distance(const std::set<int>& a, const std::set<int>& b);

struct UnitAnnotation {
  std::set<int> term;
  std::set<int> def_;
};

// Unit = sentence; value = the token-index set one annotator marked for one
// kind. Annotators are keyed by label.
struct AgreementInput {
  std::vector<std::map<std::string, UnitAnnotation>> units;
};

// alpha = 1 - D_o/D_e with MASI distance. D_o is the mean distance over all
// within-unit annotator pairs; D_e is the mean distance over all cross-unit
// value pairs (pairable values only). D_o = D_e = 0 yields 1.0.
double krippendorff_alpha(const AgreementInput& input, SpanKind kind);

// JSONL: {"doc_id","sent_index","annotator","term":[...],"def":[...]}.
AgreementInput parse_agreement_jsonl(std::string_view text);

}  // namespace defx
