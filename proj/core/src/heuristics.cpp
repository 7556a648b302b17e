#include "defx/heuristics.hpp"

#include <algorithm>

namespace defx {

std::vector<SlotTag> repair_bio(std::vector<SlotTag> tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!is_inside(tags[i])) continue;
    SpanKind k = *kind_of(tags[i]);
    bool anchored = i > 0 && kind_of(tags[i - 1]) == k;
    if (!anchored) tags[i] = begin_tag(k);
  }
  return tags;
}

std::vector<SlotTag> stitch(std::vector<SlotTag> tags, std::size_t max_gap) {
  auto spans = tags_to_spans(tags);
  if (spans.size() < 2) return tags;

  std::vector<Span> merged;
  merged.reserve(spans.size());
  for (const Span& s : spans) {
    if (!merged.empty() && merged.back().kind == s.kind) {
      // consecutive spans in the list have only O tokens between them
      std::size_t gap = s.start - merged.back().end;
      if (gap >= 1 && gap <= max_gap) {
        merged.back().end = s.end;
        continue;
      }
    }
    merged.push_back(s);
  }
  return spans_to_tags(merged, tags.size());
}

SentencePrediction consistency_filter(SentencePrediction pred) {
  pred.spans = tags_to_spans(pred.tags);
  bool has_term = std::any_of(pred.spans.begin(), pred.spans.end(),
                              [](const Span& s) { return s.kind == SpanKind::Term; });
  bool has_def = std::any_of(pred.spans.begin(), pred.spans.end(),
                             [](const Span& s) { return s.kind == SpanKind::Def; });
  if (has_term && has_def) {
    pred.is_definitional = true;
    return pred;
  }
  pred.is_definitional = false;
  if (has_term != has_def) {
    std::fill(pred.tags.begin(), pred.tags.end(), SlotTag::O);
    pred.spans.clear();
  }
  return pred;
}

SentencePrediction postprocess(std::vector<SlotTag> tags, const HeuristicsConfig& cfg) {
  if (cfg.enable_repair) tags = repair_bio(std::move(tags));
  if (cfg.enable_stitch) tags = stitch(std::move(tags), cfg.max_gap);
  SentencePrediction pred;
  pred.tags = std::move(tags);
  if (cfg.enable_filter) return consistency_filter(std::move(pred));
  pred.spans = tags_to_spans(pred.tags);
  bool has_term = std::any_of(pred.spans.begin(), pred.spans.end(),
                              [](const Span& s) { return s.kind == SpanKind::Term; });
  bool has_def = std::any_of(pred.spans.begin(), pred.spans.end(),
                             [](const Span& s) { return s.kind == SpanKind::Def; });
  pred.is_definitional = has_term && has_def;
  return pred;
}

}  // namespace defx
