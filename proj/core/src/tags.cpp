#include "defx/tags.hpp"

#include <algorithm>
#include <array>

namespace defx {

namespace {
constexpr std::array<std::string_view, kNumTags> kTagNames = {
    "O", "B-TERM", "I-TERM", "B-DEF", "I-DEF"};
constexpr std::array<std::string_view, 2> kKindNames = {"TERM", "DEF"};
}  // namespace

std::string_view to_string(SlotTag t) { return kTagNames[static_cast<int>(t)]; }

std::string_view to_string(SpanKind k) { return kKindNames[static_cast<int>(k)]; }

SlotTag tag_from_string(std::string_view s) {
  for (int i = 0; i < kNumTags; ++i) {
    if (kTagNames[i] == s) return static_cast<SlotTag>(i);
  }
  throw Error("unknown tag '" + std::string(s) + "'");
}

bool is_begin(SlotTag t) { return t == SlotTag::BTerm || t == SlotTag::BDef; }

bool is_inside(SlotTag t) { return t == SlotTag::ITerm || t == SlotTag::IDef; }

std::optional<SpanKind> kind_of(SlotTag t) {
  switch (t) {
    case SlotTag::BTerm:
    case SlotTag::ITerm:
      return SpanKind::Term;
    case SlotTag::BDef:
    case SlotTag::IDef:
      return SpanKind::Def;
    default:
      return std::nullopt;
  }
}

SlotTag begin_tag(SpanKind k) { return k == SpanKind::Term ? SlotTag::BTerm : SlotTag::BDef; }

SlotTag inside_tag(SpanKind k) { return k == SpanKind::Term ? SlotTag::ITerm : SlotTag::IDef; }

bool is_valid_bio(const std::vector<SlotTag>& tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!is_inside(tags[i])) continue;
    if (i == 0) return false;
    if (kind_of(tags[i - 1]) != kind_of(tags[i])) return false;
  }
  return true;
}

std::vector<Span> tags_to_spans(const std::vector<SlotTag>& tags) {
  if (!is_valid_bio(tags)) throw Error("tags_to_spans: invalid BIO sequence");
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (!is_begin(tags[i])) {
      ++i;
      continue;
    }
    SpanKind k = *kind_of(tags[i]);
    std::size_t j = i + 1;
    while (j < tags.size() && tags[j] == inside_tag(k)) ++j;
    spans.push_back({k, i, j});
    i = j;
  }
  return spans;
}

std::vector<SlotTag> spans_to_tags(const std::vector<Span>& spans, std::size_t length) {
  std::vector<SlotTag> tags(length, SlotTag::O);
  std::vector<Span> sorted(spans);
  std::sort(sorted.begin(), sorted.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  std::size_t prev_end = 0;
  bool first = true;
  for (const Span& s : sorted) {
    if (s.start >= s.end || s.end > length) throw Error("spans_to_tags: span out of bounds");
    if (!first && s.start < prev_end) throw Error("spans_to_tags: overlapping spans");
    tags[s.start] = begin_tag(s.kind);
    for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = inside_tag(s.kind);
    prev_end = s.end;
    first = false;
  }
  return tags;
}

}  // namespace defx
