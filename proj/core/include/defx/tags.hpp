#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defx/error.hpp"

namespace defx {

// Five-way slot tag. The index order is load-bearing: decoding breaks ties
// toward the lowest index, so O must stay at 0.
enum class SlotTag : std::uint8_t { O = 0, BTerm = 1, ITerm = 2, BDef = 3, IDef = 4 };

inline constexpr int kNumTags = 5;

enum class SpanKind : std::uint8_t { Term = 0, Def = 1 };

// Contiguous token range [start, end) of one kind within a sentence.
struct Span {
  SpanKind kind;
  std::size_t start;
  std::size_t end;
  bool operator==(const Span&) const = default;
  std::size_t length() const { return end - start; }
};

std::string_view to_string(SlotTag t);
std::string_view to_string(SpanKind k);
SlotTag tag_from_string(std::string_view s);  // throws Error on unknown tag

bool is_begin(SlotTag t);
bool is_inside(SlotTag t);
std::optional<SpanKind> kind_of(SlotTag t);  // nullopt for O
SlotTag begin_tag(SpanKind k);
SlotTag inside_tag(SpanKind k);

// Valid BIO: every I-X is preceded by B-X or I-X of the same kind.
bool is_valid_bio(const std::vector<SlotTag>& tags);

// Maximal spans of a valid tag sequence; throws on invalid BIO.
std::vector<Span> tags_to_spans(const std::vector<SlotTag>& tags);

// Inverse writer: spans (any order, disjoint, in bounds) back to tags.
std::vector<SlotTag> spans_to_tags(const std::vector<Span>& spans, std::size_t length);

}  // namespace defx
