#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "defx/tags.hpp"

namespace defx {

inline constexpr std::size_t kUnboundedGap = std::numeric_limits<std::size_t>::max();

struct HeuristicsConfig {
  std::size_t max_gap = 3;  // kUnboundedGap reproduces the unbounded rule
  bool enable_repair = true;
  bool enable_stitch = true;
  bool enable_filter = true;
  bool operator==(const HeuristicsConfig&) const = default;
};

struct SentencePrediction {
  std::vector<SlotTag> tags;
  bool is_definitional = false;
  std::vector<Span> spans;
  bool operator==(const SentencePrediction&) const = default;
};

// I-X at sentence start, after O, or after the other kind becomes B-X.
// Idempotent; output is always valid BIO.
std::vector<SlotTag> repair_bio(std::vector<SlotTag> tags);

// Merges consecutive same-kind spans separated by 1..max_gap O tokens,
// relabeling the gap as I-<kind>. Adjacent spans (gap 0) stay distinct.
// Left-to-right single pass reaches the fixpoint. Input must be valid BIO.
std::vector<SlotTag> stitch(std::vector<SlotTag> tags, std::size_t max_gap);

// Clears all tags when only one span kind is present; sets is_definitional
// to (>=1 TERM span && >=1 DEF span).
SentencePrediction consistency_filter(SentencePrediction pred);

// repair_bio -> stitch -> consistency_filter, honoring the ablation flags.
SentencePrediction postprocess(std::vector<SlotTag> tags, const HeuristicsConfig& cfg = {});

}  // namespace defx
