#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "defx/heuristics.hpp"
#include "doctest.h"

using namespace defx;

namespace {

constexpr SlotTag O = SlotTag::O;
constexpr SlotTag BT = SlotTag::BTerm;
constexpr SlotTag IT = SlotTag::ITerm;
constexpr SlotTag BD = SlotTag::BDef;
constexpr SlotTag ID = SlotTag::IDef;

using Tags = std::vector<SlotTag>;

std::size_t non_o(const Tags& t) {
  std::size_t n = 0;
  for (SlotTag x : t) n += x != O;
  return n;
}

}  // namespace

TEST_CASE("repair_bio") {
  CHECK(repair_bio({ID, ID}) == Tags{BD, ID});
  CHECK(repair_bio({BT, ID}) == Tags{BT, BD});
  CHECK(repair_bio({O, IT, IT}) == Tags{O, BT, IT});
  Tags valid = {BT, IT, O, BD, ID};
  CHECK(repair_bio(valid) == valid);
  CHECK(repair_bio(repair_bio({ID, O, IT, ID})) == repair_bio({ID, O, IT, ID}));
}

TEST_CASE("stitch merges gaps up to max_gap") {
  CHECK(stitch({BD, ID, O, BD}, 2) == Tags{BD, ID, ID, ID});
  CHECK(stitch({BT, O, O, O, BT}, 2) == Tags{BT, O, O, O, BT});  // gap 3 > 2
  CHECK(stitch({BT, O, O, O, BT}, 3) == Tags{BT, IT, IT, IT, IT});
  Tags no_gaps = {BT, IT, O, BD};
  CHECK(stitch(no_gaps, 3) == no_gaps);
}

TEST_CASE("stitch keeps adjacent spans and other kinds apart") {
  // adjacent same-kind spans stay two spans
  CHECK(stitch({BT, BT}, 3) == Tags{BT, BT});
  // a DEF between two TERMs blocks merging
  CHECK(stitch({BT, BD, BT}, 3) == Tags{BT, BD, BT});
  // chains merge left to right in one pass
  CHECK(stitch({BT, O, BT, O, BT}, 1) == Tags{BT, IT, IT, IT, IT});
  CHECK(stitch({}, 3).empty());
  // unbounded gap reproduces the literal rule
  CHECK(stitch({BD, O, O, O, O, O, O, BD}, kUnboundedGap) ==
        Tags{BD, ID, ID, ID, ID, ID, ID, ID});
}

TEST_CASE("consistency_filter") {
  SentencePrediction only_term;
  only_term.tags = {BT, IT, O};
  auto cleared = consistency_filter(only_term);
  CHECK(cleared.tags == Tags{O, O, O});
  CHECK(!cleared.is_definitional);
  CHECK(cleared.spans.empty());

  SentencePrediction both;
  both.tags = {BT, O, BD};
  auto kept = consistency_filter(both);
  CHECK(kept.tags == Tags{BT, O, BD});
  CHECK(kept.is_definitional);
  CHECK(kept.spans.size() == 2);

  SentencePrediction none;
  none.tags = {O, O};
  auto empty = consistency_filter(none);
  CHECK(empty.tags == Tags{O, O});
  CHECK(!empty.is_definitional);
}

TEST_CASE("postprocess pipeline") {
  auto p1 = postprocess({IT, O, BD});
  CHECK(p1.tags == Tags{BT, O, BD});
  CHECK(p1.is_definitional);

  auto p2 = postprocess({BD, ID});
  CHECK(p2.tags == Tags{O, O});
  CHECK(!p2.is_definitional);

  auto p3 = postprocess({});
  CHECK(p3.tags.empty());
  CHECK(!p3.is_definitional);
}

TEST_CASE("postprocess invariants on random sequences") {
  std::mt19937_64 rng(99);
  HeuristicsConfig cfg;
  for (int trial = 0; trial < 3000; ++trial) {
    std::size_t len = rng() % 14;
    Tags raw(len);
    for (auto& t : raw) t = static_cast<SlotTag>(rng() % kNumTags);

    auto pred = postprocess(raw, cfg);
    CHECK(is_valid_bio(pred.tags));

    bool term = false, def = false;
    for (const Span& s : pred.spans) {
      term |= s.kind == SpanKind::Term;
      def |= s.kind == SpanKind::Def;
    }
    CHECK(pred.is_definitional == (term && def));

    auto again = postprocess(pred.tags, cfg);
    CHECK(again.tags == pred.tags);
    CHECK(again.is_definitional == pred.is_definitional);

    // stitch never loses labeled tokens; the filter never adds them
    auto repaired = repair_bio(raw);
    auto stitched = stitch(repaired, cfg.max_gap);
    CHECK(non_o(stitched) >= non_o(repaired));
    CHECK(non_o(pred.tags) <= non_o(stitched));
  }
}

TEST_CASE("postprocess is the identity on valid consistent input") {
  std::vector<Tags> inputs = {
      {BT, IT, O, BD, ID},
      {BT, BT, O, BD},        // adjacent spans survive
      {O, BT, O, O, O, O, BD},  // gap between kinds irrelevant
      {O, O, O},
      {},
  };
  for (const auto& t : inputs) {
    auto p = postprocess(t);
    bool term = false, def = false;
    for (const Span& s : tags_to_spans(t)) {
      term |= s.kind == SpanKind::Term;
      def |= s.kind == SpanKind::Def;
    }
    if (term == def) {  // consistent: both kinds or neither
      CHECK(p.tags == t);
    }
  }
}

TEST_CASE("ablation flags disable stages") {
  HeuristicsConfig no_stitch;
  no_stitch.enable_stitch = false;
  CHECK(postprocess({BD, O, BD, O, BT}, no_stitch).tags == Tags{BD, O, BD, O, BT});

  HeuristicsConfig no_filter;
  no_filter.enable_filter = false;
  auto p = postprocess({BT, IT}, no_filter);
  CHECK(p.tags == Tags{BT, IT});
  CHECK(!p.is_definitional);
}
