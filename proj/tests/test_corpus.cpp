#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>

#include "defx/corpus.hpp"
#include "doctest.h"

using namespace defx;

namespace {

std::vector<SlotTag> tags(std::initializer_list<SlotTag> list) { return {list}; }

constexpr SlotTag O = SlotTag::O;
constexpr SlotTag BT = SlotTag::BTerm;
constexpr SlotTag IT = SlotTag::ITerm;
constexpr SlotTag BD = SlotTag::BDef;
constexpr SlotTag ID = SlotTag::IDef;

std::vector<SlotTag> random_valid_tags(std::mt19937_64& rng, std::size_t len) {
  std::vector<SlotTag> out;
  SlotTag prev = O;
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<SlotTag> options = {O, BT, BD};
    if (kind_of(prev) == SpanKind::Term) options.push_back(IT);
    if (kind_of(prev) == SpanKind::Def) options.push_back(ID);
    prev = options[rng() % options.size()];
    out.push_back(prev);
  }
  return out;
}

}  // namespace

TEST_CASE("slot tags round-trip through strings") {
  for (int i = 0; i < kNumTags; ++i) {
    SlotTag t = static_cast<SlotTag>(i);
    CHECK(tag_from_string(to_string(t)) == t);
  }
  CHECK_THROWS_AS(tag_from_string("B-FOO"), Error);
}

TEST_CASE("tags_to_spans") {
  CHECK(tags_to_spans(tags({BT, IT, O, BD})) ==
        std::vector<Span>{{SpanKind::Term, 0, 2}, {SpanKind::Def, 3, 4}});
  CHECK(tags_to_spans(tags({O, O, O})).empty());
  // adjacent B starts a fresh span
  CHECK(tags_to_spans(tags({BD, BD})) ==
        std::vector<Span>{{SpanKind::Def, 0, 1}, {SpanKind::Def, 1, 2}});
  CHECK_THROWS_AS(tags_to_spans(tags({O, IT})), Error);
}

TEST_CASE("spans_to_tags inverts tags_to_spans") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 200; ++it) {
    auto t = random_valid_tags(rng, 1 + rng() % 12);
    CHECK(spans_to_tags(tags_to_spans(t), t.size()) == t);
  }
  CHECK_THROWS_AS(spans_to_tags({{SpanKind::Term, 0, 3}, {SpanKind::Def, 2, 4}}, 5), Error);
  CHECK_THROWS_AS(spans_to_tags({{SpanKind::Term, 2, 2}}, 4), Error);
}

TEST_CASE("parse_conll basic sentence") {
  auto res = parse_conll("Textual\tB-TERM\nentailment\tI-TERM\nis\tO\n");
  REQUIRE(res.dataset.sentences.size() == 1);
  const Sentence& s = res.dataset.sentences[0];
  CHECK(s.size() == 3);
  CHECK(s.tokens[0].text == "Textual");
  CHECK(s.tokens[2].index == 2);
  CHECK(tags_to_spans(*s.gold_tags) == std::vector<Span>{{SpanKind::Term, 0, 2}});
  CHECK(res.warnings() == 0);
}

TEST_CASE("parse_conll errors") {
  CHECK_THROWS_AS(parse_conll(""), Error);
  CHECK_THROWS_WITH_AS(parse_conll("foo\tB-XYZ\n"),
                       "conll parse error at line 1: unknown tag 'B-XYZ'", Error);
  CHECK_THROWS_AS(parse_conll("justatoken\n"), Error);
  CHECK_THROWS_AS(parse_conll("\n\n"), Error);
}

TEST_CASE("parse_conll repairs stray I- openings") {
  auto res = parse_conll("something\tI-DEF\nmore\tI-DEF\n");
  REQUIRE(res.dataset.sentences.size() == 1);
  CHECK(*res.dataset.sentences[0].gold_tags == tags({BD, ID}));
  CHECK(res.bio_repairs == 1);
  CHECK(res.warnings() == 1);
}

TEST_CASE("parse_conll ignores extra columns with a warning") {
  auto res = parse_conll("a\tO\tfeat1\nb\tB-TERM\n");
  CHECK(res.dataset.sentences[0].size() == 2);
  CHECK(res.ignored_columns == 1);
}

TEST_CASE("write_conll round-trips") {
  auto ds = parse_conll("a\tB-TERM\nb\tI-TERM\n\nc\tO\nd\tB-DEF\n\ne\tO\n").dataset;
  REQUIRE(ds.sentences.size() == 3);
  std::string text = write_conll(ds);
  CHECK(text.back() == '\n');
  CHECK(text.substr(text.size() - 2) != "\n\n");  // exactly one trailing newline
  auto round = parse_conll(text);
  CHECK(round.dataset.sentences == ds.sentences);
  CHECK(round.warnings() == 0);
}

TEST_CASE("write_conll rejects bad input") {
  Dataset d;
  Sentence s;
  s.tokens = {{"ok", 0}};
  d.sentences.push_back(s);  // unlabeled
  CHECK_THROWS_AS(write_conll(d), Error);

  d.sentences[0].gold_tags = tags({O});
  d.sentences[0].tokens[0].text = "has\ttab";
  CHECK_THROWS_AS(write_conll(d), Error);
}

TEST_CASE("split_folds balances and partitions") {
  Dataset d;
  for (int i = 0; i < 224; ++i) {
    Sentence s;
    s.tokens = {{"x", 0}};
    s.gold_tags = tags({O});
    d.sentences.push_back(s);
  }
  auto fa = split_folds(d, 10, 42);
  auto folds = fa.folds();
  std::multiset<std::size_t> sizes;
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    sizes.insert(f.size());
    for (auto i : f) CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == 224);
  CHECK(sizes.count(23) == 4);  // 224 = 4*23 + 6*22
  CHECK(sizes.count(22) == 6);

  CHECK(split_folds(d, 10, 42).fold_of == fa.fold_of);
  CHECK(split_folds(d, 10, 43).fold_of != fa.fold_of);

  Dataset ten;
  for (int i = 0; i < 10; ++i) ten.sentences.push_back(d.sentences[i]);
  auto each = split_folds(ten, 10, 1).folds();
  for (const auto& f : each) CHECK(f.size() == 1);

  CHECK_THROWS_AS(split_folds(ten, 1, 0), Error);
  CHECK_THROWS_AS(split_folds(ten, 11, 0), Error);
}

TEST_CASE("jsonl round-trip") {
  auto ds = parse_conll("a\tB-TERM\nb\tO\n\nc\tB-DEF\n").dataset;
  ds.sentences[0].doc_id = "doc1";
  ds.sentences[0].sent_index = 0;
  std::string text = write_jsonl(ds.sentences);
  auto back = parse_jsonl(text);
  CHECK(back == ds.sentences);
  CHECK_THROWS_AS(parse_jsonl("{\"tokens\": [\"a\"], \"tags\": [\"B-TERM\",\"O\"]}\n"), Error);
  CHECK_THROWS_AS(parse_jsonl("not json\n"), Error);
}
