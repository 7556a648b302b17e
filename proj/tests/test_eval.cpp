#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "defx/eval.hpp"
#include "defx/synthetic.hpp"
#include "doctest.h"

using namespace defx;

namespace {

constexpr SlotTag O = SlotTag::O;
constexpr SlotTag BT = SlotTag::BTerm;
constexpr SlotTag IT = SlotTag::ITerm;
constexpr SlotTag BD = SlotTag::BDef;
constexpr SlotTag ID = SlotTag::IDef;

using Tags = std::vector<SlotTag>;
using TagsList = std::vector<Tags>;

std::set<int> iset(std::initializer_list<int> v) { return {v}; }

// exact-span micro F over both kinds, for the partial >= exact property
double exact_span_f(const std::vector<std::vector<Span>>& gold,
                    const std::vector<std::vector<Span>>& pred) {
  std::size_t tp = 0, np = 0, ng = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ng += gold[i].size();
    np += pred[i].size();
    for (const Span& p : pred[i]) {
      for (const Span& g : gold[i]) {
        if (p == g) {
          ++tp;
          break;
        }
      }
    }
  }
  double prec = np ? static_cast<double>(tp) / np : 0.0;
  double rec = ng ? static_cast<double>(tp) / ng : 0.0;
  return prec + rec == 0.0 ? 0.0 : 2 * prec * rec / (prec + rec);
}

}  // namespace

TEST_CASE("PRF relation") {
  PRF p = PRF::from_pr(0.0, 0.0);
  CHECK(p.f1 == 0.0);
  PRF q = PRF::from_pr(1.0, 0.5);
  CHECK(q.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("tag_metrics perfect prediction") {
  TagsList gold = {{BT, IT, O, BD, ID}, {O, BT, BD}};
  auto r = tag_metrics(gold, gold);
  CHECK(r.macro.f1 == 1.0);
  CHECK(r.macro.precision == 1.0);
  CHECK(r.term.f1 == 1.0);
  CHECK(r.def_.f1 == 1.0);
  CHECK(r.support[static_cast<int>(BT)] == 2);
  CHECK(r.zero_support_classes.empty());
}

TEST_CASE("tag_metrics hand-computed counts") {
  TagsList gold = {{BT, IT, O}};
  TagsList pred = {{BT, O, O}};
  auto r = tag_metrics(gold, pred);
  CHECK(r.term.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.term.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.term.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("tag_metrics all-O predictions score zero") {
  TagsList gold = {{BT, IT, BD, ID}};
  TagsList pred = {{O, O, O, O}};
  auto r = tag_metrics(gold, pred);
  CHECK(r.macro.f1 == 0.0);
}

TEST_CASE("tag_metrics flags zero-support classes and is order-invariant") {
  TagsList gold = {{BT, O}, {O, BT}};
  auto r = tag_metrics(gold, gold);
  CHECK(r.zero_support_classes ==
        std::vector<std::string>{"I-TERM", "B-DEF", "I-DEF"});
  // zero-support classes drag the macro mean down by design
  CHECK(r.macro.precision == doctest::Approx(0.25).epsilon(1e-12));

  TagsList flipped = {gold[1], gold[0]};
  auto r2 = tag_metrics(flipped, flipped);
  CHECK(r2.macro.f1 == r.macro.f1);

  CHECK_THROWS_AS(tag_metrics(gold, TagsList{{O}}), Error);
  CHECK_THROWS_AS(tag_metrics(gold, TagsList{{O}, {O, O}}), Error);
}

TEST_CASE("partial_match_f credits one-token overlaps") {
  std::vector<std::vector<Span>> gold = {{{SpanKind::Term, 0, 4}}};
  std::vector<std::vector<Span>> pred = {{{SpanKind::Term, 1, 3}}};
  auto r = partial_match_f(gold, pred);
  CHECK(r.term.precision == 1.0);
  CHECK(r.term.recall == 1.0);
  CHECK(r.term.f1 == 1.0);

  std::vector<std::vector<Span>> same = {{{SpanKind::Term, 0, 2}, {SpanKind::Def, 3, 5}}};
  auto perfect = partial_match_f(same, same);
  CHECK(perfect.pooled.f1 == 1.0);

  std::vector<std::vector<Span>> disjoint = {{{SpanKind::Term, 5, 6}}};
  auto zero = partial_match_f(gold, disjoint);
  CHECK(zero.term.precision == 0.0);
}

TEST_CASE("partial F dominates exact-span F") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<Span>> gold(3), pred(3);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 2; ++k) {
        std::size_t a = rng() % 8;
        gold[i].push_back({static_cast<SpanKind>(k), a, a + 1 + rng() % 3});
        std::size_t b = rng() % 8;
        pred[i].push_back({static_cast<SpanKind>(k), b, b + 1 + rng() % 3});
      }
    }
    auto partial = partial_match_f(gold, pred);
    CHECK(partial.pooled.f1 >= exact_span_f(gold, pred) - 1e-12);
  }
}

TEST_CASE("classification_accuracy") {
  CHECK(classification_accuracy({true, false}, {true, false}) == 1.0);
  CHECK(classification_accuracy({true, false, true, false}, {true, true, false, false}) == 0.5);
  std::vector<bool> gold(485, false), pred(485, false);
  for (int i = 0; i < 98; ++i) gold[i] = true;
  CHECK(classification_accuracy(gold, pred) ==
        doctest::Approx(387.0 / 485.0).epsilon(1e-12));
  CHECK_THROWS_AS(classification_accuracy({}, {}), Error);
  CHECK_THROWS_AS(classification_accuracy({true}, {true, false}), Error);
}

TEST_CASE("majority_vote counts and tie-breaks") {
  // 4 x B-TERM, 3 x O, 3 x B-DEF -> B-TERM
  TagsList votes1;
  for (int i = 0; i < 4; ++i) votes1.push_back({BT});
  for (int i = 0; i < 3; ++i) votes1.push_back({O});
  for (int i = 0; i < 3; ++i) votes1.push_back({BD});
  CHECK(majority_vote(votes1) == Tags{BT});

  // 5-5 tie goes to O
  TagsList votes2;
  for (int i = 0; i < 5; ++i) votes2.push_back({BT});
  for (int i = 0; i < 5; ++i) votes2.push_back({O});
  CHECK(majority_vote(votes2) == Tags{O});

  // non-O tie goes to the lowest tag index
  TagsList votes3 = {{BT}, {BD}};
  CHECK(majority_vote(votes3) == Tags{BT});

  // k = 1 is the identity
  TagsList single = {{BT, IT, O}};
  CHECK(majority_vote(single) == single[0]);

  CHECK_THROWS_AS(majority_vote({}), Error);
  CHECK_THROWS_AS(majority_vote(TagsList{{O}, {O, O}}), Error);
}

TEST_CASE("ensemble_vote unanimity equals postprocessed single prediction") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    Tags raw(rng() % 10);
    for (auto& t : raw) t = static_cast<SlotTag>(rng() % kNumTags);
    TagsList copies(7, raw);
    CHECK(ensemble_vote(copies) == postprocess(raw));
  }
}

TEST_CASE("boundary_category") {
  Span gold{SpanKind::Term, 10, 13};
  std::vector<Span> golds = {gold};
  CHECK(boundary_category(gold, golds).summary == BoundarySummary::Correct);
  CHECK(boundary_category({SpanKind::Term, 10, 12}, golds).summary ==
        BoundarySummary::CutOffRight);
  CHECK(boundary_category({SpanKind::Term, 10, 15}, golds).summary ==
        BoundarySummary::TooLongRight);
  CHECK(boundary_category({SpanKind::Term, 11, 13}, golds).summary ==
        BoundarySummary::CutOffLeft);
  CHECK(boundary_category({SpanKind::Term, 9, 13}, golds).summary ==
        BoundarySummary::TooLongLeft);
  CHECK(boundary_category({SpanKind::Term, 8, 14}, golds).summary == BoundarySummary::Mixed);
  CHECK(boundary_category({SpanKind::Term, 20, 22}, golds).summary ==
        BoundarySummary::Spurious);
  // kind mismatch is spurious even with overlap
  CHECK(boundary_category({SpanKind::Def, 10, 13}, golds).summary ==
        BoundarySummary::Spurious);
}

TEST_CASE("boundary_category identity property") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t a = rng() % 20;
    Span s{static_cast<SpanKind>(rng() % 2), a, a + 1 + rng() % 5};
    auto cat = boundary_category(s, {s});
    CHECK(cat.summary == BoundarySummary::Correct);
    CHECK(*cat.left == EdgeFit::Exact);
    CHECK(*cat.right == EdgeFit::Exact);
  }
}

TEST_CASE("term_type") {
  CHECK(term_type({"$s^{task}$"}) == TermType::Symbol);
  CHECK(term_type({"EQUATION"}) == TermType::Symbol);
  CHECK(term_type({"WSD"}) == TermType::Acronym);
  CHECK(term_type({"$L$-layer", "biLM"}, {"biLM"}) == TermType::SymbolText);
  CHECK(term_type({"WSD", "task"}) == TermType::AcronymText);
  CHECK(term_type({"biLM"}, {"biLM"}) == TermType::Acronym);
  CHECK(term_type({"textual", "entailment"}) == TermType::Textual);
  CHECK_THROWS_AS(term_type({}), Error);
}

TEST_CASE("masi_distance") {
  CHECK(masi_distance(iset({1, 2}), iset({1, 2})) == 0.0);
  CHECK(masi_distance(iset({1, 2}), iset({1, 2, 3})) == 5.0 / 9.0);  // exact
  CHECK(masi_distance(iset({1}), iset({2})) == 1.0);
  CHECK(masi_distance(iset({}), iset({})) == 0.0);
  CHECK(masi_distance(iset({}), iset({1})) == 1.0);  // empty vs non-empty: disjoint
  // overlap, neither subset: J = 1/3, M = 1/3
  CHECK(masi_distance(iset({1, 2}), iset({2, 3})) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::set<int> a, b;
    for (int i = 0; i < 5; ++i) {
      if (rng() % 2) a.insert(static_cast<int>(rng() % 6));
      if (rng() % 2) b.insert(static_cast<int>(rng() % 6));
    }
    double d1 = masi_distance(a, b);
    double d2 = masi_distance(b, a);
    CHECK(d1 == d2);
    CHECK(d1 >= 0.0);
    CHECK(d1 <= 1.0);
    CHECK((d1 == 0.0) == (a == b));
  }
}

TEST_CASE("krippendorff_alpha") {
  AgreementInput identical;
  identical.units.resize(3);
  for (auto& unit : identical.units) {
    unit["a"] = {iset({1, 2}), {}};
    unit["b"] = {iset({1, 2}), {}};
  }
  CHECK(krippendorff_alpha(identical, SpanKind::Term) == 1.0);

  // hand-enumerated two-unit fixture:
  // D_o = (0 + 1)/2 = 0.5; every cross-unit pair has distance 1 -> D_e = 1
  AgreementInput fixture;
  fixture.units.resize(2);
  fixture.units[0]["a"] = {iset({0, 1}), {}};
  fixture.units[0]["b"] = {iset({0, 1}), {}};
  fixture.units[1]["a"] = {iset({2}), {}};
  fixture.units[1]["b"] = {iset({3}), {}};
  CHECK(krippendorff_alpha(fixture, SpanKind::Term) == doctest::Approx(0.5).epsilon(1e-12));

  // invariant to unit order and annotator labels
  AgreementInput reordered;
  reordered.units = {fixture.units[1], fixture.units[0]};
  CHECK(krippendorff_alpha(reordered, SpanKind::Term) ==
        doctest::Approx(0.5).epsilon(1e-12));
  AgreementInput relabeled;
  relabeled.units.resize(2);
  relabeled.units[0]["x"] = fixture.units[0]["a"];
  relabeled.units[0]["y"] = fixture.units[0]["b"];
  relabeled.units[1]["x"] = fixture.units[1]["b"];
  relabeled.units[1]["y"] = fixture.units[1]["a"];
  CHECK(krippendorff_alpha(relabeled, SpanKind::Term) ==
        doctest::Approx(0.5).epsilon(1e-12));

  AgreementInput single;
  single.units.resize(2);
  single.units[0]["a"] = {iset({1}), {}};
  single.units[1]["a"] = {iset({2}), {}};
  CHECK_THROWS_AS(krippendorff_alpha(single, SpanKind::Term), Error);
}

TEST_CASE("parse_agreement_jsonl groups annotators by unit") {
  std::string text =
      R"({"doc_id":"p1","sent_index":0,"annotator":"a","term":[0,1],"def":[3]})"
      "\n"
      R"({"doc_id":"p1","sent_index":0,"annotator":"b","term":[0,1],"def":[3,4]})"
      "\n"
      R"({"doc_id":"p1","sent_index":1,"annotator":"a","term":[2],"def":[]})"
      "\n";
  auto input = parse_agreement_jsonl(text);
  REQUIRE(input.units.size() == 2);
  CHECK(input.units[0].size() == 2);
  CHECK(input.units[1].size() == 1);
  CHECK(krippendorff_alpha(input, SpanKind::Term) == 1.0);
}

TEST_CASE("crossval on a symmetric dataset produces identical folds") {
  // every sentence identical: any balanced 2-fold split gives both folds the
  // same train and test multisets, so the fold reports must coincide
  Dataset base = make_cue_corpus(12, 3);
  Dataset uniform;
  uniform.name = "uniform";
  for (int rep = 0; rep < 16; ++rep) uniform.sentences.push_back(base.sentences[1]);
  TrainConfig cfg;
  cfg.epochs = 6;
  auto sym = crossval(uniform, 2, 11, cfg, FeatureExtractor());
  REQUIRE(sym.fold_reports.size() == 2);
  CHECK(report_to_json(sym.fold_reports[0]) == report_to_json(sym.fold_reports[1]));

  // two identical halves: rerunning with the same seed is byte-identical
  Dataset doubled;
  doubled.name = "doubled";
  for (int rep = 0; rep < 2; ++rep) {
    for (const auto& s : base.sentences) doubled.sentences.push_back(s);
  }
  cfg.epochs = 8;
  auto r1 = crossval(doubled, 2, 5, cfg, FeatureExtractor());
  auto r2 = crossval(doubled, 2, 5, cfg, FeatureExtractor());
  CHECK(report_to_json(r1.mean) == report_to_json(r2.mean));
  CHECK(report_to_json(r1.fold_reports[0]) == report_to_json(r2.fold_reports[0]));

  CHECK_THROWS_AS(crossval(base, 13, 5, cfg, FeatureExtractor()), Error);
}

TEST_CASE("crossval is independent of the job count") {
  Dataset data = make_cue_corpus(30, 21);
  TrainConfig cfg;
  cfg.epochs = 6;
  auto a = crossval(data, 3, 9, cfg, FeatureExtractor(), {}, 1);
  auto b = crossval(data, 3, 9, cfg, FeatureExtractor(), {}, 3);
  CHECK(report_to_json(a.mean) == report_to_json(b.mean));
  for (int f = 0; f < 3; ++f) {
    CHECK(a.models[f].emission == b.models[f].emission);
  }
}

TEST_CASE("report serialization is shaped as expected") {
  TagsList gold = {{BT, IT, O, BD, ID}};
  auto r = tag_metrics(gold, gold);
  std::string js = report_to_json(r);
  CHECK(js.find("\"macro\"") != std::string::npos);
  CHECK(js.find("\"per_class\"") != std::string::npos);
  std::string table = report_to_table(r);
  CHECK(table.find("Macro") != std::string::npos);
  CHECK(table.find("Clsf.") != std::string::npos);
}
