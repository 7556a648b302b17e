#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cctype>
#include <functional>

#include "defx/features.hpp"
#include "defx/preprocess.hpp"
#include "doctest.h"

using namespace defx;

namespace {

Sentence sent(const std::string& text) {
  Sentence s;
  s.tokens = tokenize(text);
  return s;
}

bool has_flag(const FlagSet& flags, const std::string& f) {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

}  // namespace

TEST_CASE("coarse_pos") {
  CHECK(coarse_pos("$s^{task}$") == "MATH");
  CHECK(coarse_pos("EQUATION") == "MATH");
  CHECK(coarse_pos(".") == "PUNCT");
  CHECK(coarse_pos("2018") == "NUM");
  CHECK(coarse_pos("the") == "DET");
  CHECK(coarse_pos("of") == "PREP");
  CHECK(coarse_pos("is") == "VERB");
  CHECK(coarse_pos("quickly") == "ADV");
  CHECK(coarse_pos("segmentation") == "NOUN");
  CHECK(coarse_pos("neural") == "ADJ");
  CHECK(coarse_pos("lattice") == "NOUN");
}

TEST_CASE("word_shape") {
  CHECK(word_shape("Textual") == "Xx");
  CHECK(word_shape("biLM") == "xX");
  CHECK(word_shape("WSD") == "X");
  CHECK(word_shape("2018") == "d");
  CHECK(word_shape("$s^{task}$") == "$");
}

TEST_CASE("extract emits math and shape features") {
  auto fvs = FeatureExtractor().extract(sent("$s^{task}$ are weights"));
  REQUIRE(fvs.size() == 3);
  CHECK(fvs[0].contains("pos:MATH"));
  CHECK(fvs[0].contains("shape:$"));
  CHECK(fvs[0].contains("math:1"));
}

TEST_CASE("extract flags cue words") {
  auto fvs = FeatureExtractor().extract(sent("A graph-based operator defines a transformation"));
  REQUIRE(fvs.size() == 6);
  CHECK(fvs[3].contains("pat:DEFINES_CUE"));
  CHECK(fvs[2].contains("pat:DEFINES_CUE@-1"));
  CHECK(fvs[4].contains("pat:DEFINES_CUE@+1"));
}

TEST_CASE("extract uses BOS/EOS sentinels at the edges") {
  auto fvs = FeatureExtractor().extract(sent("alpha beta"));
  REQUIRE(fvs.size() == 2);
  CHECK(fvs[0].contains("w[-1]:<BOS>"));
  CHECK(fvs[0].contains("w[-2]:<BOS>"));
  CHECK(fvs[0].contains("w[+1]:beta"));
  CHECK(fvs[1].contains("w[+1]:<EOS>"));
}

TEST_CASE("pattern_flags marks copula and acronym structure") {
  auto flags = pattern_flags(sent("Textual entailment is the task of determining ..."),
                             PatternInventory::defaults());
  CHECK(has_flag(flags[2], "COPULA_CUE"));
  CHECK(has_flag(flags[1], "COPULA_CUE@-1"));

  auto acro = pattern_flags(sent("word sense disambiguation ( WSD )"),
                            PatternInventory::defaults());
  CHECK(has_flag(acro[3], "ACRO_OPEN"));
  CHECK(has_flag(acro[4], "ACRO_SHORT"));
  CHECK(has_flag(acro[5], "ACRO_CLOSE"));
  CHECK(has_flag(acro[0], "ACRO_LONG"));

  auto none = pattern_flags(sent("plain words only here"), PatternInventory::defaults());
  for (const auto& f : none) CHECK(f.empty());
}

TEST_CASE("pattern inventory parses and rejects bad lines") {
  auto inv = PatternInventory::parse("MY_FLAG\tfoo|bar baz\n# comment\n");
  REQUIRE(inv.rules.size() == 1);
  CHECK(inv.rules[0].elements.size() == 2);
  CHECK_THROWS_AS(PatternInventory::parse("NO_TAB_HERE\n"), Error);
  CHECK_THROWS_AS(PatternInventory::parse("F\t[unclosed\n"), Error);
}

TEST_CASE("schwartz-hearst extracts standard pairs") {
  auto pairs = detect_abbreviations(sent("word sense disambiguation ( WSD ) task"));
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].short_form == "WSD");
  CHECK(pairs[0].long_start == 0);
  CHECK(pairs[0].long_end == 3);
}

TEST_CASE("schwartz-hearst matches right-to-left") {
  // "deep" is dropped: the b anchors to "bidirectional"
  auto pairs = detect_abbreviations(sent("deep bidirectional language model ( biLM )"));
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].short_form == "biLM");
  CHECK(pairs[0].long_start == 1);
  CHECK(pairs[0].long_end == 4);
}

TEST_CASE("schwartz-hearst rejects non-candidates") {
  CHECK(detect_abbreviations(sent("published in ( 2018 )")).empty());
  CHECK(detect_abbreviations(sent("( WSD ) with nothing before")).empty());
  CHECK(detect_abbreviations(sent("mismatch here ( QQQ )")).empty());
}

TEST_CASE("schwartz-hearst pairs satisfy the length and subsequence constraints") {
  std::vector<std::string> sentences = {
      "word sense disambiguation ( WSD ) task",
      "deep bidirectional language model ( biLM )",
      "semantic role labeling ( SRL ) system",
      "conditional random field ( CRF ) baseline",
      "the Stanford Natural Language Inference ( SNLI ) corpus",
  };
  for (const auto& text : sentences) {
    Sentence s = sent(text);
    for (const auto& p : detect_abbreviations(s)) {
      CHECK(p.long_end - p.long_start <= std::min(p.short_form.size() + 5, 2 * p.short_form.size()));
      std::string joined;
      for (std::size_t t = p.long_start; t < p.long_end; ++t) {
        if (t > p.long_start) joined += ' ';
        joined += s.tokens[t].text;
      }
      // every alnum short-form char appears in order in the long form
      std::size_t at = 0;
      bool ok = true;
      for (char c : p.short_form) {
        if (!std::isalnum(static_cast<unsigned char>(c))) continue;
        char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        while (at < joined.size() &&
               std::tolower(static_cast<unsigned char>(joined[at])) != lc) {
          ++at;
        }
        if (at == joined.size()) {
          ok = false;
          break;
        }
        ++at;
      }
      CHECK(ok);
    }
  }
}

TEST_CASE("annotation channel adds external POS, dependency, and entity features") {
  std::string text =
      R"({"doc_id":"d","sent_index":0,"pos":["DT","NN"],"heads":[1,-1],"entities":["O","B-METHOD"]})"
      "\n";
  AnnotationMap ann = parse_annotations(text);

  Sentence s;
  s.tokens = {{"the", 0}, {"parser", 1}};
  s.doc_id = "d";
  s.sent_index = 0;

  FeatureExtractor fx;
  fx.set_annotations(&ann);
  auto fvs = fx.extract(s);
  REQUIRE(fvs.size() == 2);
  CHECK(fvs[0].contains("xpos:DT"));
  CHECK(fvs[0].contains("dep:+1"));
  CHECK(fvs[0].contains("hw:parser"));
  CHECK(fvs[1].contains("xpos:NN"));
  CHECK(fvs[1].contains("dep:ROOT"));
  CHECK(fvs[1].contains("ent:B-METHOD"));

  // no provenance or no entry: annotations silently absent
  Sentence anon;
  anon.tokens = {{"x", 0}};
  CHECK(!FeatureExtractor().extract(anon).empty());
  CHECK(find_annotations(ann, anon) == nullptr);

  // length mismatch names the key
  Sentence wrong = s;
  wrong.tokens.push_back({"extra", 2});
  CHECK_THROWS_AS(find_annotations(ann, wrong), Error);

  CHECK_THROWS_AS(parse_annotations(R"({"pos":["DT"]})"), Error);
}

TEST_CASE("extractor with a custom inventory survives copies") {
  std::function<std::vector<FeatureVector>(const Sentence&)> fn;
  {
    FeatureExtractor fx{PatternInventory::parse("MY_CUE\tmeans\n")};
    fn = fx;  // copies the extractor; the original dies at scope end
  }
  Sentence s = sent("alpha means beta");
  auto fvs = fn(s);
  REQUIRE(fvs.size() == 3);
  CHECK(fvs[1].contains("pat:MY_CUE"));
}

TEST_CASE("external scores parse and validate") {
  std::string good =
      R"({"doc_id":"d","sent_index":0,"scores":[[0,0,0,0,0],[1,2,3,4,5]]})"
      "\n";
  auto map = parse_external_scores(good);
  REQUIRE(map.size() == 1);
  CHECK(map.begin()->second.rows.size() == 2);

  Sentence s;
  s.tokens = {{"a", 0}, {"b", 1}};
  s.doc_id = "d";
  s.sent_index = 0;
  CHECK(find_scores(map, s) != nullptr);

  s.tokens.push_back({"c", 2});
  CHECK_THROWS_AS(find_scores(map, s), Error);

  Sentence anon;
  anon.tokens = {{"a", 0}};
  CHECK(find_scores(map, anon) == nullptr);

  CHECK_THROWS_AS(parse_external_scores(R"({"doc_id":"d","sent_index":0,"scores":[[1,2,3]]})"),
                  Error);
  CHECK_THROWS_AS(parse_external_scores(
                      R"({"doc_id":"d","sent_index":0,"scores":[[1e999,0,0,0,0]]})"),
                  Error);
}
