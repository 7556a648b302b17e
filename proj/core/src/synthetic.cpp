#include "defx/synthetic.hpp"

#include <random>

namespace defx {

namespace {

const std::vector<std::string> kAdjectives = {
    "textual", "latent",  "spectral", "neural",    "stochastic", "greedy",
    "convex",  "sparse",  "modular",  "recursive", "weighted",   "lexical"};

const std::vector<std::string> kNouns = {
    "entailment", "coreference", "segmentation", "lattice",  "grammar",
    "centroid",   "kernel",      "manifold",     "operator", "embedding",
    "automaton",  "projection",  "alignment",    "calculus", "ontology",
    "taxonomy"};

const std::vector<std::string> kAcronyms = {"WSD", "SRL", "NER", "CRF", "HMM",
                                            "SVM", "LDA", "PCA", "ILP", "MDG"};

const std::vector<std::string> kMathTerms = {"$x$",   "$\\theta$", "$\\gamma$",
                                             "$s^{task}$", "$h_t$", "$\\alpha$"};

const std::vector<std::vector<std::string>> kCues = {
    {"is"},           {"are"},        {"denotes"},      {"defines"},
    {"is", "defined", "as"},          {"refers", "to"}, {"is", "called"},
    {"is", "known", "as"}};

const std::vector<std::string> kDefDets = {"the", "a"};
const std::vector<std::string> kDefNouns = {
    "task",    "method",   "measure",  "model",          "procedure", "score",
    "function", "mapping", "structure", "representation", "process",  "strategy"};
const std::vector<std::string> kDefPreps = {"of", "for"};
const std::vector<std::string> kDefGerunds = {
    "determining", "estimating", "clustering", "ranking",  "segmenting",
    "aligning",    "scoring",    "parsing",    "encoding", "labeling",
    "grouping",    "resolving"};
const std::vector<std::vector<std::string>> kDefObjects = {
    {"sentence", "pairs"},   {"token", "spans"},      {"parse", "trees"},
    {"word", "senses"},      {"entity", "mentions"},  {"document", "graphs"},
    {"feature", "weights"},  {"latent", "states"},    {"span", "boundaries"},
    {"cluster", "assignments"}};

const std::vector<std::vector<std::string>> kNegatives = {
    {"We", "evaluate", "the", "system", "on", "three", "benchmarks", "."},
    {"Results", "are", "reported", "in", "TABLE", "."},
    {"See", "FIGURE", "for", "an", "overview", "."},
    {"Our", "experiments", "use", "default", "settings", "."},
    {"This", "section", "reviews", "prior", "work", "."},
    {"Training", "details", "appear", "in", "SECTION", "."},
    {"We", "thank", "the", "reviewers", "for", "comments", "."},
    {"The", "corpus", "statistics", "are", "shown", "in", "TABLE", "."},
    {"All", "runs", "share", "one", "random", "seed", "."},
    {"Code", "will", "be", "released", "after", "publication", "."}};

struct Builder {
  std::vector<Token> tokens;
  std::vector<SlotTag> tags;

  void add(const std::string& text, SlotTag tag) {
    tokens.push_back({text, tokens.size()});
    tags.push_back(tag);
  }
  void add_span(const std::vector<std::string>& words, SpanKind kind) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      add(words[i], i == 0 ? begin_tag(kind) : inside_tag(kind));
    }
  }
  Sentence finish() {
    Sentence s;
    s.tokens = std::move(tokens);
    s.gold_tags = std::move(tags);
    return s;
  }
};

}  // namespace

Dataset make_cue_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](const auto& v) -> const auto& { return v[rng() % v.size()]; };

  Dataset out;
  out.name = "cue-corpus";
  for (std::size_t i = 0; i < n; ++i) {
    Builder b;
    std::size_t roll = rng() % 100;
    if (roll < 60) {
      // "The <adj noun> <cue> <the noun of gerund obj obj> ."
      b.add(rng() % 2 == 0 ? "The" : "A", SlotTag::O);
      std::vector<std::string> term;
      term.push_back(pick(kAdjectives));
      if (rng() % 3 == 0) term.push_back(pick(kAdjectives));
      term.push_back(pick(kNouns));
      b.add_span(term, SpanKind::Term);
      for (const std::string& c : pick(kCues)) b.add(c, SlotTag::O);
      std::vector<std::string> def = {pick(kDefDets), pick(kDefNouns), pick(kDefPreps),
                                      pick(kDefGerunds)};
      for (const std::string& w : pick(kDefObjects)) def.push_back(w);
      b.add_span(def, SpanKind::Def);
      b.add(".", SlotTag::O);
    } else if (roll < 75) {
      b.add_span({pick(kAcronyms)}, SpanKind::Term);
      for (const std::string& c : pick(kCues)) b.add(c, SlotTag::O);
      std::vector<std::string> def = {pick(kDefDets), pick(kDefNouns), pick(kDefPreps),
                                      pick(kDefGerunds)};
      for (const std::string& w : pick(kDefObjects)) def.push_back(w);
      b.add_span(def, SpanKind::Def);
      b.add(".", SlotTag::O);
    } else if (roll < 80) {
      b.add_span({pick(kMathTerms)}, SpanKind::Term);
      b.add(rng() % 2 == 0 ? "denotes" : "is", SlotTag::O);
      std::vector<std::string> def = {pick(kDefDets), pick(kDefNouns), pick(kDefPreps),
                                      pick(kDefGerunds)};
      for (const std::string& w : pick(kDefObjects)) def.push_back(w);
      b.add_span(def, SpanKind::Def);
      b.add(".", SlotTag::O);
    } else {
      for (const std::string& w : pick(kNegatives)) b.add(w, SlotTag::O);
    }
    Sentence s = b.finish();
    s.doc_id = "synthetic";
    s.sent_index = static_cast<int>(i);
    out.sentences.push_back(std::move(s));
  }
  return out;
}

}  // namespace defx
