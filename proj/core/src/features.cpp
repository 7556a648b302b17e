#include "defx/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "defx/io.hpp"
#include "defx/preprocess.hpp"
#include "json.hpp"

namespace defx {

using nlohmann::json;

void FeatureVector::add(std::string name) { active.push_back(std::move(name)); }

void FeatureVector::finish() {
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
}

bool FeatureVector::contains(std::string_view name) const {
  return std::binary_search(active.begin(), active.end(), name);
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::unordered_set<std::string>& det_words() {
  static const std::unordered_set<std::string> w = {
      "the", "a",     "an",   "this",  "that", "these",   "those", "each",
      "every", "some", "any",  "no",    "all",  "both",    "such",  "another",
      "its", "their", "our",  "whose"};
  return w;
}

const std::unordered_set<std::string>& prep_words() {
  static const std::unordered_set<std::string> w = {
      "of", "in", "on", "at", "by", "for", "with", "from", "to", "as", "into",
      "onto", "over", "under", "between", "through", "during", "against",
      "among", "within", "without", "across", "behind", "beyond", "near",
      "via", "per", "after", "before", "since", "until", "toward", "towards",
      "upon", "about", "around", "along"};
  return w;
}

const std::unordered_set<std::string>& verb_words() {
  static const std::unordered_set<std::string> w = {
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have",
      "had", "do", "does", "did", "can", "could", "will", "would", "shall",
      "should", "may", "might", "must", "denote", "denotes", "define",
      "defines", "defined", "refer", "refers", "call", "calls", "called",
      "known", "use", "uses", "show", "shows", "compute", "computes",
      "combine", "combines", "contain", "contains", "provide", "provides",
      "describe", "describes", "represent", "represents", "measure",
      "measures", "perform", "performs", "learn", "learns", "predict",
      "predicts", "encode", "encodes", "extract", "extracts"};
  return w;
}

const std::unordered_set<std::string>& adv_words() {
  static const std::unordered_set<std::string> w = {
      "very", "also", "often", "however", "thus", "then", "not", "never",
      "always", "usually", "typically", "only", "more", "most", "less",
      "least", "quite", "rather", "too", "well", "here", "there",
      "respectively", "together"};
  return w;
}

bool ends_with(std::string_view s, std::string_view suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

constexpr std::string_view kDefaultPatternText =
    "# defx pattern inventory v1\n"
    "# FLAG<TAB>token-regex [token-regex ...]; each element fully matches one\n"
    "# token, case-insensitive; multi-element rules match consecutive tokens.\n"
    "COPULA_CUE\tis|are\n"
    "DEFINED_AS_CUE\tis defined as\n"
    "DEFINES_CUE\tdefines\n"
    "REFERS_TO_CUE\trefers to\n"
    "DENOTES_CUE\tdenotes\n"
    "CALLED_CUE\tcalled\n"
    "KNOWN_AS_CUE\tknown as\n";

}  // namespace

std::string_view coarse_pos(std::string_view token) {
  if (is_inline_math(token) || token == "EQUATION") return "MATH";

  bool has_alpha = false, has_digit = false, has_other = false;
  for (char c : token) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      has_alpha = true;
    } else if (std::isdigit(u)) {
      has_digit = true;
    } else {
      has_other = true;
    }
  }
  if (!has_alpha && !has_digit) return "PUNCT";
  if (has_digit && !has_alpha) {
    bool numeric = std::all_of(token.begin(), token.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == ',' ||
             c == '%' || c == '+' || c == '-';
    });
    if (numeric) return "NUM";
  }

  std::string w = lower(token);
  if (det_words().count(w)) return "DET";
  if (prep_words().count(w)) return "PREP";
  if (verb_words().count(w)) return "VERB";
  if (adv_words().count(w)) return "ADV";

  if (w.size() >= 4) {
    if (ends_with(w, "ly")) return "ADV";
    for (std::string_view suf : {"tion", "sion", "ment", "ness", "ity", "ance",
                                 "ence", "ysis", "ogy", "ism", "ist"}) {
      if (ends_with(w, suf)) return "NOUN";
    }
    for (std::string_view suf : {"ous", "ive", "able", "ible", "ful", "less",
                                 "ical", "ary", "ish"}) {
      if (ends_with(w, suf)) return "ADJ";
    }
    for (std::string_view suf : {"ize", "ise", "ify"}) {
      if (ends_with(w, suf)) return "VERB";
    }
    if (ends_with(w, "ing") || ends_with(w, "ed")) return "VERB";
    if (ends_with(w, "al") || ends_with(w, "ic")) return "ADJ";
    if (ends_with(w, "er") || ends_with(w, "or")) return "NOUN";
  }
  if (has_alpha && !has_digit && !has_other) return "NOUN";
  return "OTHER";
}

std::string word_shape(std::string_view token) {
  if (is_inline_math(token)) return "$";
  std::string shape;
  for (char c : token) {
    unsigned char u = static_cast<unsigned char>(c);
    char cls;
    if (std::isupper(u)) {
      cls = 'X';
    } else if (std::islower(u)) {
      cls = 'x';
    } else if (std::isdigit(u)) {
      cls = 'd';
    } else {
      cls = c;
    }
    if (shape.empty() || shape.back() != cls) shape += cls;
  }
  return shape;
}

const PatternInventory& PatternInventory::defaults() {
  static const PatternInventory inv = PatternInventory::parse(kDefaultPatternText);
  return inv;
}

PatternInventory PatternInventory::parse(std::string_view text) {
  PatternInventory inv;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    bool last = nl == text.size();
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') {
      if (last) break;
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error("pattern inventory line " + std::to_string(line_no) +
                  ": expected FLAG<TAB>pattern");
    }
    Rule rule;
    rule.flag = std::string(line.substr(0, tab));
    std::string_view rest = line.substr(tab + 1);
    std::size_t p = 0;
    while (p < rest.size()) {
      std::size_t sp = rest.find(' ', p);
      if (sp == std::string_view::npos) sp = rest.size();
      if (sp > p) rule.elements.emplace_back(rest.substr(p, sp - p));
      p = sp + 1;
    }
    if (rule.elements.empty()) {
      throw Error("pattern inventory line " + std::to_string(line_no) + ": empty pattern");
    }
    for (const std::string& e : rule.elements) {
      try {
        rule.compiled.emplace_back(e, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& err) {
        throw Error("pattern inventory line " + std::to_string(line_no) + ": bad regex '" + e +
                    "': " + err.what());
      }
    }
    inv.rules.push_back(std::move(rule));
    if (last) break;
  }
  return inv;
}

PatternInventory PatternInventory::load(const std::string& path) {
  return parse(read_file(path));
}

bool is_short_form_candidate(std::string_view token) {
  if (token.size() < 2 || token.size() > 10) return false;
  if (!std::isalnum(static_cast<unsigned char>(token[0]))) return false;
  return std::any_of(token.begin(), token.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

namespace {

// Right-to-left Schwartz-Hearst character match. Returns the char offset in
// `long_str` where the long form starts, or npos when no match exists. The
// first short-form character must sit at a word start.
std::size_t best_long_form(const std::string& sf, const std::string& long_str) {
  auto low = [](char c) { return std::tolower(static_cast<unsigned char>(c)); };
  long l_index = static_cast<long>(long_str.size()) - 1;
  for (long s_index = static_cast<long>(sf.size()) - 1; s_index >= 0; --s_index) {
    char c = static_cast<char>(low(sf[s_index]));
    if (!std::isalnum(static_cast<unsigned char>(c))) continue;
    while ((l_index >= 0 && low(long_str[l_index]) != c) ||
           (s_index == 0 && l_index > 0 &&
            std::isalnum(static_cast<unsigned char>(long_str[l_index - 1])))) {
      --l_index;
    }
    if (l_index < 0) return std::string::npos;
    --l_index;
  }
  // l_index sits one before the first matched char; back up to its word start
  if (l_index < 0) return 0;
  std::size_t space = long_str.rfind(' ', static_cast<std::size_t>(l_index));
  return space == std::string::npos ? 0 : space + 1;
}

}  // namespace

std::vector<AbbreviationPair> detect_abbreviations(const Sentence& s) {
  std::vector<AbbreviationPair> out;
  const auto& toks = s.tokens;
  for (std::size_t p = 0; toks.size() >= 3 && p + 2 < toks.size(); ++p) {
    if (toks[p].text != "(" || toks[p + 2].text != ")") continue;
    const std::string& sf = toks[p + 1].text;
    if (!is_short_form_candidate(sf)) continue;
    if (p == 0) continue;  // no preceding words

    std::size_t max_words = std::min(sf.size() + 5, 2 * sf.size());
    std::size_t first = p > max_words ? p - max_words : 0;

    std::string joined;
    std::vector<std::size_t> tok_offsets;
    for (std::size_t t = first; t < p; ++t) {
      if (t > first) joined += ' ';
      tok_offsets.push_back(joined.size());
      joined += toks[t].text;
    }

    std::size_t off = best_long_form(sf, joined);
    if (off == std::string::npos) continue;
    auto it = std::find(tok_offsets.begin(), tok_offsets.end(), off);
    if (it == tok_offsets.end()) continue;  // match did not land on a token start
    std::size_t long_start = first + static_cast<std::size_t>(it - tok_offsets.begin());

    std::string long_str = joined.substr(off);
    if (long_str.size() < sf.size()) continue;
    if (p - long_start > max_words) continue;
    bool contains_sf = false;
    for (std::size_t t = long_start; t < p; ++t) {
      if (toks[t].text == sf) contains_sf = true;
    }
    if (contains_sf) continue;

    out.push_back({sf, long_start, p});
  }
  return out;
}

std::vector<FlagSet> pattern_flags(const Sentence& s, const PatternInventory& inv) {
  const std::size_t n = s.size();
  std::vector<std::vector<std::string>> flags(n);

  auto add = [&](std::size_t t, std::string f) { flags[t].push_back(std::move(f)); };

  for (const auto& rule : inv.rules) {
    const std::size_t m = rule.compiled.size();
    if (m == 0 || m > n) continue;
    for (std::size_t i = 0; i + m <= n; ++i) {
      bool ok = true;
      for (std::size_t t = 0; ok && t < m; ++t) {
        ok = std::regex_match(s.tokens[i + t].text, rule.compiled[t]);
      }
      if (!ok) continue;
      for (std::size_t t = i; t < i + m; ++t) add(t, rule.flag);
      for (std::size_t d = 1; d <= 2; ++d) {
        if (i >= d) add(i - d, rule.flag + "@-" + std::to_string(d));
        if (i + m - 1 + d < n) add(i + m - 1 + d, rule.flag + "@+" + std::to_string(d));
      }
    }
  }

  // acronym structure: "<long form> ( <short> )"
  for (std::size_t p = 0; n >= 3 && p + 2 < n; ++p) {
    if (s.tokens[p].text != "(" || s.tokens[p + 2].text != ")") continue;
    if (!is_short_form_candidate(s.tokens[p + 1].text)) continue;
    add(p, "ACRO_OPEN");
    add(p + 1, "ACRO_SHORT");
    add(p + 2, "ACRO_CLOSE");
  }
  for (const auto& pair : detect_abbreviations(s)) {
    for (std::size_t t = pair.long_start; t < pair.long_end; ++t) add(t, "ACRO_LONG");
  }

  std::vector<FlagSet> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::sort(flags[t].begin(), flags[t].end());
    flags[t].erase(std::unique(flags[t].begin(), flags[t].end()), flags[t].end());
    out[t] = std::move(flags[t]);
  }
  return out;
}

FeatureExtractor::FeatureExtractor() {
  static const std::shared_ptr<const PatternInventory> shared_defaults =
      std::make_shared<PatternInventory>(PatternInventory::defaults());
  inventory_ = shared_defaults;
}

FeatureExtractor::FeatureExtractor(PatternInventory inv)
    : inventory_(std::make_shared<PatternInventory>(std::move(inv))) {}

namespace {

std::string head_bucket(int head, std::size_t t) {
  if (head < 0) return "ROOT";
  long d = static_cast<long>(head) - static_cast<long>(t);
  if (d <= -3) return "-3+";
  if (d >= 3) return "+3+";
  return (d > 0 ? "+" : "") + std::to_string(d);
}

}  // namespace

std::vector<FeatureVector> FeatureExtractor::extract(const Sentence& s) const {
  const std::size_t n = s.size();
  std::vector<FeatureVector> out(n);
  if (n == 0) return out;

  auto flags = pattern_flags(s, *inventory_);
  const TokenAnnotations* ann =
      annotations_ ? find_annotations(*annotations_, s) : nullptr;
  std::vector<std::string> lowers(n);
  std::vector<std::string_view> pos(n);
  for (std::size_t t = 0; t < n; ++t) {
    lowers[t] = lower(s.tokens[t].text);
    pos[t] = coarse_pos(s.tokens[t].text);
  }

  static const char* kOffsets[4] = {"-2", "-1", "+1", "+2"};
  static const int kDeltas[4] = {-2, -1, 1, 2};

  for (std::size_t t = 0; t < n; ++t) {
    const std::string& text = s.tokens[t].text;
    FeatureVector& fv = out[t];
    fv.add("w:" + lowers[t]);
    fv.add("shape:" + word_shape(text));
    for (std::size_t k = 2; k <= 4; ++k) {
      if (lowers[t].size() < k) break;
      fv.add("p" + std::to_string(k) + ":" + lowers[t].substr(0, k));
      fv.add("s" + std::to_string(k) + ":" + lowers[t].substr(lowers[t].size() - k));
    }
    fv.add("pos:" + std::string(pos[t]));
    if (is_inline_math(text)) fv.add("math:1");
    if (is_placeholder(text)) fv.add("ph:1");
    unsigned char first = static_cast<unsigned char>(text[0]);
    if (std::isupper(first)) fv.add("cap:1");
    bool any_alpha = false, all_upper = true;
    for (char c : text) {
      unsigned char u = static_cast<unsigned char>(c);
      if (std::isalpha(u)) {
        any_alpha = true;
        if (!std::isupper(u)) all_upper = false;
      }
    }
    if (any_alpha && all_upper) fv.add("upper:1");

    for (int d = 0; d < 4; ++d) {
      long idx = static_cast<long>(t) + kDeltas[d];
      std::string wv, pv;
      if (idx < 0) {
        wv = pv = "<BOS>";
      } else if (idx >= static_cast<long>(n)) {
        wv = pv = "<EOS>";
      } else {
        wv = lowers[idx];
        pv = std::string(pos[idx]);
      }
      fv.add(std::string("w[") + kOffsets[d] + "]:" + wv);
      fv.add(std::string("pos[") + kOffsets[d] + "]:" + pv);
    }
    for (const std::string& f : flags[t]) fv.add("pat:" + f);
    if (ann) {
      if (!ann->pos.empty()) fv.add("xpos:" + ann->pos[t]);
      if (!ann->heads.empty()) {
        int head = ann->heads[t];
        fv.add("dep:" + head_bucket(head, t));
        if (head >= 0 && static_cast<std::size_t>(head) < n) {
          fv.add("hw:" + lowers[static_cast<std::size_t>(head)]);
        }
      }
      if (!ann->entities.empty() && ann->entities[t] != "O") {
        fv.add("ent:" + ann->entities[t]);
      }
    }
    fv.finish();
  }
  return out;
}

AnnotationMap parse_annotations(std::string_view text) {
  AnnotationMap out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("annotation parse error at line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    if (!j.contains("doc_id") || !j.contains("sent_index")) {
      throw Error("annotation parse error at line " + std::to_string(line_no) +
                  ": need doc_id and sent_index");
    }
    ScoreKey key{j["doc_id"].get<std::string>(), j["sent_index"].get<int>()};
    TokenAnnotations ann;
    if (j.contains("pos")) ann.pos = j["pos"].get<std::vector<std::string>>();
    if (j.contains("heads")) ann.heads = j["heads"].get<std::vector<int>>();
    if (j.contains("entities")) ann.entities = j["entities"].get<std::vector<std::string>>();
    if (!out.emplace(std::move(key), std::move(ann)).second) {
      throw Error("annotation parse error at line " + std::to_string(line_no) +
                  ": duplicate key");
    }
  }
  return out;
}

AnnotationMap load_annotations(const std::string& path) {
  return parse_annotations(read_file(path));
}

const TokenAnnotations* find_annotations(const AnnotationMap& annotations, const Sentence& s) {
  if (!s.doc_id || !s.sent_index) return nullptr;
  auto it = annotations.find({*s.doc_id, *s.sent_index});
  if (it == annotations.end()) return nullptr;
  auto check = [&](std::size_t len, const char* what) {
    if (len != 0 && len != s.size()) {
      throw Error(std::string("annotation length mismatch (") + what + ") for (" + *s.doc_id +
                  ", " + std::to_string(*s.sent_index) + ")");
    }
  };
  check(it->second.pos.size(), "pos");
  check(it->second.heads.size(), "heads");
  check(it->second.entities.size(), "entities");
  return &it->second;
}

ScoreMap parse_external_scores(std::string_view text) {
  ScoreMap out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("scores parse error at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("doc_id") || !j.contains("sent_index") || !j.contains("scores")) {
      throw Error("scores parse error at line " + std::to_string(line_no) +
                  ": need doc_id, sent_index, scores");
    }
    ScoreKey key{j["doc_id"].get<std::string>(), j["sent_index"].get<int>()};
    ExternalScores sc;
    for (const auto& row : j["scores"]) {
      if (!row.is_array() || row.size() != kNumTags) {
        throw Error("scores parse error at line " + std::to_string(line_no) +
                    ": each row needs " + std::to_string(kNumTags) + " values");
      }
      std::array<double, kNumTags> r{};
      for (int y = 0; y < kNumTags; ++y) {
        r[y] = row[y].get<double>();
        if (!std::isfinite(r[y])) {
          throw Error("scores parse error at line " + std::to_string(line_no) +
                      ": non-finite value");
        }
      }
      sc.rows.push_back(r);
    }
    if (!out.emplace(std::move(key), std::move(sc)).second) {
      throw Error("scores parse error at line " + std::to_string(line_no) + ": duplicate key");
    }
  }
  return out;
}

ScoreMap load_external_scores(const std::string& path) {
  return parse_external_scores(read_file(path));
}

const ExternalScores* find_scores(const ScoreMap& scores, const Sentence& s) {
  if (!s.doc_id || !s.sent_index) return nullptr;
  auto it = scores.find({*s.doc_id, *s.sent_index});
  if (it == scores.end()) return nullptr;
  if (it->second.rows.size() != s.size()) {
    throw Error("external scores length mismatch for (" + *s.doc_id + ", " +
                std::to_string(*s.sent_index) + "): " + std::to_string(it->second.rows.size()) +
                " rows for " + std::to_string(s.size()) + " tokens");
  }
  return &it->second;
}

void validate_scores(const ScoreMap& scores, const std::vector<Sentence>& sentences) {
  for (const Sentence& s : sentences) find_scores(scores, s);
}

}  // namespace defx
