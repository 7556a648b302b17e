#include "defx/corpus.hpp"

#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "defx/heuristics.hpp"
#include "defx/io.hpp"
#include "json.hpp"

namespace defx {

using nlohmann::json;

std::string Sentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

std::vector<std::vector<std::size_t>> FoldAssignment::folds() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < fold_of.size(); ++i) out[fold_of[i]].push_back(i);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

namespace {

bool has_whitespace(std::string_view s) {
  return s.find_first_of(" \t\n\r\v\f") != std::string_view::npos;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

ConllParseResult parse_conll(std::string_view text, std::string name) {
  if (text.empty()) throw Error("conll parse error: empty input");

  ConllParseResult res;
  res.dataset.name = std::move(name);
  std::vector<Token> tokens;
  std::vector<SlotTag> tags;

  auto flush = [&]() {
    if (tokens.empty()) return;
    Sentence s;
    auto repaired = repair_bio(tags);
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (repaired[i] != tags[i]) ++res.bio_repairs;
    }
    s.tokens = std::move(tokens);
    s.gold_tags = std::move(repaired);
    res.dataset.sentences.push_back(std::move(s));
    tokens.clear();
    tags.clear();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;

    if (is_blank(line)) {
      flush();
    } else {
      std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos) {
        throw Error("conll parse error at line " + std::to_string(line_no) +
                    ": expected token<TAB>tag");
      }
      std::string_view tok = line.substr(0, tab);
      std::string_view rest = line.substr(tab + 1);
      std::size_t tab2 = rest.find('\t');
      std::string_view tag_str = tab2 == std::string_view::npos ? rest : rest.substr(0, tab2);
      if (tab2 != std::string_view::npos) ++res.ignored_columns;
      if (tok.empty() || has_whitespace(tok)) {
        throw Error("conll parse error at line " + std::to_string(line_no) + ": invalid token");
      }
      SlotTag tag;
      try {
        tag = tag_from_string(tag_str);
      } catch (const Error& e) {
        throw Error("conll parse error at line " + std::to_string(line_no) + ": " + e.what());
      }
      tokens.push_back({std::string(tok), tokens.size()});
      tags.push_back(tag);
    }

    if (nl == text.size()) break;
    pos = nl + 1;
  }
  flush();

  if (res.dataset.sentences.empty()) throw Error("conll parse error: no sentences");
  return res;
}

std::string write_conll(const Dataset& d) {
  std::string out;
  bool first = true;
  for (const Sentence& s : d.sentences) {
    if (!s.gold_tags) throw Error("write_conll: unlabeled sentence");
    if (s.gold_tags->size() != s.tokens.size()) {
      throw Error("write_conll: tag/token length mismatch");
    }
    if (!is_valid_bio(*s.gold_tags)) throw Error("write_conll: invalid BIO sequence");
    if (!first) out += '\n';
    first = false;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const std::string& t = s.tokens[i].text;
      if (t.empty() || has_whitespace(t)) {
        throw Error("write_conll: invalid token '" + t + "'");
      }
      out += t;
      out += '\t';
      out += to_string((*s.gold_tags)[i]);
      out += '\n';
    }
  }
  return out;
}

FoldAssignment split_folds(const Dataset& d, int k, std::uint64_t seed) {
  const std::size_t n = d.sentences.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw Error("split_folds: k out of range (k=" + std::to_string(k) +
                ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // hand-rolled Fisher-Yates: std::shuffle is implementation-defined
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = rng() % (i + 1);
    std::swap(idx[i], idx[j]);
  }
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) fa.fold_of[idx[pos]] = static_cast<int>(pos % k);
  return fa;
}

std::string write_jsonl(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const Sentence& s : sentences) {
    json j;
    if (s.doc_id) j["doc_id"] = *s.doc_id;
    if (s.sent_index) j["sent_index"] = *s.sent_index;
    json toks = json::array();
    for (const Token& t : s.tokens) toks.push_back(t.text);
    j["tokens"] = std::move(toks);
    if (s.gold_tags) {
      json tags = json::array();
      for (SlotTag t : *s.gold_tags) tags.push_back(std::string(to_string(t)));
      j["tags"] = std::move(tags);
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Sentence> parse_jsonl(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (is_blank(line)) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("jsonl parse error at line " + std::to_string(line_no) + ": " + e.what());
    }
    Sentence s;
    if (j.contains("doc_id") && !j["doc_id"].is_null()) s.doc_id = j["doc_id"].get<std::string>();
    if (j.contains("sent_index") && !j["sent_index"].is_null()) {
      s.sent_index = j["sent_index"].get<int>();
    }
    if (!j.contains("tokens") || !j["tokens"].is_array()) {
      throw Error("jsonl parse error at line " + std::to_string(line_no) + ": missing tokens");
    }
    for (const auto& t : j["tokens"]) {
      std::string txt = t.get<std::string>();
      if (txt.empty() || has_whitespace(txt)) {
        throw Error("jsonl parse error at line " + std::to_string(line_no) + ": invalid token");
      }
      s.tokens.push_back({std::move(txt), s.tokens.size()});
    }
    if (j.contains("tags") && !j["tags"].is_null()) {
      std::vector<SlotTag> tags;
      for (const auto& t : j["tags"]) tags.push_back(tag_from_string(t.get<std::string>()));
      if (tags.size() != s.tokens.size()) {
        throw Error("jsonl parse error at line " + std::to_string(line_no) +
                    ": tag/token length mismatch");
      }
      if (!is_valid_bio(tags)) {
        throw Error("jsonl parse error at line " + std::to_string(line_no) +
                    ": invalid BIO sequence");
      }
      s.gold_tags = std::move(tags);
    }
    out.push_back(std::move(s));
  }
  return out;
}

Dataset load_dataset(const std::string& path) {
  std::string text = read_file(path);
  if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0) {
    Dataset d;
    d.name = path;
    d.sentences = parse_jsonl(text);
    for (const Sentence& s : d.sentences) {
      if (!s.gold_tags) throw Error("dataset " + path + ": unlabeled sentence");
    }
    return d;
  }
  return parse_conll(text, path).dataset;
}

}  // namespace defx
