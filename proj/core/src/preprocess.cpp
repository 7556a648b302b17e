#include "defx/preprocess.hpp"

#include <array>
#include <cctype>

#include "defx/io.hpp"

namespace defx {

namespace {

constexpr std::string_view kSplitPunct = ".,;:!?()[]{}\"";

const char* kDefaultAbbrevs[] = {
    "et al.", "e.g.", "i.e.", "cf.", "vs.", "etc.", "resp.", "w.r.t.", "i.i.d.",
    "Fig.", "Figs.", "Eq.", "Eqs.", "Sec.", "Secs.", "Tab.", "Alg.", "Thm.",
    "Ch.", "Vol.", "No.", "pp.", "Dr.", "Prof.", "Mr.", "Ms.", "approx.",
};

bool starts_with_at(std::string_view s, std::size_t i, std::string_view pat) {
  return s.size() - i >= pat.size() && s.compare(i, pat.size(), pat) == 0;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending = true;
    } else {
      if (pending) out += ' ';
      pending = false;
      out += c;
    }
  }
  return out;
}

std::size_t find_or_throw(std::string_view body, std::string_view pat, std::size_t from,
                          std::size_t err_offset, const std::string& what) {
  std::size_t p = body.find(pat, from);
  if (p == std::string_view::npos) {
    throw Error(what + " at byte offset " + std::to_string(err_offset));
  }
  return p;
}

// Closing '$' of an inline-math region opened at `open` ("\$" is literal).
std::size_t close_inline_math(std::string_view body, std::size_t open) {
  std::size_t j = open + 1;
  while (j < body.size()) {
    if (body[j] == '\\' && j + 1 < body.size() && body[j + 1] == '$') {
      j += 2;
      continue;
    }
    if (body[j] == '$') return j;
    ++j;
  }
  throw Error("unbalanced '$' delimiter at byte offset " + std::to_string(open));
}

}  // namespace

const AbbrevList& AbbrevList::defaults() {
  static const AbbrevList list = [] {
    AbbrevList l;
    for (const char* a : kDefaultAbbrevs) l.entries.emplace_back(a);
    return l;
  }();
  return list;
}

AbbrevList AbbrevList::load(const std::string& path) {
  AbbrevList l;
  std::string text = read_file(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    l.entries.push_back(std::move(line));
  }
  return l;
}

RawDocument normalize(const RawDocument& doc) {
  const std::string& b = doc.body;
  const std::size_t n = b.size();
  std::string out;
  out.reserve(n);

  static constexpr std::array<std::string_view, 3> kCiteCmds = {"\\citep{", "\\citet{",
                                                                "\\cite{"};
  static constexpr std::array<std::string_view, 3> kRefCmds = {"\\autoref{", "\\cref{",
                                                               "\\ref{"};
  static constexpr std::array<std::string_view, 4> kMathEnvs = {
      "\\begin{equation*}", "\\begin{equation}", "\\begin{align*}", "\\begin{align}"};
  static constexpr std::array<std::string_view, 4> kMathEnvEnds = {
      "\\end{equation*}", "\\end{equation}", "\\end{align*}", "\\end{align}"};

  std::size_t i = 0;
  while (i < n) {
    if (b[i] == '\\' && i + 1 < n && b[i + 1] == '$') {
      out += "\\$";
      i += 2;
      continue;
    }
    if (starts_with_at(b, i, "$$")) {
      std::size_t close = find_or_throw(b, "$$", i + 2, i, "unbalanced '$' delimiter");
      out += "EQUATION";
      i = close + 2;
      continue;
    }
    if (b[i] == '$') {
      std::size_t close = close_inline_math(b, i);
      out.append(b, i, close - i + 1);  // inline math stays byte-identical
      i = close + 1;
      continue;
    }
    if (starts_with_at(b, i, "\\[")) {
      std::size_t close = find_or_throw(b, "\\]", i + 2, i, "unterminated display math");
      out += "EQUATION";
      i = close + 2;
      continue;
    }
    if (b[i] == '\\') {
      bool handled = false;
      for (std::size_t e = 0; e < kMathEnvs.size(); ++e) {
        if (!starts_with_at(b, i, kMathEnvs[e])) continue;
        std::size_t close =
            find_or_throw(b, kMathEnvEnds[e], i + kMathEnvs[e].size(), i,
                          "unterminated math environment");
        out += "EQUATION";
        i = close + kMathEnvEnds[e].size();
        handled = true;
        break;
      }
      if (handled) continue;
      for (std::string_view cmd : kCiteCmds) {
        if (!starts_with_at(b, i, cmd)) continue;
        std::size_t close = find_or_throw(b, "}", i + cmd.size(), i, "unterminated citation");
        out += "CITATION";
        i = close + 1;
        handled = true;
        break;
      }
      if (handled) continue;
      for (std::string_view cmd : kRefCmds) {
        if (!starts_with_at(b, i, cmd)) continue;
        std::size_t close = find_or_throw(b, "}", i + cmd.size(), i, "unterminated reference");
        std::string_view label = std::string_view(b).substr(i + cmd.size(), close - i - cmd.size());
        if (label.substr(0, 4) == "fig:") {
          out += "FIGURE";
        } else if (label.substr(0, 4) == "tab:") {
          out += "TABLE";
        } else {
          out += "SECTION";  // sec: and anything unknown
        }
        i = close + 1;
        handled = true;
        break;
      }
      if (handled) continue;
    }
    out += b[i++];
  }
  return {doc.doc_id, std::move(out)};
}

namespace {

bool ends_with_abbreviation(std::string_view body, std::size_t dot, const AbbrevList& ab) {
  for (const std::string& a : ab.entries) {
    if (a.empty() || dot + 1 < a.size()) continue;
    std::size_t start = dot + 1 - a.size();
    if (body.compare(start, a.size(), a) != 0) continue;
    if (start == 0 || !std::isalnum(static_cast<unsigned char>(body[start - 1]))) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> segment_text(std::string_view body, const AbbrevList& abbrev) {
  std::vector<std::string> out;
  const std::size_t n = body.size();
  std::size_t start = 0;
  bool in_math = false;

  auto emit = [&](std::size_t from, std::size_t to) {
    std::string s = collapse_ws(body.substr(from, to - from));
    if (!s.empty()) out.push_back(std::move(s));
  };

  for (std::size_t i = 0; i < n; ++i) {
    char c = body[i];
    if (c == '\\' && i + 1 < n && body[i + 1] == '$') {
      ++i;
      continue;
    }
    if (c == '$') {
      in_math = !in_math;
      continue;
    }
    if (in_math) continue;
    if (c != '.' && c != '!' && c != '?') continue;

    std::size_t j = i + 1;
    if (j >= n || !std::isspace(static_cast<unsigned char>(body[j]))) continue;
    while (j < n && std::isspace(static_cast<unsigned char>(body[j]))) ++j;
    if (j >= n || body[j] < 'A' || body[j] > 'Z') continue;
    if (c == '.' && ends_with_abbreviation(body, i, abbrev)) continue;

    emit(start, i + 1);
    start = i + 1;
  }
  emit(start, n);
  return out;
}

std::vector<Sentence> segment(const RawDocument& doc, const AbbrevList& abbrev) {
  std::vector<Sentence> out;
  auto texts = segment_text(doc.body, abbrev);
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Sentence s;
    s.tokens = tokenize(texts[i]);
    s.doc_id = doc.doc_id;
    s.sent_index = static_cast<int>(i);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<std::string> raw;
  std::string chunk;

  auto flush_chunk = [&]() {
    if (chunk.empty()) return;
    std::size_t b = 0, e = chunk.size();
    std::vector<std::string> trail;
    while (b < e && kSplitPunct.find(chunk[b]) != std::string_view::npos) {
      raw.emplace_back(1, chunk[b++]);
    }
    while (e > b && kSplitPunct.find(chunk[e - 1]) != std::string_view::npos) {
      trail.emplace_back(1, chunk[--e]);
    }
    if (e > b) raw.push_back(chunk.substr(b, e - b));
    for (auto it = trail.rbegin(); it != trail.rend(); ++it) raw.push_back(std::move(*it));
    chunk.clear();
  };

  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush_chunk();
      ++i;
      continue;
    }
    if (c == '\\' && i + 1 < n && text[i + 1] == '$') {
      chunk += "\\$";
      i += 2;
      continue;
    }
    if (c == '$') {
      flush_chunk();
      std::string math = "$";
      std::size_t j = i + 1;
      while (j < n && text[j] != '$') {
        if (text[j] == '\\' && j + 1 < n && text[j + 1] == '$') {
          math += "\\$";
          j += 2;
          continue;
        }
        // math is one token: internal whitespace is dropped
        if (!std::isspace(static_cast<unsigned char>(text[j]))) math += text[j];
        ++j;
      }
      if (j >= n) throw Error("unbalanced '$' delimiter at byte offset " + std::to_string(i));
      math += '$';
      raw.push_back(std::move(math));
      i = j + 1;
      continue;
    }
    chunk += c;
    ++i;
  }
  flush_chunk();

  std::vector<Token> tokens;
  tokens.reserve(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) tokens.push_back({std::move(raw[t]), t});
  return tokens;
}

bool is_inline_math(std::string_view token) {
  return token.size() >= 2 && token.front() == '$' && token.back() == '$';
}

bool is_placeholder(std::string_view token) {
  return token == "CITATION" || token == "FIGURE" || token == "TABLE" ||
         token == "SECTION" || token == "EQUATION";
}

}  // namespace defx
