#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "defx/corpus.hpp"

namespace defx {

struct RawDocument {
  std::string doc_id;
  std::string body;  // plain text, possibly with TeX commands
};

// Sentence-split exception list ("et al.", "Eq.", ...). One entry per line in
// files, '#' starts a comment.
struct AbbrevList {
  std::vector<std::string> entries;
  static const AbbrevList& defaults();
  static AbbrevList load(const std::string& path);
};

// Placeholder substitution: \cite/\citep/\citet -> CITATION, \ref/\autoref/
// \cref by label prefix (fig:/tab:/sec:, unknown -> SECTION), display math
// ($$..$$, \[..\], equation/align environments) -> EQUATION. Inline $..$ is
// left byte-identical. Idempotent. Unbalanced '$' raises Error with the byte
// offset.
RawDocument normalize(const RawDocument& doc);

// Sentence boundaries at [.!?] followed by whitespace and an uppercase
// letter, except inside inline math and after a listed abbreviation.
// Whitespace runs inside a sentence collapse to single spaces, so joining
// the output with single spaces reconstructs the input modulo runs.
std::vector<std::string> segment_text(std::string_view body,
                                      const AbbrevList& abbrev = AbbrevList::defaults());

// segment_text + tokenize, with doc_id/sent_index filled in.
std::vector<Sentence> segment(const RawDocument& doc,
                              const AbbrevList& abbrev = AbbrevList::defaults());

// Whitespace split with leading/trailing .,;:!?()[]{}" separated into their
// own tokens. An inline $..$ region is one token regardless of content
// (internal whitespace is dropped so tokens never contain whitespace).
std::vector<Token> tokenize(std::string_view sentence_text);

bool is_inline_math(std::string_view token);
bool is_placeholder(std::string_view token);

}  // namespace defx
