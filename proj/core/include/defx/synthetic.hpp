#pragma once

#include <cstdint>

#include "defx/corpus.hpp"

namespace defx {

// Deterministic synthetic corpus of cue-patterned definition sentences
// ("The <term> is <definition> .") mixed with non-definitional filler.
// Useful for smoke tests, demos, and the shipped data/cue_corpus_200.conll.
Dataset make_cue_corpus(std::size_t n, std::uint64_t seed);

}  // namespace defx
