#pragma once

// Higher-level sections: maximal runs of phrases between separator runs.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musan/notation.h"

namespace musan {

/// A contiguous slice of the phrase token list.
struct TokenRun {
  std::size_t first_token = 0;
  std::vector<PhraseToken> tokens;

  int length() const;
  friend bool operator==(const TokenRun&, const TokenRun&) = default;
};

struct SectionStructure {
  std::vector<TokenRun> sections;
  std::vector<TokenRun> separators;

  /// Interleaves sections and separators back into the original token list.
  std::vector<PhraseToken> reconstruct() const;
};

/// Separators are the leading and trailing runs of non-melodic tokens (any
/// length) and every interior maximal run of non-melodic or X tokens longer
/// than `separator_threshold` measures. Throws ContractError when the
/// structure has no melodic token.
SectionStructure deriveSections(const StructureAnalysis& structure, int separator_threshold = 2);

/// Like deriveSections, but a structure without melodic tokens yields no
/// sections and a single separator holding every token.
SectionStructure sectionsOrSeparators(const StructureAnalysis& structure, int separator_threshold = 2);

/// Sections joined with " | ", e.g. "A8B8 | A8X2B8B8 | B9".
std::string formatSections(const SectionStructure& sections);

enum class SectionRelation { Exact, SuffixRepeat, PrefixRepeat, Other };

std::string_view relationName(SectionRelation relation);

/// Compares phrase label sequences (lengths ignored; X never equals anything):
/// Exact if equal, else SuffixRepeat if `next` is a suffix of `prev`, else
/// PrefixRepeat if it is a prefix, else Other.
SectionRelation classifyRelation(std::span<const PhraseToken> prev, std::span<const PhraseToken> next);

}  // namespace musan
