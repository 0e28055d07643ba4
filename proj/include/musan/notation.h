#pragma once

// Compact phrase-structure notation, e.g. "i4A8B8x4A8B8B8X2c4c4X2B9o2".
//
// Each token is a letter followed by a length in measures. Uppercase letters
// are melodic phrases, lowercase are non-melodic. `X`/`x` mark phrases with no
// repetition, `i` an intro and `o` an outro.

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace musan {

struct PhraseToken {
  char label = 'X';
  int length = 1;

  bool melodic() const { return label >= 'A' && label <= 'Z'; }
  /// True for X, x, i and o: the token does not belong to a repeated phrase set.
  bool isFiller() const { return label == 'X' || label == 'x' || label == 'i' || label == 'o'; }

  friend auto operator<=>(const PhraseToken&, const PhraseToken&) = default;
};

struct StructureAnalysis {
  std::vector<PhraseToken> tokens;

  /// Sum of token lengths in measures.
  int totalLength() const;
  /// First measure of each token.
  std::vector<int> startMeasures() const;

  friend bool operator==(const StructureAnalysis&, const StructureAnalysis&) = default;
};

/// Parses `(LETTER [1-9][0-9]*)+`. Throws ParseError with the byte offset of
/// the first problem.
StructureAnalysis parseStructure(std::string_view text);

std::string formatStructure(const StructureAnalysis& structure);
std::string formatTokens(std::span<const PhraseToken> tokens);

/// Renames repeated-phrase labels by first occurrence (A, B, ... and a, b, ...,
/// skipping the reserved letters), so structures that differ only in naming
/// compare equal. X, x, i and o are kept.
StructureAnalysis canonicalLabels(const StructureAnalysis& structure);

/// Gives every X / x token its own unused letter, e.g. "A4X4A4" -> "A4B4A4".
/// Throws LabelSpaceError when letters run out.
StructureAnalysis nameNonRepeating(const StructureAnalysis& structure);

/// Throws ContractError unless the structure tiles exactly `measure_count`.
void checkCoversSong(const StructureAnalysis& structure, int measure_count);

}  // namespace musan
