#include "musan/notation.h"

#include <map>
#include <numeric>
#include <set>

#include "musan/error.h"

namespace musan {

namespace {

constexpr int kMaxTokenLength = 1'000'000;

bool isAsciiLetter(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool isDigit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

int StructureAnalysis::totalLength() const {
  return std::accumulate(tokens.begin(), tokens.end(), 0,
                         [](int acc, const PhraseToken& t) { return acc + t.length; });
}

std::vector<int> StructureAnalysis::startMeasures() const {
  std::vector<int> starts;
  starts.reserve(tokens.size());
  int pos = 0;
  for (const auto& t : tokens) {
    starts.push_back(pos);
    pos += t.length;
  }
  return starts;
}

StructureAnalysis parseStructure(std::string_view text) {
  if (text.empty()) throw ParseError("empty structure", 0);

  StructureAnalysis out;
  bool intro_closed = false;  // a non-`i` token has been seen
  bool in_outro = false;      // an `o` token has been seen
  std::size_t outro_offset = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t token_offset = pos;
    const char label = text[pos];
    if (!isAsciiLetter(label)) throw ParseError("expected phrase label letter", pos);
    ++pos;
    if (pos >= text.size() || !isDigit(text[pos])) {
      throw ParseError(std::string("missing length after label '") + label + "'", pos);
    }
    if (text[pos] == '0') throw ParseError("length must start with a non-zero digit", pos);
    int length = 0;
    while (pos < text.size() && isDigit(text[pos])) {
      length = length * 10 + (text[pos] - '0');
      if (length > kMaxTokenLength) throw ParseError("length too large", pos);
      ++pos;
    }

    if (label == 'i' && intro_closed) {
      throw ParseError("intro label 'i' after a non-intro phrase", token_offset);
    }
    if (in_outro && label != 'o') {
      throw ParseError("outro label 'o' before song end", outro_offset);
    }
    if (label != 'i') intro_closed = true;
    if (label == 'o' && !in_outro) {
      in_outro = true;
      outro_offset = token_offset;
    }
    out.tokens.push_back({label, length});
  }
  return out;
}

std::string formatTokens(std::span<const PhraseToken> tokens) {
  std::string s;
  for (const auto& t : tokens) {
    s.push_back(t.label);
    s += std::to_string(t.length);
  }
  return s;
}

std::string formatStructure(const StructureAnalysis& structure) { return formatTokens(structure.tokens); }

void checkCoversSong(const StructureAnalysis& structure, int measure_count) {
  const int total = structure.totalLength();
  if (total != measure_count) {
    throw ContractError("structure covers " + std::to_string(total) + " measures but song has " +
                        std::to_string(measure_count));
  }
}

StructureAnalysis canonicalLabels(const StructureAnalysis& structure) {
  std::map<char, char> rename;
  char next_upper = 'A';
  char next_lower = 'a';
  auto advance = [](char c, std::string_view reserved) {
    do ++c;
    while (reserved.find(c) != std::string_view::npos);
    return c;
  };
  StructureAnalysis out = structure;
  for (PhraseToken& t : out.tokens) {
    if (t.isFiller()) continue;
    auto it = rename.find(t.label);
    if (it == rename.end()) {
      char& next = t.melodic() ? next_upper : next_lower;
      it = rename.emplace(t.label, next).first;
      next = advance(next, t.melodic() ? "X" : "iox");
    }
    t.label = it->second;
  }
  return out;
}

StructureAnalysis nameNonRepeating(const StructureAnalysis& structure) {
  std::set<char> used;
  for (const PhraseToken& t : structure.tokens) used.insert(t.label);
  StructureAnalysis out = structure;
  for (PhraseToken& t : out.tokens) {
    if (t.label != 'X' && t.label != 'x') continue;
    bool upper = t.label == 'X';
    char pick = 0;
    for (char c = upper ? 'A' : 'a'; c <= (upper ? 'Z' : 'z'); ++c) {
      if (used.contains(c) || c == 'X' || c == 'x' || c == 'i' || c == 'o') continue;
      pick = c;
      break;
    }
    if (pick == 0) throw LabelSpaceError("no letter left to name a non-repeating phrase");
    used.insert(pick);
    t.label = pick;
  }
  return out;
}

}  // namespace musan
