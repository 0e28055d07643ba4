#include "musan/sections.h"

#include <algorithm>
#include <numeric>

#include "musan/error.h"

namespace musan {

namespace {

bool separatorCandidate(const PhraseToken& t) { return !t.melodic() || t.label == 'X'; }

bool sameLabel(const PhraseToken& a, const PhraseToken& b) { return a.label == b.label && a.label != 'X'; }

}  // namespace

int TokenRun::length() const {
  return std::accumulate(tokens.begin(), tokens.end(), 0, [](int acc, const PhraseToken& t) { return acc + t.length; });
}

std::vector<PhraseToken> SectionStructure::reconstruct() const {
  std::vector<const TokenRun*> runs;
  for (const auto& s : sections) runs.push_back(&s);
  for (const auto& s : separators) runs.push_back(&s);
  std::sort(runs.begin(), runs.end(), [](const TokenRun* a, const TokenRun* b) { return a->first_token < b->first_token; });
  std::vector<PhraseToken> out;
  for (const auto* r : runs) out.insert(out.end(), r->tokens.begin(), r->tokens.end());
  return out;
}

SectionStructure deriveSections(const StructureAnalysis& structure, int separator_threshold) {
  const auto& tokens = structure.tokens;
  if (std::none_of(tokens.begin(), tokens.end(), [](const PhraseToken& t) { return t.melodic(); })) {
    throw ContractError("structure has no melodic phrase, so no section can be formed");
  }
  const std::size_t n = tokens.size();
  std::vector<bool> separator(n, false);

  std::size_t lead = 0;
  while (lead < n && !tokens[lead].melodic()) separator[lead++] = true;
  std::size_t trail = n;
  while (trail > lead && !tokens[trail - 1].melodic()) separator[--trail] = true;

  for (std::size_t k = lead; k < trail;) {
    if (!separatorCandidate(tokens[k])) {
      ++k;
      continue;
    }
    std::size_t end = k;
    int total = 0;
    while (end < trail && separatorCandidate(tokens[end])) total += tokens[end++].length;
    if (total > separator_threshold) {
      for (std::size_t j = k; j < end; ++j) separator[j] = true;
    }
    k = end;
  }

  SectionStructure out;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    while (end < n && separator[end] == separator[k]) ++end;
    TokenRun run{k, {tokens.begin() + static_cast<std::ptrdiff_t>(k), tokens.begin() + static_cast<std::ptrdiff_t>(end)}};
    (separator[k] ? out.separators : out.sections).push_back(std::move(run));
    k = end;
  }
  return out;
}

std::string formatSections(const SectionStructure& sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.sections.size(); ++i) {
    if (i > 0) out += " | ";
    out += formatTokens(sections.sections[i].tokens);
  }
  return out;
}

std::string_view relationName(SectionRelation relation) {
  switch (relation) {
    case SectionRelation::Exact: return "exact";
    case SectionRelation::SuffixRepeat: return "suffix";
    case SectionRelation::PrefixRepeat: return "prefix";
    case SectionRelation::Other: return "other";
  }
  return "other";
}

SectionRelation classifyRelation(std::span<const PhraseToken> prev, std::span<const PhraseToken> next) {
  auto matches = [](std::span<const PhraseToken> a, std::span<const PhraseToken> b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), sameLabel);
  };
  if (next.empty() || next.size() > prev.size()) return SectionRelation::Other;
  if (next.size() == prev.size()) return matches(prev, next) ? SectionRelation::Exact : SectionRelation::Other;
  if (matches(prev.last(next.size()), next)) return SectionRelation::SuffixRepeat;
  if (matches(prev.first(next.size()), next)) return SectionRelation::PrefixRepeat;
  return SectionRelation::Other;
}

SectionStructure sectionsOrSeparators(const StructureAnalysis& structure, int separator_threshold) {
  bool any_melodic = std::any_of(structure.tokens.begin(), structure.tokens.end(),
                                 [](const PhraseToken& t) { return t.melodic(); });
  if (any_melodic) return deriveSections(structure, separator_threshold);
  SectionStructure out;
  if (!structure.tokens.empty()) out.separators.push_back(TokenRun{0, structure.tokens});
  return out;
}

}  // namespace musan
