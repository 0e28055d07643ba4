#pragma once

// Repetition evidence: matched segment pairs, the match graph over phrase
// instances, and phrase sets taken as maximal cliques of that graph.

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "musan/similarity.h"
#include "musan/song.h"

namespace musan {

struct Instance {
  int start = 0;
  int length = 0;

  int end() const { return start + length; }
  bool overlaps(const Instance& o) const { return start < o.end() && o.start < end(); }
  friend auto operator<=>(const Instance&, const Instance&) = default;
};

/// Every (i, j, L) with min <= L <= max for which segmentMatch succeeds,
/// ordered by L descending, then i, then j. Candidate lengths are split over
/// `jobs` worker threads; the result does not depend on `jobs`.
std::vector<MatchPair> findMatchedPairs(const Song& song, const SimWeights& w, const PhraseLengthLimits& limits = {},
                                        int jobs = 1);

/// Drops pairs that differ from a higher-scoring kept pair of the same length
/// by one measure in either start (Chebyshev distance 1). Ties keep the pair
/// that comes first in findMatchedPairs order.
std::vector<MatchPair> collapseNearDuplicates(const std::vector<MatchPair>& pairs);

struct MatchGraph {
  struct Edge {
    int a = 0;
    int b = 0;
    double score = 0.0;
  };
  /// Sorted by (start, length).
  std::vector<Instance> nodes;
  std::vector<Edge> edges;

  /// Sorted neighbour lists.
  std::vector<std::vector<int>> adjacency() const;
  /// Score of edge a-b, or a negative value when absent.
  double edgeScore(int a, int b) const;
};

inline constexpr std::size_t kDefaultNodeCap = 5000;

/// Collapses near duplicates, then adds one node per distinct instance and
/// one edge per pair. Throws CapacityError above `node_cap` nodes.
MatchGraph buildMatchGraph(const std::vector<MatchPair>& pairs, std::size_t node_cap = kDefaultNodeCap);

/// Bron-Kerbosch with pivoting over a degeneracy ordering. Each clique is
/// sorted; the list is sorted lexicographically. Isolated vertices come back
/// as singleton cliques.
std::vector<std::vector<int>> enumerateMaximalCliques(const std::vector<std::vector<int>>& adjacency);

struct PhraseSet {
  std::vector<Instance> instances;  // sorted by start
  double mean_score = 0.0;
  bool melodic = false;

  int length() const { return instances.empty() ? 0 : instances.front().length; }
  friend bool operator==(const PhraseSet&, const PhraseSet&) = default;
};

/// Phrase sets from the maximal cliques of size >= 2. Overlapping instances
/// inside a clique are resolved by dropping the one with the lower mean edge
/// score. `melodic` holds when more than half of the instance measures have
/// melody (`measure_has_melody[m]`).
std::vector<PhraseSet> maximalCliques(const MatchGraph& graph, const std::vector<bool>& measure_has_melody);

/// Removes every set whose instances all appear in one other set scoring at
/// least as high. Of identical sets only the first survives.
std::vector<PhraseSet> pruneDominatedSets(std::vector<PhraseSet> sets);

/// Deterministic order: mean score desc, length desc, then instance list.
void sortPhraseSets(std::vector<PhraseSet>& sets);

std::vector<bool> melodyMask(const Song& song);

/// Edge list, one "start1 len1 start2 len2 score" line per edge.
std::string dumpEdgeList(const MatchGraph& graph);

}  // namespace musan
