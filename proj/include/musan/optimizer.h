#pragma once

// Minimum description-length structure search.
//
// A structure's cost is h per phrase token plus g times the average instance
// length of every distinct phrase label; non-repeating tokens (X, x, i, o)
// each count as their own label. The search tiles a song with instances of
// phrase sets and filler runs; a set's g-term is charged the first time one of
// its instances is placed, later instances cost only h.

#include <cstddef>
#include <vector>

#include "musan/matcher.h"
#include "musan/notation.h"
#include "musan/song.h"

namespace musan {

struct SdlParams {
  double h = 1.0;
  double g = 1.3;

  void validate() const;
};

/// h * |tokens| + g * sum over distinct labels of the mean token length.
double sdl(const StructureAnalysis& structure, const SdlParams& params = {});

/// One tile of a song: either an instance of phrase set `set`, or a filler
/// (set < 0) whose measures all share one melody status.
struct TileToken {
  int start = 0;
  int length = 0;
  int set = -1;
  bool melodic = false;

  bool isFiller() const { return set < 0; }
  int end() const { return start + length; }
  friend bool operator==(const TileToken&, const TileToken&) = default;
};

using Tiling = std::vector<TileToken>;

/// Cost of a (possibly partial) tiling: h per token, g per filler measure, and
/// g times the mean used instance length of each distinct set.
double tilingCost(const Tiling& tiling, const SdlParams& params);

/// Total order used for every tie: lower cost (1e-9 slack), then fewer
/// tokens, then token by token: set instances before fillers (melodic sets
/// first), longer first, lower set index first.
bool tilingLess(const Tiling& a, const Tiling& b, const SdlParams& params);

/// Maximal runs of equal melody status as [start, end) pairs.
std::vector<std::pair<int, int>> melodyRuns(const std::vector<bool>& measure_has_melody);

struct SearchOptions {
  std::size_t budget = 1'000'000;
  /// Record every expanded state (tests only; slow).
  bool trace = false;
};

struct TraceEntry {
  int position = 0;
  double g_cost = 0.0;
  double f_estimate = 0.0;
  Tiling partial;
};

struct OptimizeResult {
  Tiling tiling;
  StructureAnalysis structure;
  double sdl = 0.0;
  bool suboptimal = false;
  std::size_t expansions = 0;
  std::vector<TraceEntry> trace;
};

/// A* over (position, sets already paid for) with an admissible amortized
/// lower bound, seeded with a greedy incumbent. Returns the minimum-cost tiling
/// under tilingLess. When the expansion budget runs out the best tiling found
/// so far is returned with `suboptimal` set.
OptimizeResult optimizeStructure(const std::vector<bool>& measure_has_melody, const std::vector<PhraseSet>& sets,
                                 const SdlParams& params = {}, const SearchOptions& options = {});
OptimizeResult optimizeStructure(const Song& song, const std::vector<PhraseSet>& sets, const SdlParams& params = {},
                                 const SearchOptions& options = {});

inline constexpr int kOracleGuard = 32;

/// Exhaustive reference: enumerates every selection of non-overlapping set
/// instances, fills each gap with one filler per melody run, and keeps the
/// tilingLess-minimum. Throws ContractError for songs longer than `guard`.
OptimizeResult bruteForceOptimize(const std::vector<bool>& measure_has_melody, const std::vector<PhraseSet>& sets,
                                  const SdlParams& params = {}, int guard = kOracleGuard);
OptimizeResult bruteForceOptimize(const Song& song, const std::vector<PhraseSet>& sets, const SdlParams& params = {},
                                  int guard = kOracleGuard);

/// Folds interior fillers of at most `max_filler` measures into an adjacent
/// instance of a set used at least twice with the same melody status, when
/// that lowers the cost. Produces near-repeats such as B8 ... B9.
Tiling absorbNearRepeats(Tiling tiling, const SdlParams& params = {}, int max_filler = 2);

/// Letters a tiling. Sets used at least twice get A, B, ... (skipping X) when
/// melodic and a, b, ... (skipping i, o, x) otherwise, by first occurrence.
/// Fillers and single-use sets become X / x; leading non-melodic ones become
/// i and trailing ones o. Throws LabelSpaceError when letters run out.
StructureAnalysis assignLabels(const Tiling& tiling);

}  // namespace musan
