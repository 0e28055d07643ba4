#pragma once

// One song end to end: matched pairs, match graph, phrase sets, structure
// search, labels and sections.

#include <cstddef>

#include "json.hpp"
#include "musan/matcher.h"
#include "musan/notation.h"
#include "musan/optimizer.h"
#include "musan/sections.h"
#include "musan/similarity.h"
#include "musan/song.h"

namespace musan {

inline constexpr int kReportSchemaVersion = 1;

struct AnalysisConfig {
  SimWeights weights;
  PhraseLengthLimits limits;
  SdlParams sdl;
  std::size_t search_budget = 1'000'000;
  std::size_t node_cap = kDefaultNodeCap;
  int separator_threshold = 2;
  /// Use the exhaustive search (short songs only).
  bool oracle = false;
  /// Give non-repeating phrases their own letters instead of X / x.
  bool name_singletons = false;
  /// Threads for the pair search.
  int jobs = 1;

  void validate() const;
};

struct StageTimings {
  double pairs_ms = 0.0;
  double cliques_ms = 0.0;
  double search_ms = 0.0;
  double total_ms = 0.0;
};

struct SongAnalysis {
  StructureAnalysis structure;
  SectionStructure sections;
  Tiling tiling;
  double sdl = 0.0;
  bool suboptimal = false;
  std::size_t expansions = 0;
  std::size_t pair_count = 0;
  std::size_t node_count = 0;
  std::size_t set_count = 0;
  StageTimings timings;
};

SongAnalysis analyzeSong(const Song& song, const AnalysisConfig& config = {});

/// {schema_version, id, structure, sections, separators, sdl, suboptimal,
/// expansions, counts, timings?, song?}.
nlohmann::json analysisReport(const Song& song, const SongAnalysis& analysis, bool include_timings = true,
                              bool embed_song = true);

}  // namespace musan
