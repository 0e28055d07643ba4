#include "musan/pipeline.h"

#include <chrono>

#include "musan/error.h"
#include "musan/ingest.h"

namespace musan {

namespace {

double msSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

nlohmann::json runsJson(const std::vector<TokenRun>& runs) {
  nlohmann::json out = nlohmann::json::array();
  for (const TokenRun& run : runs)
    out.push_back({{"first_token", run.first_token}, {"tokens", formatTokens(run.tokens)}, {"length", run.length()}});
  return out;
}

}  // namespace

void AnalysisConfig::validate() const {
  weights.validate();
  sdl.validate();
  if (limits.min_length < 1 || limits.max_length < limits.min_length) throw ContractError("phrase length limits must satisfy 1 <= min <= max");
  if (search_budget == 0) throw ContractError("search budget must be positive");
  if (separator_threshold < 0) throw ContractError("separator threshold must be non-negative");
  if (jobs < 1) throw ContractError("jobs must be at least 1");
}

SongAnalysis analyzeSong(const Song& song, const AnalysisConfig& config) {
  config.validate();
  auto t0 = std::chrono::steady_clock::now();
  SongAnalysis out;

  auto t = std::chrono::steady_clock::now();
  std::vector<MatchPair> pairs = findMatchedPairs(song, config.weights, config.limits, config.jobs);
  out.pair_count = pairs.size();
  out.timings.pairs_ms = msSince(t);

  t = std::chrono::steady_clock::now();
  std::vector<bool> mask = melodyMask(song);
  MatchGraph graph = buildMatchGraph(pairs, config.node_cap);
  out.node_count = graph.nodes.size();
  std::vector<PhraseSet> sets = pruneDominatedSets(maximalCliques(graph, mask));
  sortPhraseSets(sets);
  out.set_count = sets.size();
  out.timings.cliques_ms = msSince(t);

  t = std::chrono::steady_clock::now();
  OptimizeResult result = config.oracle ? bruteForceOptimize(mask, sets, config.sdl)
                                        : optimizeStructure(mask, sets, config.sdl, SearchOptions{config.search_budget});
  out.timings.search_ms = msSince(t);
  out.suboptimal = result.suboptimal;
  out.expansions = result.expansions;

  out.tiling = absorbNearRepeats(result.tiling, config.sdl);
  out.structure = assignLabels(out.tiling);
  if (config.name_singletons) out.structure = nameNonRepeating(out.structure);
  checkCoversSong(out.structure, song.measureCount());
  out.sdl = sdl(out.structure, config.sdl);
  out.sections = sectionsOrSeparators(out.structure, config.separator_threshold);
  out.timings.total_ms = msSince(t0);
  return out;
}

nlohmann::json analysisReport(const Song& song, const SongAnalysis& analysis, bool include_timings, bool embed_song) {
  nlohmann::json report = {
      {"schema_version", kReportSchemaVersion},
      {"id", song.id},
      {"measures", song.measureCount()},
      {"structure", formatStructure(analysis.structure)},
      {"sections", runsJson(analysis.sections.sections)},
      {"separators", runsJson(analysis.sections.separators)},
      {"sections_text", formatSections(analysis.sections)},
      {"sdl", analysis.sdl},
      {"suboptimal", analysis.suboptimal},
      {"expansions", analysis.expansions},
      {"counts", {{"pairs", analysis.pair_count}, {"nodes", analysis.node_count}, {"sets", analysis.set_count}}},
  };
  if (include_timings) {
    report["timings"] = {{"pairs_ms", analysis.timings.pairs_ms},
                         {"cliques_ms", analysis.timings.cliques_ms},
                         {"search_ms", analysis.timings.search_ms},
                         {"total_ms", analysis.timings.total_ms}};
  }
  if (embed_song) report["song"] = toCanonicalJson(song);
  return report;
}

}  // namespace musan
