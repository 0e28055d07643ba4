// musan command-line tool: analyze, batch, sections, stats, verify.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "musan/config.h"
#include "musan/error.h"
#include "musan/ingest.h"
#include "musan/notation.h"
#include "musan/optimizer.h"
#include "musan/pipeline.h"
#include "musan/sections.h"
#include "musan/stats.h"
#include "musan/synth.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitEmpty = 3,
  kExitMissing = 4,
  kExitBudget = 5,
};

struct CliFailure {
  int code;
  std::string kind;
  std::string message;
  std::string path;
};

[[noreturn]] void fail(int code, std::string kind, std::string message, std::string path = {}) {
  throw CliFailure{code, std::move(kind), std::move(message), std::move(path)};
}

void printFailure(const CliFailure& f) {
  json j = {{"error", f.kind}, {"message", f.message}, {"exit_code", f.code}};
  if (!f.path.empty()) j["path"] = f.path;
  std::cerr << j.dump() << "\n";
}

std::string errorKind(const std::exception& e) {
  if (dynamic_cast<const musan::ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const musan::LoadError*>(&e)) return "load_error";
  if (dynamic_cast<const musan::CapacityError*>(&e)) return "capacity_error";
  if (dynamic_cast<const musan::LabelSpaceError*>(&e)) return "label_space_error";
  if (dynamic_cast<const musan::ContractError*>(&e)) return "contract_error";
  return "error";
}

std::string readText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kExitInput, "load_error", "cannot read file", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(kExitFailure, "io_error", "cannot write file", path.string());
  out << text;
}

/// Flags as given on the command line; unset ones fall back to the config.
struct Flags {
  std::optional<std::string> format;
  std::optional<std::string> config;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<double> w_chord, w_rhythm, w_melody, theta_measure, theta_segment;
  std::optional<int> min_len, max_len;
  std::optional<double> sdl_h, sdl_g;
  std::optional<std::size_t> budget;
  std::optional<std::string> melody_track;
  std::optional<int> pickup;
  std::optional<std::string> chord_units;
  std::optional<std::string> mode;
  bool oracle = false;
  bool strict = false;
  bool name_singletons = false;
};

musan::RunConfig resolveConfig(const Flags& f) {
  musan::RunConfig c;
  if (const char* env = std::getenv("MUSAN_CONFIG"); env && *env) c = musan::loadConfigFile(env, c);
  if (f.config) c = musan::loadConfigFile(*f.config, c);
  if (f.format) c.format = musan::parseInputFormat(*f.format);
  if (f.jobs) c.jobs = *f.jobs;
  if (f.out) c.out = *f.out;
  auto& a = c.analysis;
  if (f.w_chord) a.weights.chord = *f.w_chord;
  if (f.w_rhythm) a.weights.rhythm = *f.w_rhythm;
  if (f.w_melody) a.weights.melody = *f.w_melody;
  if (f.theta_measure) a.weights.theta_measure = *f.theta_measure;
  if (f.theta_segment) a.weights.theta_segment = *f.theta_segment;
  if (f.min_len) a.limits.min_length = *f.min_len;
  if (f.max_len) a.limits.max_length = *f.max_len;
  if (f.sdl_h) a.sdl.h = *f.sdl_h;
  if (f.sdl_g) a.sdl.g = *f.sdl_g;
  if (f.budget) a.search_budget = *f.budget;
  if (f.oracle) a.oracle = true;
  if (f.strict) c.strict = true;
  if (f.name_singletons) a.name_singletons = true;
  if (f.melody_track) c.midi.melody_track = *f.melody_track;
  if (f.pickup) c.midi.pickup_steps = *f.pickup;
  if (f.chord_units) {
    if (*f.chord_units != "beats" && *f.chord_units != "seconds")
      throw musan::ContractError("--chord-units must be beats or seconds");
    c.chord_units = *f.chord_units == "seconds" ? musan::ChordTimeUnit::Seconds : musan::ChordTimeUnit::Beats;
  }
  if (f.mode) c.stats_mode = musan::parseMode(*f.mode);
  if (c.jobs < 1) throw musan::ContractError("--jobs must be at least 1");
  a.validate();
  return c;
}

musan::Song loadSong(const fs::path& path, const musan::RunConfig& c) {
  if (c.format == musan::InputFormat::Pop909) return musan::importPop909(path, c.midi, c.chord_units);
  return musan::loadCanonicalFile(path);
}

/// Songs of a batch directory: *.json files, or song subdirectories for pop909.
std::vector<fs::path> listInputs(const fs::path& dir, musan::InputFormat format) {
  if (!fs::is_directory(dir)) fail(kExitInput, "load_error", "not a directory", dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (format == musan::InputFormat::Pop909 ? entry.is_directory()
                                             : entry.is_regular_file() && entry.path().extension() == ".json")
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmdAnalyze(const std::string& input, const Flags& flags, bool print_json) {
  musan::RunConfig c = resolveConfig(flags);
  musan::Song song = loadSong(input, c);
  musan::AnalysisConfig a = c.analysis;
  a.jobs = c.jobs;
  musan::SongAnalysis analysis = musan::analyzeSong(song, a);
  json report = musan::analysisReport(song, analysis);
  if (print_json)
    std::cout << report.dump(2) << "\n";
  else
    std::cout << musan::formatStructure(analysis.structure) << "\n";
  if (!c.out.empty()) writeText(fs::path(c.out) / (song.id + ".json"), report.dump(2) + "\n");
  if (analysis.suboptimal && c.strict) fail(kExitBudget, "budget_exhausted", "search budget exhausted", input);
  return kExitOk;
}

struct BatchResult {
  fs::path input;
  std::string id;
  std::string report_name;
  std::string structure;
  std::string error;
  std::string error_kind;
  bool suboptimal = false;
  bool ok = false;
};

int cmdBatch(const std::string& dir, const Flags& flags, bool timings) {
  musan::RunConfig c = resolveConfig(flags);
  if (c.out.empty()) fail(kExitInput, "usage_error", "batch needs --out");
  std::vector<fs::path> inputs = listInputs(dir, c.format);
  if (inputs.empty()) fail(kExitEmpty, "empty_input", "no songs found", dir);

  std::vector<BatchResult> results(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < inputs.size(); k = next++) {
      BatchResult& r = results[k];
      r.input = inputs[k];
      r.report_name = inputs[k].stem().string() + ".json";
      try {
        musan::Song song = loadSong(inputs[k], c);
        r.id = song.id;
        musan::SongAnalysis analysis = musan::analyzeSong(song, c.analysis);
        r.structure = musan::formatStructure(analysis.structure);
        r.suboptimal = analysis.suboptimal;
        writeText(fs::path(c.out) / r.report_name, musan::analysisReport(song, analysis, timings).dump(2) + "\n");
        r.ok = true;
      } catch (const musan::Error& e) {
        r.error = e.what();
        r.error_kind = errorKind(e);
      } catch (const CliFailure& e) {
        r.error = e.message;
        r.error_kind = e.kind;
      } catch (const std::exception& e) {
        r.error = e.what();
        r.error_kind = "error";
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    int n = std::min<int>(c.jobs, static_cast<int>(inputs.size()));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  std::sort(results.begin(), results.end(), [](const BatchResult& a, const BatchResult& b) {
    return std::tie(a.id, a.input) < std::tie(b.id, b.input);
  });
  json songs = json::array();
  int ok = 0;
  bool any_suboptimal = false;
  for (const BatchResult& r : results) {
    json e = {{"input", r.input.filename().string()}, {"status", r.ok ? "ok" : "failed"}};
    if (!r.id.empty()) e["id"] = r.id;
    if (r.ok) {
      e["report"] = r.report_name;
      e["structure"] = r.structure;
      e["suboptimal"] = r.suboptimal;
      ++ok;
      any_suboptimal = any_suboptimal || r.suboptimal;
    } else {
      e["error"] = {{"kind", r.error_kind}, {"message", r.error}};
    }
    songs.push_back(std::move(e));
  }
  json manifest = {{"schema_version", musan::kReportSchemaVersion},
                   {"ok", ok},
                   {"failed", static_cast<int>(results.size()) - ok},
                   {"config", musan::toJson(c)},
                   {"songs", songs}};
  manifest["config"].erase("jobs");
  manifest["config"].erase("out");
  writeText(fs::path(c.out) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "ok " << ok << " failed " << results.size() - static_cast<std::size_t>(ok) << "\n";
  if (any_suboptimal && c.strict) fail(kExitBudget, "budget_exhausted", "search budget exhausted for some songs", dir);
  return kExitOk;
}

int cmdSections(const std::string& input, const Flags& flags, bool print_json) {
  musan::RunConfig c = resolveConfig(flags);
  musan::StructureAnalysis structure;
  if (fs::is_regular_file(input)) {
    json report;
    try {
      report = json::parse(readText(input));
      structure = musan::parseStructure(report.at("structure").get<std::string>());
    } catch (const json::exception& e) {
      fail(kExitInput, "load_error", std::string("bad report: ") + e.what(), input);
    }
  } else {
    structure = musan::parseStructure(input);
  }
  musan::SectionStructure sections = musan::sectionsOrSeparators(structure, c.analysis.separator_threshold);
  if (!print_json) {
    std::cout << musan::formatSections(sections) << "\n";
  } else {
    json j = {{"structure", musan::formatStructure(structure)}, {"sections", json::array()},
              {"separators", json::array()}, {"relations", json::array()}};
    for (const auto& s : sections.sections) j["sections"].push_back(musan::formatTokens(s.tokens));
    for (const auto& s : sections.separators) j["separators"].push_back(musan::formatTokens(s.tokens));
    for (std::size_t k = 1; k < sections.sections.size(); ++k)
      j["relations"].push_back(
          musan::relationName(musan::classifyRelation(sections.sections[k - 1].tokens, sections.sections[k].tokens)));
    std::cout << j.dump(2) << "\n";
  }
  return kExitOk;
}

void writeTable(const fs::path& dir, const musan::StatsTable& table) {
  writeText(dir / (table.name + ".csv"), table.toCsv(false));
  writeText(dir / ("counts_" + table.name + ".csv"), table.toCsv(true));
}

std::string formatNumber(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << v;
  return os.str();
}

int cmdStats(const std::string& dir, const Flags& flags) {
  musan::RunConfig c = resolveConfig(flags);
  if (c.out.empty()) fail(kExitInput, "usage_error", "stats needs --out");
  if (!fs::is_directory(dir)) fail(kExitMissing, "missing_reports", "report directory not found", dir);
  musan::Corpus corpus;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json" && entry.path().filename() != "manifest.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    try {
      json report = json::parse(readText(file));
      if (!report.contains("song") || !report.contains("structure")) continue;
      corpus.push_back(musan::makeAnalyzedSong(musan::fromCanonicalJson(report.at("song")),
                                               musan::parseStructure(report.at("structure").get<std::string>()),
                                               c.analysis.separator_threshold));
    } catch (const json::exception& e) {
      fail(kExitInput, "load_error", std::string("bad report: ") + e.what(), file.string());
    } catch (const musan::Error& e) {
      fail(kExitInput, errorKind(e), e.what(), file.string());
    }
  }
  if (corpus.empty()) fail(kExitMissing, "missing_reports", "no analysis reports found", dir);

  fs::path out(c.out);
  musan::Mode mode = c.stats_mode;
  std::string suffix = std::string("_") + std::string(musan::modeName(mode));
  musan::StatsTable chords = musan::chordFrequencyByPosition(corpus, mode, musan::Weighting::Occupancy);
  musan::StatsTable chord_counts = musan::chordFrequencyByPosition(corpus, mode, musan::Weighting::Count);
  chord_counts.name = "chord_by_measure" + suffix;
  writeTable(out, chords);
  writeTable(out, chord_counts);

  for (int degree = 0; degree < 7; ++degree) {
    writeTable(out, musan::melodyPitchGivenChord(corpus, degree, mode, musan::Weighting::Occupancy));
    musan::StatsTable onsets = musan::melodyPitchGivenChord(corpus, degree, mode, musan::Weighting::Count);
    onsets.name = "melody_onsets_given_" + musan::chordDegreeRows()[static_cast<std::size_t>(degree)] + suffix;
    writeTable(out, onsets);
  }

  musan::StatsTable durations = musan::durationByPosition(corpus);
  writeTable(out, durations);
  {
    std::string csv = "duration";
    for (int col = 0; col < musan::kPositionClasses; ++col)
      csv += "," + musan::positionColumnNames()[static_cast<std::size_t>(col)];
    csv += "\r\n";
    for (std::size_t r = 0; r < durations.rows.size(); ++r) {
      csv += durations.rows[r];
      for (double p : musan::positionGivenCategory(durations, static_cast<int>(r))) csv += "," + formatNumber(p);
      csv += "\r\n";
    }
    writeText(out / "position_given_duration.csv", csv);
  }

  {
    std::string csv = "boundary,from,to,from_count,transition_count,probability\r\n";
    const auto& names = musan::chordDegreeRows();
    for (musan::Boundary b : {musan::Boundary::PhraseEnd, musan::Boundary::PhraseEndMidSection,
                              musan::Boundary::SectionEnd, musan::Boundary::Elsewhere}) {
      for (int from = 0; from < 8; ++from) {
        for (int to = 0; to < 8; ++to) {
          auto est = musan::chordTransitionAtBoundary(corpus, from, to, b, mode);
          csv += std::string(musan::boundaryName(b)) + "," + names[static_cast<std::size_t>(from)] + "," +
                 names[static_cast<std::size_t>(to)] + "," + formatNumber(est.from_count) + "," +
                 formatNumber(est.transition_count) + "," + (est.probability ? formatNumber(*est.probability) : "") +
                 "\r\n";
        }
      }
    }
    writeText(out / ("transitions" + suffix + ".csv"), csv);
  }

  {
    auto tests = musan::significanceVsBackground(chord_counts);
    std::string csv = "category,position,t,df,p\r\n";
    for (std::size_t r = 0; r < tests.size(); ++r)
      for (int col = 0; col < musan::kPositionClasses; ++col) {
        const auto& t = tests[r][static_cast<std::size_t>(col)];
        csv += chord_counts.rows[r] + "," + musan::positionColumnNames()[static_cast<std::size_t>(col)] + "," +
               (std::isnan(t.p) ? ",," : formatNumber(t.t) + "," + formatNumber(t.df) + "," + formatNumber(t.p)) +
               "\r\n";
      }
    writeText(out / ("significance_chord" + suffix + ".csv"), csv);
  }

  json summary = musan::toJson(musan::corpusSummary(corpus));
  summary["songs"] = corpus.size();
  summary["schema_version"] = musan::kReportSchemaVersion;
  writeText(out / "summary.json", summary.dump(2) + "\n");
  std::cout << "songs " << corpus.size() << "\n";
  return kExitOk;
}

std::optional<musan::StructureAnalysis> readHumanLabel(const fs::path& dir) {
  for (const char* name : {"human_label1.txt", "human_label.txt", "structure.txt"}) {
    fs::path p = dir / name;
    if (!fs::is_regular_file(p)) continue;
    std::string text = readText(p);
    std::istringstream in(text);
    std::string token;
    in >> token;
    return musan::parseStructure(token);
  }
  return std::nullopt;
}

int cmdVerifyAnnotations(const std::string& dir, const Flags& flags) {
  musan::RunConfig c = resolveConfig(flags);
  if (!fs::is_directory(dir)) fail(kExitMissing, "missing_annotations", "annotation directory not found", dir);
  std::vector<fs::path> songs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) songs.push_back(entry.path());
  std::sort(songs.begin(), songs.end());
  json rows = json::array();
  int compared = 0;
  int agree = 0;
  for (const fs::path& song_dir : songs) {
    json row = {{"song", song_dir.filename().string()}};
    try {
      auto human = readHumanLabel(song_dir);
      if (!human) continue;
      musan::Song song = musan::importPop909(song_dir, c.midi, c.chord_units);
      musan::SongAnalysis analysis = musan::analyzeSong(song, c.analysis);
      bool same = musan::canonicalLabels(analysis.structure) == musan::canonicalLabels(*human);
      row["human"] = musan::formatStructure(*human);
      row["computed"] = musan::formatStructure(analysis.structure);
      row["agree"] = same;
      ++compared;
      agree += same ? 1 : 0;
    } catch (const std::exception& e) {
      row["error"] = e.what();
    }
    rows.push_back(std::move(row));
  }
  if (compared == 0) fail(kExitMissing, "missing_annotations", "no annotated songs found", dir);
  json j = {{"compared", compared}, {"agree", agree},
            {"agreement_rate", static_cast<double>(agree) / compared}, {"songs", rows}};
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmdVerify(const Flags& flags, int cases, std::uint64_t seed, int max_measures) {
  musan::RunConfig c = resolveConfig(flags);
  if (max_measures > musan::kOracleGuard) throw musan::ContractError("--max-measures exceeds the oracle guard");
  if (cases < 1 || max_measures < 2) throw musan::ContractError("need at least one case of two or more measures");
  musan::AnalysisConfig a = c.analysis;
  a.limits.min_length = std::min(a.limits.min_length, 2);
  int mismatches = 0;
  json failures = json::array();
  std::mt19937_64 rng(seed);
  for (int k = 0; k < cases; ++k) {
    musan::SynthOptions opt;
    opt.measures = musan::uniformInt(rng, 2, max_measures);
    opt.alphabet = musan::uniformInt(rng, 1, 4);
    opt.min_block = 2;
    opt.max_block = 4;
    musan::Song song = musan::synthesizeSong(rng(), opt);
    std::vector<bool> mask = musan::melodyMask(song);
    auto pairs = musan::findMatchedPairs(song, a.weights, a.limits);
    auto sets = musan::pruneDominatedSets(musan::maximalCliques(musan::buildMatchGraph(pairs), mask));
    musan::sortPhraseSets(sets);
    auto fast = musan::optimizeStructure(mask, sets, a.sdl, musan::SearchOptions{a.search_budget});
    auto slow = musan::bruteForceOptimize(mask, sets, a.sdl);
    bool same = !fast.suboptimal && std::abs(fast.sdl - slow.sdl) <= 1e-9 &&
                fast.structure.totalLength() == song.measureCount();
    if (!same) {
      ++mismatches;
      failures.push_back({{"song", song.id},
                          {"search", musan::formatStructure(fast.structure)},
                          {"search_sdl", fast.sdl},
                          {"oracle", musan::formatStructure(slow.structure)},
                          {"oracle_sdl", slow.sdl}});
    }
  }
  json j = {{"cases", cases}, {"seed", seed}, {"mismatches", mismatches}, {"failures", failures}};
  std::cout << j.dump(2) << "\n";
  return mismatches == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical repetition structure analysis for symbolic pop songs"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--format", f.format, "Input format: canonical or pop909");
  app.add_option("--config", f.config, "JSON config file");
  app.add_option("--jobs", f.jobs, "Worker threads");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--w-chord", f.w_chord, "Chord similarity weight");
  app.add_option("--w-rhythm", f.w_rhythm, "Rhythm similarity weight");
  app.add_option("--w-melody", f.w_melody, "Melody similarity weight");
  app.add_option("--theta-measure", f.theta_measure, "Measure match threshold");
  app.add_option("--theta-segment", f.theta_segment, "Segment match threshold");
  app.add_option("--min-phrase-len", f.min_len, "Shortest phrase in measures");
  app.add_option("--max-phrase-len", f.max_len, "Longest phrase in measures");
  app.add_option("--sdl-h", f.sdl_h, "Cost per phrase token");
  app.add_option("--sdl-g", f.sdl_g, "Cost per described measure");
  app.add_option("--search-budget", f.budget, "Search expansion budget");
  app.add_option("--melody-track", f.melody_track, "Melody track name or index (pop909)");
  app.add_option("--pickup-steps", f.pickup, "Anacrusis length in sixteenths (pop909)");
  app.add_option("--chord-units", f.chord_units, "Chord annotation times: beats or seconds (pop909)");
  app.add_flag("--oracle", f.oracle, "Use the exhaustive search");
  app.add_flag("--name-singletons", f.name_singletons, "Letter non-repeating phrases instead of X / x");
  app.add_flag("--strict", f.strict, "Exit 5 when the search budget runs out");

  std::string input;
  bool print_json = false;
  bool timings = false;
  auto* analyze = app.add_subcommand("analyze", "Analyze one song");
  analyze->add_option("song", input, "Song file (or directory for pop909)")->required();
  analyze->add_flag("--json", print_json, "Print the report");

  auto* batch = app.add_subcommand("batch", "Analyze every song in a directory");
  batch->add_option("dir", input, "Song directory")->required();
  batch->add_flag("--timings", timings, "Include stage timings in reports");

  auto* sections = app.add_subcommand("sections", "Derive sections from a structure string or report");
  sections->add_option("structure", input, "Structure string or report file")->required();
  sections->add_flag("--json", print_json, "Print sections as JSON");

  auto* stats = app.add_subcommand("stats", "Corpus statistics over batch reports");
  stats->add_option("reports", input, "Directory of batch reports")->required();
  stats->add_option("--mode", f.mode, "major or minor");

  int cases = 100;
  std::uint64_t seed = 1;
  int max_measures = 16;
  std::string annotations;
  auto* verify = app.add_subcommand("verify", "Check the search against the exhaustive oracle");
  verify->add_option("--cases", cases, "Random songs to check");
  verify->add_option("--seed", seed, "Generator seed");
  verify->add_option("--max-measures", max_measures, "Longest generated song");
  verify->add_option("--against-annotations", annotations, "POP909-style directory with human structure labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*analyze) return cmdAnalyze(input, f, print_json);
    if (*batch) return cmdBatch(input, f, timings);
    if (*sections) return cmdSections(input, f, print_json);
    if (*stats) return cmdStats(input, f);
    if (*verify) return annotations.empty() ? cmdVerify(f, cases, seed, max_measures)
                                            : cmdVerifyAnnotations(annotations, f);
  } catch (const CliFailure& e) {
    printFailure(e);
    return e.code;
  } catch (const musan::CapacityError& e) {
    printFailure({kExitFailure, errorKind(e), e.what(), input});
    return kExitFailure;
  } catch (const musan::Error& e) {
    printFailure({kExitInput, errorKind(e), e.what(), input});
    return kExitInput;
  } catch (const std::exception& e) {
    printFailure({kExitFailure, "internal_error", e.what(), input});
    return kExitFailure;
  }
  return kExitFailure;
}
