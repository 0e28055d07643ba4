#pragma once

// Run configuration shared by the command-line tools. Values resolve as
// flag > --config file > $MUSAN_CONFIG file > built-in default.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "musan/ingest.h"
#include "musan/pipeline.h"
#include "musan/song.h"

namespace musan {

enum class InputFormat { Canonical, Pop909 };

struct RunConfig {
  std::vector<std::string> inputs;
  InputFormat format = InputFormat::Canonical;
  AnalysisConfig analysis;
  std::string out;
  int jobs = 1;
  bool strict = false;
  MidiImportOptions midi;
  ChordTimeUnit chord_units = ChordTimeUnit::Beats;
  Mode stats_mode = Mode::Major;
};

nlohmann::json toJson(const RunConfig& config);
/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
RunConfig mergeConfig(RunConfig base, const nlohmann::json& j);
RunConfig loadConfigFile(const std::filesystem::path& path, RunConfig base);

InputFormat parseInputFormat(std::string_view text);
std::string_view formatName(InputFormat format);
Mode parseMode(std::string_view text);
std::string_view modeName(Mode mode);

}  // namespace musan
