#include "musan/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "musan/error.h"

namespace musan {

InputFormat parseInputFormat(std::string_view text) {
  if (text == "canonical") return InputFormat::Canonical;
  if (text == "pop909") return InputFormat::Pop909;
  throw ContractError("unknown format '" + std::string(text) + "' (expected canonical or pop909)");
}

std::string_view formatName(InputFormat format) { return format == InputFormat::Pop909 ? "pop909" : "canonical"; }

Mode parseMode(std::string_view text) {
  if (text == "major") return Mode::Major;
  if (text == "minor") return Mode::Minor;
  throw ContractError("unknown mode '" + std::string(text) + "' (expected major or minor)");
}

std::string_view modeName(Mode mode) { return mode == Mode::Minor ? "minor" : "major"; }

nlohmann::json toJson(const RunConfig& c) {
  const AnalysisConfig& a = c.analysis;
  nlohmann::json j = nlohmann::json::object();
  j["inputs"] = c.inputs;
  j["format"] = formatName(c.format);
  j["out"] = c.out;
  j["jobs"] = c.jobs;
  j["strict"] = c.strict;
  j["w_chord"] = a.weights.chord;
  j["w_rhythm"] = a.weights.rhythm;
  j["w_melody"] = a.weights.melody;
  j["theta_measure"] = a.weights.theta_measure;
  j["theta_segment"] = a.weights.theta_segment;
  j["min_phrase_len"] = a.limits.min_length;
  j["max_phrase_len"] = a.limits.max_length;
  j["sdl_h"] = a.sdl.h;
  j["sdl_g"] = a.sdl.g;
  j["search_budget"] = a.search_budget;
  j["node_cap"] = a.node_cap;
  j["separator_threshold"] = a.separator_threshold;
  j["oracle"] = a.oracle;
  j["name_singletons"] = a.name_singletons;
  j["melody_track"] = c.midi.melody_track;
  j["pickup_steps"] = c.midi.pickup_steps;
  j["chord_units"] = c.chord_units == ChordTimeUnit::Seconds ? "seconds" : "beats";
  j["mode"] = modeName(c.stats_mode);
  return j;
}

RunConfig mergeConfig(RunConfig c, const nlohmann::json& j) {
  if (!j.is_object()) throw LoadError("config must be a JSON object");
  static const std::set<std::string> known = {
      "inputs",        "format",         "out",          "jobs",         "strict",       "w_chord",
      "w_rhythm",      "w_melody",       "theta_measure", "theta_segment", "min_phrase_len", "max_phrase_len",
      "sdl_h",         "sdl_g",          "search_budget", "node_cap",     "separator_threshold", "oracle",
      "melody_track",  "pickup_steps",   "chord_units",  "mode"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw LoadError("unknown config key '" + key + "'");
  try {
    AnalysisConfig& a = c.analysis;
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("inputs", c.inputs);
    if (j.contains("format")) c.format = parseInputFormat(j.at("format").get<std::string>());
    get("out", c.out);
    get("jobs", c.jobs);
    get("strict", c.strict);
    get("w_chord", a.weights.chord);
    get("w_rhythm", a.weights.rhythm);
    get("w_melody", a.weights.melody);
    get("theta_measure", a.weights.theta_measure);
    get("theta_segment", a.weights.theta_segment);
    get("min_phrase_len", a.limits.min_length);
    get("max_phrase_len", a.limits.max_length);
    get("sdl_h", a.sdl.h);
    get("sdl_g", a.sdl.g);
    get("search_budget", a.search_budget);
    get("node_cap", a.node_cap);
    get("separator_threshold", a.separator_threshold);
    get("oracle", a.oracle);
    get("name_singletons", a.name_singletons);
    get("melody_track", c.midi.melody_track);
    get("pickup_steps", c.midi.pickup_steps);
    if (j.contains("chord_units")) {
      std::string u = j.at("chord_units").get<std::string>();
      if (u != "beats" && u != "seconds") throw LoadError("chord_units must be beats or seconds");
      c.chord_units = u == "seconds" ? ChordTimeUnit::Seconds : ChordTimeUnit::Beats;
    }
    if (j.contains("mode")) c.stats_mode = parseMode(j.at("mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig loadConfigFile(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("config " + path.string() + ": " + e.what());
  }
  return mergeConfig(std::move(base), j);
}

}  // namespace musan
