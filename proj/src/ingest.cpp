#include "musan/ingest.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "musan/error.h"
#include "musan/midi.h"

namespace musan {

using nlohmann::json;

namespace {

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw LoadError(where + ": expected an object");
  const auto it = obj.find(name);
  if (it == obj.end()) throw LoadError(where + ": missing field '" + name + "'");
  return *it;
}

int intValue(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) != d) throw LoadError(what + ": unquantized value " + v.dump());
    return static_cast<int>(d);
  }
  throw LoadError(what + ": expected an integer");
}

int pitchClassValue(const json& v, const std::string& what) {
  if (v.is_string()) {
    const auto pc = parsePitchClass(v.get<std::string>());
    if (!pc) throw LoadError(what + ": bad pitch class '" + v.get<std::string>() + "'");
    return *pc;
  }
  const int pc = intValue(v, what);
  if (pc < 0 || pc > 11) throw LoadError(what + ": pitch class out of range");
  return pc;
}

ChordLabel tonicTriad(const KeySignature& key) {
  return {key.tonic_pc, key.mode == Mode::Major ? ChordQuality::Maj : ChordQuality::Min, 0};
}

unsigned templateMask(int root, ChordQuality quality) {
  std::vector<int> offs;
  switch (quality) {
    case ChordQuality::Maj: offs = {0, 4, 7}; break;
    case ChordQuality::Min: offs = {0, 3, 7}; break;
    case ChordQuality::Dom7: offs = {0, 4, 7, 10}; break;
    default: offs = {0}; break;
  }
  unsigned mask = 0;
  for (int o : offs) mask |= 1u << pitchClass(root + o);
  return mask;
}

unsigned scaleMask(const KeySignature& key) {
  unsigned mask = 0;
  for (int o : scaleOffsets(key.mode)) mask |= 1u << pitchClass(key.tonic_pc + o);
  return mask;
}

}  // namespace

// --- canonical --------------------------------------------------------------

Song fromCanonicalJson(const json& j) {
  Song song;
  const auto& id = field(j, "id", "song");
  if (!id.is_string()) throw LoadError("song: 'id' must be a string");
  song.id = id.get<std::string>();
  if (j.contains("year") && !j["year"].is_null()) song.year = intValue(j["year"], "song.year");

  const auto& key = field(j, "key", "song");
  song.key.tonic_pc = pitchClassValue(field(key, "tonic", "key"), "key.tonic");
  const auto& mode = field(key, "mode", "key");
  if (mode == "major") {
    song.key.mode = Mode::Major;
  } else if (mode == "minor") {
    song.key.mode = Mode::Minor;
  } else {
    throw LoadError("key.mode must be 'major' or 'minor'");
  }

  const auto& time = field(j, "time", "song");
  song.time.numerator = intValue(field(time, "num", "time"), "time.num");
  song.time.denominator = intValue(field(time, "den", "time"), "time.den");
  if (!song.time.valid()) throw LoadError("unsupported time signature");
  const int steps = song.measureSteps();

  const auto& measures = field(j, "measures", "song");
  if (!measures.is_array() || measures.empty()) throw LoadError("song: 'measures' must be a non-empty array");
  int labeled = 0;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const auto& mj = measures[i];
    const std::string where = "measure " + std::to_string(i);
    Measure m;
    m.index = static_cast<int>(i);
    m.steps = steps;
    if (mj.contains("chords")) {
      for (const auto& cj : mj["chords"]) {
        ChordLabel c;
        c.root_pc = pitchClassValue(field(cj, "root", where), where + " chord root");
        const auto& q = field(cj, "quality", where);
        const auto quality = q.is_string() ? parseQuality(q.get<std::string>()) : std::nullopt;
        if (!quality) throw LoadError(where + ": unknown chord quality " + q.dump());
        c.quality = *quality;
        if (cj.contains("onset")) c.onset = intValue(cj["onset"], where + " chord onset");
        if (c.onset < 0 || c.onset >= steps) throw LoadError(where + ": chord/measure misalignment");
        m.chords.push_back(c);
      }
    }
    if (!m.chords.empty()) ++labeled;
    if (mj.contains("notes")) {
      for (const auto& nj : mj["notes"]) {
        NoteEvent n;
        const int onset = intValue(field(nj, "onset", where), where + " unquantized onset");
        if (onset < 0 || onset >= steps) throw LoadError(where + ": note onset outside measure");
        n.onset = m.index * steps + onset;
        n.duration = intValue(field(nj, "dur", where), where + " unquantized duration");
        n.pitch = intValue(field(nj, "pitch", where), where + " pitch");
        m.notes.push_back(n);
      }
    }
    if (mj.contains("accomp")) {
      for (const auto& p : mj["accomp"]) m.accompaniment.push_back(intValue(p, where + " accompaniment pitch"));
    }
    song.measures.push_back(std::move(m));
  }
  if (labeled != 0 && labeled != song.measureCount()) {
    for (const auto& m : song.measures) {
      if (m.chords.empty()) {
        throw LoadError("measure " + std::to_string(m.index) + ": chord/measure misalignment (no chord label)");
      }
    }
  }
  for (const auto& m : song.measures) {
    for (int p : m.accompaniment) {
      if (p < 0 || p > 127) throw LoadError("measure " + std::to_string(m.index) + ": accompaniment pitch out of range");
    }
  }
  deriveMeasureFeatures(song);
  if (labeled == 0) song = inferChordsFallback(std::move(song));
  validateSong(song);
  return song;
}

Song loadCanonical(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("malformed song file: ") + e.what());
  }
  return fromCanonicalJson(j);
}

Song loadCanonicalFile(const std::filesystem::path& path) { return loadCanonical(readFile(path)); }

json toCanonicalJson(const Song& song) {
  json j;
  j["id"] = song.id;
  if (song.year) j["year"] = *song.year;
  j["key"] = {{"tonic", pitchClassName(song.key.tonic_pc)}, {"mode", song.key.mode == Mode::Major ? "major" : "minor"}};
  j["time"] = {{"num", song.time.numerator}, {"den", song.time.denominator}};
  json measures = json::array();
  const int steps = song.measureSteps();
  for (const auto& m : song.measures) {
    json mj;
    json chords = json::array();
    for (const auto& c : m.chords) {
      json cj{{"root", pitchClassName(c.root_pc)}, {"quality", qualityName(c.quality)}};
      if (c.onset != 0) cj["onset"] = c.onset;
      chords.push_back(std::move(cj));
    }
    mj["chords"] = std::move(chords);
    json notes = json::array();
    for (const auto& n : m.notes) {
      notes.push_back({{"onset", n.onset - m.index * steps}, {"dur", n.duration}, {"pitch", n.pitch}});
    }
    mj["notes"] = std::move(notes);
    if (!m.accompaniment.empty()) mj["accomp"] = m.accompaniment;
    measures.push_back(std::move(mj));
  }
  j["measures"] = std::move(measures);
  return j;
}

std::string saveCanonical(const Song& song) { return toCanonicalJson(song).dump(2) + "\n"; }

// --- chord fallback -----------------------------------------------------------

ChordLabel matchChordTemplate(unsigned pc_mask, const KeySignature& key) {
  const unsigned scale = scaleMask(key);
  struct Candidate {
    int overlap;
    bool diatonic;
    int degree_rank;
    int size;
    int quality_rank;
    ChordLabel chord;
  };
  std::optional<Candidate> best;
  const ChordQuality qualities[] = {ChordQuality::Maj, ChordQuality::Min, ChordQuality::Dom7};
  for (int root = 0; root < 12; ++root) {
    for (int qi = 0; qi < 3; ++qi) {
      const unsigned tpl = templateMask(root, qualities[qi]);
      const auto degree = scaleDegree(root, key);
      Candidate c{std::popcount(tpl & pc_mask), (tpl & ~scale) == 0,
                  degree ? *degree : 7 + pitchClass(root - key.tonic_pc), std::popcount(tpl), qi,
                  ChordLabel{root, qualities[qi], 0}};
      const auto better = [&](const Candidate& a, const Candidate& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.diatonic != b.diatonic) return a.diatonic;
        if (a.degree_rank != b.degree_rank) return a.degree_rank < b.degree_rank;
        if (a.size != b.size) return a.size < b.size;
        return a.quality_rank < b.quality_rank;
      };
      if (!best || better(c, *best)) best = c;
    }
  }
  return best->chord;
}

Song inferChordsFallback(Song song) {
  std::optional<ChordLabel> previous;
  for (auto& m : song.measures) {
    unsigned mask = 0;
    for (int p : m.pitch_grid) {
      if (p != kRest) mask |= 1u << pitchClass(p);
    }
    for (int p : m.accompaniment) mask |= 1u << pitchClass(p);
    ChordLabel chord;
    if (mask != 0) {
      chord = matchChordTemplate(mask, song.key);
    } else {
      chord = previous ? *previous : tonicTriad(song.key);
    }
    chord.onset = 0;
    m.chords = {chord};
    previous = chord;
  }
  return song;
}

// --- MIDI + annotations -------------------------------------------------------

std::optional<ChordLabel> parseChordSymbol(std::string_view symbol) {
  if (symbol.empty() || symbol == "N" || symbol == "N.C.") return std::nullopt;
  const auto colon = symbol.find(':');
  std::string_view root = symbol.substr(0, colon);
  std::string_view quality = colon == std::string_view::npos ? "maj" : symbol.substr(colon + 1);
  if (const auto slash = quality.find('/'); slash != std::string_view::npos) quality = quality.substr(0, slash);
  if (const auto paren = quality.find('('); paren != std::string_view::npos) quality = quality.substr(0, paren);
  const auto pc = parsePitchClass(root);
  if (!pc) return std::nullopt;
  static const std::map<std::string_view, ChordQuality> table{
      {"maj", ChordQuality::Maj},   {"", ChordQuality::Maj},       {"min", ChordQuality::Min},
      {"dim", ChordQuality::Dim},   {"aug", ChordQuality::Aug},    {"7", ChordQuality::Dom7},
      {"dom7", ChordQuality::Dom7}, {"maj7", ChordQuality::Maj7},  {"min7", ChordQuality::Min7}};
  const auto it = table.find(quality);
  return ChordLabel{*pc, it == table.end() ? ChordQuality::Other : it->second, 0};
}

KeySignature parseKeyText(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<KeySignature> best;
  double best_span = -1.0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (parts.empty()) continue;
    const std::string& sym = parts.back();
    const auto colon = sym.find(':');
    if (colon == std::string::npos) continue;
    const auto pc = parsePitchClass(sym.substr(0, colon));
    const std::string mode = sym.substr(colon + 1);
    if (!pc || (mode != "maj" && mode != "min")) throw LoadError("bad key symbol '" + sym + "'");
    double span = 0.0;
    if (parts.size() >= 3) {
      try {
        span = std::stod(parts[1]) - std::stod(parts[0]);
      } catch (const std::exception&) {
        throw LoadError("bad key span in line '" + line + "'");
      }
    }
    if (span > best_span) {
      best_span = span;
      best = KeySignature{*pc, mode == "maj" ? Mode::Major : Mode::Minor};
    }
  }
  if (!best) throw LoadError("no key found in key annotation");
  return *best;
}

std::vector<ChordSpan> parseChordText(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<ChordSpan> spans;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    ChordSpan span;
    if (!(fields >> span.start)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw LoadError("chord annotation line " + std::to_string(line_no) + ": expected '<start> <end> <symbol>'");
    }
    if (!(fields >> span.end >> span.symbol) || span.end < span.start) {
      throw LoadError("chord annotation line " + std::to_string(line_no) + ": expected '<start> <end> <symbol>'");
    }
    spans.push_back(std::move(span));
  }
  return spans;
}

std::int64_t quantizeTick(std::int64_t tick, int division) {
  // nearest multiple of division/4, halves up: floor((8t + d) / 2d)
  const std::int64_t num = 8 * tick + division;
  const std::int64_t den = 2 * static_cast<std::int64_t>(division);
  return num >= 0 ? num / den : -((-num + den - 1) / den);
}

Song importMidi(std::span<const std::uint8_t> midi_bytes, const Annotations& annotations,
                const MidiImportOptions& options, std::string id) {
  const midi::File file = midi::parse(midi_bytes);

  // melody track by index or (case-insensitive) name
  const midi::Track* melody_track = nullptr;
  const bool by_index = !options.melody_track.empty() &&
                        std::all_of(options.melody_track.begin(), options.melody_track.end(),
                                    [](char c) { return c >= '0' && c <= '9'; });
  std::size_t melody_index = 0;
  for (std::size_t t = 0; t < file.tracks.size(); ++t) {
    const auto& name = file.tracks[t].name;
    const bool match = by_index ? std::to_string(t) == options.melody_track
                                : std::equal(name.begin(), name.end(), options.melody_track.begin(),
                                             options.melody_track.end(), [](char a, char b) {
                                               return std::tolower(static_cast<unsigned char>(a)) ==
                                                      std::tolower(static_cast<unsigned char>(b));
                                             });
    if (match) {
      melody_track = &file.tracks[t];
      melody_index = t;
      break;
    }
  }
  if (melody_track == nullptr || melody_track->notes.empty()) {
    throw LoadError("no melody track '" + options.melody_track + "'");
  }

  Song song;
  song.id = std::move(id);
  song.key = annotations.key;
  std::set<std::pair<int, int>> signatures;
  for (const auto& ts : file.time_signatures) signatures.insert({ts.numerator, ts.denominator});
  if (signatures.size() > 1) throw LoadError("time-signature change mid-song is not supported");
  if (!signatures.empty()) song.time = {signatures.begin()->first, signatures.begin()->second};
  if (!song.time.valid()) throw LoadError("time signature cannot be aligned to sixteenths");
  const int steps = song.measureSteps();
  if (options.pickup_steps < 0 || options.pickup_steps >= steps) throw LoadError("pickup must be shorter than a measure");
  const int shift = options.pickup_steps > 0 ? steps - options.pickup_steps : 0;

  // quantize melody, keep it monophonic: highest pitch wins a shared onset,
  // earlier notes are cut at the next onset
  std::vector<NoteEvent> notes;
  for (const auto& n : melody_track->notes) {
    const auto on = quantizeTick(n.on_tick, file.division);
    const auto off = quantizeTick(n.off_tick, file.division);
    notes.push_back({static_cast<int>(on) + shift, static_cast<int>(std::max<std::int64_t>(1, off - on)), n.pitch});
  }
  std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return a.onset != b.onset ? a.onset < b.onset : a.pitch > b.pitch;
  });
  std::vector<NoteEvent> mono;
  for (const auto& n : notes) {
    if (!mono.empty() && mono.back().onset == n.onset) continue;
    if (!mono.empty() && mono.back().end() > n.onset) mono.back().duration = n.onset - mono.back().onset;
    mono.push_back(n);
  }

  auto toStep = [&](double t) -> int {
    const double ticks = annotations.units == ChordTimeUnit::Beats ? t * file.division : midi::secondsToTicks(file, t);
    return static_cast<int>(std::llround(ticks * kStepsPerQuarter / file.division)) + shift;
  };
  struct StepSpan {
    int start, end;
    ChordLabel chord;
  };
  std::vector<StepSpan> chord_spans;
  for (const auto& span : annotations.chords) {
    const auto chord = parseChordSymbol(span.symbol);
    if (!chord) continue;
    const int s = toStep(span.start);
    const int e = toStep(span.end);
    if (e > s) chord_spans.push_back({s, e, *chord});
  }

  int total_end = 0;
  for (const auto& n : mono) total_end = std::max(total_end, n.end());
  for (const auto& c : chord_spans) total_end = std::max(total_end, c.end);
  const int measure_count = std::max(1, (total_end + steps - 1) / steps);

  song.measures.resize(measure_count);
  for (int i = 0; i < measure_count; ++i) {
    song.measures[i].index = i;
    song.measures[i].steps = steps;
  }
  for (const auto& n : mono) song.measures[n.onset / steps].notes.push_back(n);

  for (std::size_t t = 0; t < file.tracks.size(); ++t) {
    if (t == melody_index) continue;
    for (const auto& n : file.tracks[t].notes) {
      const int on = static_cast<int>(quantizeTick(n.on_tick, file.division)) + shift;
      const int off = std::max(on + 1, static_cast<int>(quantizeTick(n.off_tick, file.division)) + shift);
      for (int m = on / steps; m < measure_count && m * steps < off; ++m) {
        song.measures[m].accompaniment.push_back(n.pitch);
      }
    }
  }

  if (chord_spans.empty()) {
    deriveMeasureFeatures(song);
    song = inferChordsFallback(std::move(song));
  } else {
    std::optional<ChordLabel> previous;
    for (auto& m : song.measures) {
      const int m_start = m.index * steps;
      const int m_end = m_start + steps;
      for (const auto& span : chord_spans) {
        if (span.end <= m_start || span.start >= m_end) continue;
        ChordLabel c = span.chord;
        c.onset = std::max(span.start, m_start) - m_start;
        if (!m.chords.empty() && m.chords.back().onset >= c.onset) {
          m.chords.back() = c;  // overlapping spans: the later one wins
        } else {
          m.chords.push_back(c);
        }
      }
      if (m.chords.empty()) {
        ChordLabel c = previous ? *previous : tonicTriad(song.key);
        c.onset = 0;
        m.chords.push_back(c);
      } else if (m.chords.front().onset != 0) {
        ChordLabel c = previous ? *previous : m.chords.front();
        c.onset = 0;
        m.chords.insert(m.chords.begin(), c);
      }
      previous = m.chords.back();
    }
    deriveMeasureFeatures(song);
  }
  validateSong(song);
  return song;
}

Song importPop909(const std::filesystem::path& dir, const MidiImportOptions& options, ChordTimeUnit units) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw LoadError(dir.string() + " is not a song directory");
  std::vector<fs::path> mids;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && (e.path().extension() == ".mid" || e.path().extension() == ".midi")) {
      mids.push_back(e.path());
    }
  }
  if (mids.empty()) throw LoadError("no MIDI file in " + dir.string());
  std::sort(mids.begin(), mids.end());
  const std::string bytes = readFile(mids.front());

  auto firstExisting = [&](std::initializer_list<const char*> names) -> std::optional<fs::path> {
    for (const char* n : names) {
      if (fs::exists(dir / n)) return dir / n;
    }
    return std::nullopt;
  };
  Annotations ann;
  ann.units = units;
  const auto key_file = firstExisting({"key_audio.txt", "key.txt"});
  if (!key_file) throw LoadError("no key annotation in " + dir.string());
  ann.key = parseKeyText(readFile(*key_file));
  if (const auto chord_file = firstExisting({"chord_midi.txt", "chord.txt"})) {
    ann.chords = parseChordText(readFile(*chord_file));
  }
  const auto* data = reinterpret_cast<const std::uint8_t*>(bytes.data());
  return importMidi(std::span<const std::uint8_t>(data, bytes.size()), ann, options, dir.filename().string());
}

}  // namespace musan
