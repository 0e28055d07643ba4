#include "musan/song.h"

#include <algorithm>
#include <array>

#include "musan/error.h"

namespace musan {

bool TimeSignature::valid() const {
  if (numerator < 1) return false;
  switch (denominator) {
    case 1:
    case 2:
    case 4:
    case 8:
    case 16:
      return true;
    default:
      return false;
  }
}

std::vector<NoteEvent> Song::melody() const {
  std::vector<NoteEvent> out;
  for (const auto& m : measures) out.insert(out.end(), m.notes.begin(), m.notes.end());
  return out;
}

void deriveMeasureFeatures(Song& song) {
  const int steps = song.measureSteps();
  const int n = song.measureCount();
  std::vector<int> grid(static_cast<std::size_t>(n) * steps, kRest);
  for (auto& m : song.measures) {
    m.steps = steps;
    m.onset_pattern.clear();
    const int base = m.index * steps;
    for (const auto& note : m.notes) {
      m.onset_pattern.push_back(note.onset - base);
      const int end = std::min(note.end(), n * steps);
      for (int t = note.onset; t < end; ++t) grid[t] = note.pitch;
    }
    std::sort(m.onset_pattern.begin(), m.onset_pattern.end());
    m.onset_pattern.erase(std::unique(m.onset_pattern.begin(), m.onset_pattern.end()), m.onset_pattern.end());
  }
  for (auto& m : song.measures) {
    const auto first = grid.begin() + static_cast<std::ptrdiff_t>(m.index) * steps;
    m.pitch_grid.assign(first, first + steps);
    m.has_melody = std::any_of(m.pitch_grid.begin(), m.pitch_grid.end(), [](int p) { return p != kRest; });
  }
}

void validateSong(const Song& song) {
  if (!song.time.valid()) throw LoadError("invalid time signature");
  if (song.key.tonic_pc < 0 || song.key.tonic_pc > 11) throw LoadError("key tonic out of range");
  const int steps = song.measureSteps();
  int last_end = 0;
  int last_onset = -1;
  for (std::size_t i = 0; i < song.measures.size(); ++i) {
    const auto& m = song.measures[i];
    const std::string where = "measure " + std::to_string(i);
    if (m.index != static_cast<int>(i)) throw LoadError(where + ": non-contiguous measure index");
    if (m.chords.empty()) throw LoadError(where + ": no chord label");
    int prev_chord = -1;
    for (const auto& c : m.chords) {
      if (c.root_pc < 0 || c.root_pc > 11) throw LoadError(where + ": chord root out of range");
      if (c.onset < 0 || c.onset >= steps || c.onset <= prev_chord) {
        throw LoadError(where + ": chord/measure misalignment");
      }
      prev_chord = c.onset;
    }
    for (const auto& note : m.notes) {
      if (note.onset < m.index * steps || note.onset >= (m.index + 1) * steps) {
        throw LoadError(where + ": note onset outside measure");
      }
      if (note.duration < 1) throw LoadError(where + ": note duration must be >= 1");
      if (note.pitch < 0 || note.pitch > 127) throw LoadError(where + ": pitch out of range");
      if (note.onset < last_onset) throw LoadError(where + ": melody onsets out of order");
      if (note.onset < last_end) throw LoadError(where + ": overlapping melody notes");
      last_onset = note.onset;
      last_end = note.end();
    }
  }
}

const ChordLabel& representativeChord(const Measure& measure) {
  const ChordLabel* best = &measure.chords.front();
  int best_len = -1;
  for (std::size_t i = 0; i < measure.chords.size(); ++i) {
    const int end = i + 1 < measure.chords.size() ? measure.chords[i + 1].onset : measure.steps;
    const int len = end - measure.chords[i].onset;
    if (len > best_len) {
      best_len = len;
      best = &measure.chords[i];
    }
  }
  return *best;
}

const std::vector<int>& scaleOffsets(Mode mode) {
  static const std::vector<int> major{0, 2, 4, 5, 7, 9, 11};
  static const std::vector<int> minor{0, 2, 3, 5, 7, 8, 10};
  return mode == Mode::Major ? major : minor;
}

std::optional<int> scaleDegree(int pc, const KeySignature& key) {
  const int rel = pitchClass(pc - key.tonic_pc);
  const auto& offs = scaleOffsets(key.mode);
  const auto it = std::find(offs.begin(), offs.end(), rel);
  if (it == offs.end()) return std::nullopt;
  return static_cast<int>(it - offs.begin());
}

std::string degreeName(const ChordLabel& chord, const KeySignature& key) {
  static const std::array<const char*, 7> numerals{"I", "II", "III", "IV", "V", "VI", "VII"};
  const auto d = scaleDegree(chord.root_pc, key);
  return d ? numerals[*d] : "other";
}

std::string_view qualityName(ChordQuality quality) {
  switch (quality) {
    case ChordQuality::Maj: return "maj";
    case ChordQuality::Min: return "min";
    case ChordQuality::Dim: return "dim";
    case ChordQuality::Aug: return "aug";
    case ChordQuality::Dom7: return "dom7";
    case ChordQuality::Maj7: return "maj7";
    case ChordQuality::Min7: return "min7";
    case ChordQuality::Other: return "other";
  }
  return "other";
}

std::optional<ChordQuality> parseQuality(std::string_view name) {
  for (auto q : {ChordQuality::Maj, ChordQuality::Min, ChordQuality::Dim, ChordQuality::Aug, ChordQuality::Dom7,
                 ChordQuality::Maj7, ChordQuality::Min7, ChordQuality::Other}) {
    if (qualityName(q) == name) return q;
  }
  return std::nullopt;
}

std::string_view pitchClassName(int pc) {
  static const std::array<const char*, 12> names{"C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};
  return names[pitchClass(pc)];
}

std::optional<int> parsePitchClass(std::string_view name) {
  if (name.empty() || name.size() > 2) return std::nullopt;
  static const std::array<int, 7> base{9, 11, 0, 2, 4, 5, 7};  // A..G
  const char letter = name[0];
  if (letter < 'A' || letter > 'G') return std::nullopt;
  int pc = base[letter - 'A'];
  if (name.size() == 2) {
    if (name[1] == '#') {
      ++pc;
    } else if (name[1] == 'b') {
      --pc;
    } else {
      return std::nullopt;
    }
  }
  return pitchClass(pc);
}

}  // namespace musan
