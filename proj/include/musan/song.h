#pragma once

// Symbolic song model: a quantized monophonic melody on a sixteenth-note grid,
// chord labels per measure, a key and a single time signature.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace musan {

/// Sixteenth-note steps per quarter note.
inline constexpr int kStepsPerQuarter = 4;
/// Pitch-grid value for a step where no melody note sounds.
inline constexpr int kRest = -1;

enum class Mode { Major, Minor };

enum class ChordQuality { Maj, Min, Dim, Aug, Dom7, Maj7, Min7, Other };

struct KeySignature {
  int tonic_pc = 0;
  Mode mode = Mode::Major;

  friend bool operator==(const KeySignature&, const KeySignature&) = default;
};

struct TimeSignature {
  int numerator = 4;
  int denominator = 4;

  /// Sixteenths per measure. Only meaningful when valid().
  int measureSteps() const { return numerator * (16 / denominator); }
  bool valid() const;

  friend bool operator==(const TimeSignature&, const TimeSignature&) = default;
};

struct ChordLabel {
  int root_pc = 0;
  ChordQuality quality = ChordQuality::Maj;
  /// Measure-relative sixteenth where the chord starts sounding.
  int onset = 0;

  friend bool operator==(const ChordLabel&, const ChordLabel&) = default;
};

struct NoteEvent {
  /// Sixteenth steps from song start.
  int onset = 0;
  int duration = 1;
  int pitch = 60;

  int end() const { return onset + duration; }
  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

struct Measure {
  int index = 0;
  std::vector<ChordLabel> chords;
  /// Melody notes whose onset falls in this measure (absolute onsets).
  std::vector<NoteEvent> notes;
  /// Accompaniment pitches, used only to infer missing chord labels.
  std::vector<int> accompaniment;

  // Derived by deriveMeasureFeatures().
  int steps = 16;
  /// Within-measure sixteenth positions holding melody onsets, ascending.
  std::vector<int> onset_pattern;
  /// Sounding melody pitch per step (sustains carried across bar lines), kRest for silence.
  std::vector<int> pitch_grid;
  bool has_melody = false;

  friend bool operator==(const Measure&, const Measure&) = default;
};

struct Song {
  std::string id;
  std::optional<int> year;
  KeySignature key;
  TimeSignature time;
  std::vector<Measure> measures;

  int measureCount() const { return static_cast<int>(measures.size()); }
  int measureSteps() const { return time.measureSteps(); }
  /// All melody notes in onset order.
  std::vector<NoteEvent> melody() const;

  friend bool operator==(const Song&, const Song&) = default;
};

/// Recomputes steps, onset patterns, pitch grids and melody flags from notes.
void deriveMeasureFeatures(Song& song);

/// Throws LoadError describing the first violated song invariant.
void validateSong(const Song& song);

/// Chord with the longest duration in the measure; ties go to the earliest.
const ChordLabel& representativeChord(const Measure& measure);

/// Seven scale-step pitch-class offsets for the mode (natural minor for Minor).
const std::vector<int>& scaleOffsets(Mode mode);

/// Diatonic degree 0..6 of a pitch class relative to the key, or nullopt.
std::optional<int> scaleDegree(int pc, const KeySignature& key);

/// Roman numeral of the chord root relative to the key ("I".."VII"), or
/// "other" for non-diatonic roots.
std::string degreeName(const ChordLabel& chord, const KeySignature& key);

std::string_view qualityName(ChordQuality quality);
std::optional<ChordQuality> parseQuality(std::string_view name);

/// "C", "C#", ... using sharps.
std::string_view pitchClassName(int pc);
/// Accepts A-G with optional '#' or 'b'. Returns nullopt on anything else.
std::optional<int> parsePitchClass(std::string_view name);

inline int pitchClass(int pitch) { return ((pitch % 12) + 12) % 12; }

}  // namespace musan
