#pragma once

// Song loading. The canonical JSON song file is the source of truth; the
// MIDI + annotation importer is an adapter that produces the same Song value.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "musan/song.h"

namespace musan {

// --- canonical format -------------------------------------------------------

/// Parses a canonical song file. Fails rather than repairs: any schema
/// violation, unquantized onset or chord/measure misalignment throws LoadError.
/// A song with no chord labels at all gets them from inferChordsFallback().
Song loadCanonical(std::string_view text);
Song loadCanonicalFile(const std::filesystem::path& path);

nlohmann::json toCanonicalJson(const Song& song);
Song fromCanonicalJson(const nlohmann::json& j);
/// Pretty-printed canonical text; loadCanonical(saveCanonical(s)) == s.
std::string saveCanonical(const Song& song);

// --- chord fallback ---------------------------------------------------------

/// Picks the triad (maj/min) or dominant-seventh template with the largest
/// pitch-class overlap. Ties: diatonic to the key, then lower scale degree,
/// then fewer template notes. `pc_mask` bit k set means pitch class k present.
ChordLabel matchChordTemplate(unsigned pc_mask, const KeySignature& key);

/// Replaces every measure's chords with a template match over melody and
/// accompaniment pitch classes. Empty measures carry the previous chord;
/// leading empty measures get the tonic triad.
Song inferChordsFallback(Song song);

// --- MIDI + annotations -----------------------------------------------------

struct ChordSpan {
  double start = 0.0;
  double end = 0.0;
  /// Symbol such as "C:maj", "G:7", "A:min7"; "N" means no chord.
  std::string symbol;
};

enum class ChordTimeUnit { Beats, Seconds };

struct Annotations {
  KeySignature key;
  std::vector<ChordSpan> chords;
  ChordTimeUnit units = ChordTimeUnit::Beats;
};

struct MidiImportOptions {
  /// Track name, or a decimal track index.
  std::string melody_track = "MELODY";
  /// Length of an anacrusis in sixteenths; 0 means none.
  int pickup_steps = 0;
};

/// Parses "C:maj", "F#:min7", "Bb:7", "D:dim", "G:sus4" (-> other). Returns
/// nullopt for "N" and unparseable symbols.
std::optional<ChordLabel> parseChordSymbol(std::string_view symbol);

/// Key text: first whitespace-separated field of the form "C:maj" / "A:min"
/// on the longest line span, e.g. POP909 `key_audio.txt` lines
/// "<start> <end> <key>". A bare "C:maj" line is accepted too.
KeySignature parseKeyText(std::string_view text);

/// Chord text: one span per line, "<start> <end> <symbol>".
std::vector<ChordSpan> parseChordText(std::string_view text);

/// Quantizes a tick to the nearest sixteenth, halves rounding up.
std::int64_t quantizeTick(std::int64_t tick, int division);

Song importMidi(std::span<const std::uint8_t> midi_bytes, const Annotations& annotations,
                const MidiImportOptions& options = {}, std::string id = "midi");

/// Reads a POP909-style song directory: one `*.mid`, `key_audio.txt` (or
/// `key.txt`) and `chord_midi.txt` (or `chord.txt`).
Song importPop909(const std::filesystem::path& dir, const MidiImportOptions& options = {},
                  ChordTimeUnit units = ChordTimeUnit::Beats);

}  // namespace musan
