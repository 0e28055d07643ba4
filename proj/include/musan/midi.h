#pragma once

// Minimal Standard MIDI File reader: enough to pull note spans, track names,
// tempo and time-signature events out of format 0/1 files.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace musan::midi {

struct Note {
  std::int64_t on_tick = 0;
  std::int64_t off_tick = 0;
  int pitch = 0;
  int channel = 0;
};

struct TempoChange {
  std::int64_t tick = 0;
  int us_per_quarter = 500000;
};

struct TimeSignatureChange {
  std::int64_t tick = 0;
  int numerator = 4;
  int denominator = 4;
};

struct Track {
  std::string name;
  std::vector<Note> notes;
};

struct File {
  int format = 1;
  /// Ticks per quarter note.
  int division = 480;
  std::vector<Track> tracks;
  std::vector<TempoChange> tempos;
  std::vector<TimeSignatureChange> time_signatures;
};

/// Throws LoadError on malformed data or SMPTE time division.
File parse(std::span<const std::uint8_t> bytes);

/// Converts a time in seconds to ticks using the tempo map.
double secondsToTicks(const File& file, double seconds);

}  // namespace musan::midi
