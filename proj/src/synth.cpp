#include "musan/synth.h"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "musan/error.h"

namespace musan {

int uniformInt(std::mt19937_64& rng, int lo, int hi) {
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

double uniformReal(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Measure randomMeasure(std::mt19937_64& rng, const KeySignature& key, int steps, bool melodic) {
  static const ChordQuality qualities[] = {ChordQuality::Maj, ChordQuality::Min, ChordQuality::Min, ChordQuality::Maj,
                                           ChordQuality::Maj, ChordQuality::Min, ChordQuality::Dim};
  const auto& offsets = scaleOffsets(key.mode);
  Measure m;
  int degree = uniformInt(rng, 0, 6);
  m.chords.push_back(ChordLabel{(key.tonic_pc + offsets[static_cast<std::size_t>(degree)]) % 12,
                                qualities[degree], 0});
  if (!melodic) {
    m.accompaniment = {48 + m.chords[0].root_pc};
    return m;
  }
  int count = uniformInt(rng, 2, 6);
  std::vector<int> onsets;
  while (static_cast<int>(onsets.size()) < count) {
    int o = uniformInt(rng, 0, steps - 1);
    if (std::find(onsets.begin(), onsets.end(), o) == onsets.end()) onsets.push_back(o);
  }
  std::sort(onsets.begin(), onsets.end());
  if (onsets.front() != 0 && uniformInt(rng, 0, 1) == 0) onsets.front() = 0;
  for (std::size_t k = 0; k < onsets.size(); ++k) {
    int limit = k + 1 < onsets.size() ? onsets[k + 1] : steps;
    int dur = uniformInt(rng, 1, limit - onsets[k]);
    int pitch = 60 + key.tonic_pc + offsets[static_cast<std::size_t>(uniformInt(rng, 0, 6))] + 12 * uniformInt(rng, -1, 0);
    m.notes.push_back(NoteEvent{onsets[k], dur, pitch});
  }
  return m;
}

Song songFromPattern(std::string_view pattern, std::uint64_t seed, std::string id) {
  if (pattern.empty()) throw ContractError("empty measure pattern");
  std::mt19937_64 rng(seed);
  Song song;
  song.id = std::move(id);
  song.key = KeySignature{0, Mode::Major};
  song.time = TimeSignature{4, 4};
  int steps = song.measureSteps();
  std::map<char, Measure> blocks;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    char c = pattern[k];
    bool digit = c >= '0' && c <= '9';
    bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (!digit && !letter) throw ContractError(std::string("bad pattern character '") + c + "'");
    if (!blocks.contains(c)) blocks.emplace(c, randomMeasure(rng, song.key, steps, letter));
    Measure m = blocks.at(c);
    m.index = static_cast<int>(k);
    for (NoteEvent& n : m.notes) n.onset += static_cast<int>(k) * steps;
    song.measures.push_back(std::move(m));
  }
  deriveMeasureFeatures(song);
  validateSong(song);
  return song;
}

Song synthesizeSong(std::uint64_t seed, const SynthOptions& options) {
  if (options.measures < 1 || options.min_block < 1 || options.max_block < options.min_block || options.alphabet < 1)
    throw ContractError("bad synth options");
  std::mt19937_64 rng(seed);
  std::vector<std::string> blocks;
  int next_letter = 0;
  int next_digit = 0;
  for (int b = 0; b < options.alphabet; ++b) {
    int len = uniformInt(rng, options.min_block, options.max_block);
    bool melodic = uniformReal(rng) >= options.non_melodic;
    std::string block;
    for (int k = 0; k < len; ++k) {
      if (melodic) {
        block += static_cast<char>('a' + next_letter % 26);
        ++next_letter;
      } else {
        block += static_cast<char>('0' + next_digit % 10);
        ++next_digit;
      }
    }
    blocks.push_back(block);
  }
  std::string pattern;
  while (static_cast<int>(pattern.size()) < options.measures)
    pattern += blocks[static_cast<std::size_t>(uniformInt(rng, 0, options.alphabet - 1))];
  pattern.resize(static_cast<std::size_t>(options.measures));
  return songFromPattern(pattern, rng(), "synth-" + std::to_string(seed));
}

}  // namespace musan
