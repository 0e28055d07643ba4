#pragma once

// Seeded synthetic songs built from repeated measure blocks. Used by the
// verify command and the test suites.

#include <cstdint>
#include <random>
#include <string_view>

#include "musan/song.h"

namespace musan {

/// Uniform integer in [lo, hi] from a 64-bit engine, identical across
/// standard libraries.
int uniformInt(std::mt19937_64& rng, int lo, int hi);
double uniformReal(std::mt19937_64& rng);

/// Random measure with melody (`melodic`) or accompaniment only.
Measure randomMeasure(std::mt19937_64& rng, const KeySignature& key, int steps, bool melodic);

/// Builds a song where each character is one measure: equal letters give
/// identical measures, digits give melodyless measures ("qrstuvwxqrst",
/// "ab12ab"). Notes never cross bar lines.
Song songFromPattern(std::string_view pattern, std::uint64_t seed, std::string id = "pattern");

struct SynthOptions {
  int measures = 16;
  int min_block = 2;
  int max_block = 4;
  /// Distinct blocks to draw from.
  int alphabet = 3;
  /// Chance that a block is melodyless.
  double non_melodic = 0.2;
};

/// Random sequence of repeated blocks, truncated to `measures`.
Song synthesizeSong(std::uint64_t seed, const SynthOptions& options = {});

}  // namespace musan
