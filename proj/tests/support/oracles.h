#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls the code it checks.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "musan/matcher.h"
#include "musan/notation.h"
#include "musan/optimizer.h"
#include "musan/similarity.h"
#include "musan/song.h"
#include "musan/stats.h"

namespace oracle {

// --- similarity / pairs ----------------------------------------------------

/// Weighted measure score from first principles (full-matrix Levenshtein,
/// std::set Jaccard, longest-chord representative).
double measureScore(const musan::Song& song, int a, int b, const musan::SimWeights& w);

/// Every (i, j, L) with i + L <= j that satisfies the segment rule.
std::vector<musan::MatchPair> allPairs(const musan::Song& song, const musan::SimWeights& w,
                                       const musan::PhraseLengthLimits& limits);

// --- cliques ---------------------------------------------------------------

/// Maximal cliques by checking every vertex subset (n <= 20).
std::vector<std::vector<int>> maximalCliquesBySubsets(const std::vector<std::vector<int>>& adjacency);

std::vector<std::vector<int>> randomGraph(std::mt19937_64& rng, int n, double density);

// --- structure search ------------------------------------------------------

/// Minimum SDL over every segmentation of the song into set instances and
/// melody-homogeneous fillers.
double minimumSdlByEnumeration(const std::vector<bool>& mask, const std::vector<musan::PhraseSet>& sets,
                               const musan::SdlParams& params);

/// SDL straight from the definition: h * tokens + g * sum of per-label mean
/// lengths, every X/x/i/o token its own label.
double sdlFromDefinition(const std::string& notation, double h, double g);

/// Random phrase sets over a song of n measures (instances of one length,
/// non-overlapping within a set).
std::vector<musan::PhraseSet> randomPhraseSets(std::mt19937_64& rng, int n, int max_sets);

std::vector<bool> randomMask(std::mt19937_64& rng, int n);

// --- notation --------------------------------------------------------------

/// Valid notation: optional intro, body, optional outro.
std::string randomNotation(std::mt19937_64& rng);

// --- stats -----------------------------------------------------------------

struct CadencePlant {
  double section_end = 0.94;
  double mid_section = 0.84;
  double elsewhere = 0.47;
  int songs = 4000;
};

/// Songs "i2 A4B4 x3 A4B4 x3 A4B4 o2" whose chord sequence is a Markov chain:
/// after V the next chord is I with the plant probability for the position of
/// the V measure, otherwise one of the other six degrees uniformly; after
/// anything else the next chord is V with probability 1/2, otherwise uniform
/// over the other six.
musan::Corpus plantedCadenceCorpus(std::uint64_t seed, const CadencePlant& plant);

/// Chord of a diatonic degree (0..6) in C major, measure-long.
musan::ChordLabel degreeChord(int degree);

// --- MIDI ------------------------------------------------------------------

struct MidiNote {
  std::int64_t on = 0;
  std::int64_t off = 0;
  int pitch = 60;
  int velocity = 90;
  int channel = 0;
};

struct MidiTrackSpec {
  std::string name;
  std::vector<MidiNote> notes;
};

/// Format-1 SMF: a conductor track (tempo, time signature) then the given
/// tracks. `running_status` reuses status bytes where possible.
std::vector<std::uint8_t> writeMidi(const std::vector<MidiTrackSpec>& tracks, int division, int numerator = 4,
                                    int denominator = 4, int tempo_us = 500000, bool running_status = false);

}  // namespace oracle
