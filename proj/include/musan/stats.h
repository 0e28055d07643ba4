#pragma once

// Corpus statistics keyed by structural position: where in a phrase a measure
// sits (start / middle / end) crossed with whether the phrase closes its
// section, plus an unconstrained background column.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "musan/notation.h"
#include "musan/sections.h"
#include "musan/song.h"

namespace musan {

struct AnalyzedSong {
  Song song;
  StructureAnalysis structure;
  SectionStructure sections;
};

using Corpus = std::vector<AnalyzedSong>;

/// Checks the structure tiles the song and derives its sections. A structure
/// without melodic phrases gets no sections.
AnalyzedSong makeAnalyzedSong(Song song, StructureAnalysis structure, int separator_threshold = 2);

enum class PhrasePos { Start, Middle, End };
enum class SectionPos { MidSection, SectionEnd };

struct PositionClass {
  PhrasePos phrase = PhrasePos::Start;
  SectionPos section = SectionPos::MidSection;

  /// 0..5: start/middle/end mid-section, then start/middle/end section-end.
  int column() const { return 3 * static_cast<int>(section) + static_cast<int>(phrase); }
  friend bool operator==(const PositionClass&, const PositionClass&) = default;
};

inline constexpr int kPositionClasses = 6;
inline constexpr int kBackgroundColumn = 6;
inline constexpr int kStatsColumns = 7;

const std::array<std::string, kStatsColumns>& positionColumnNames();

/// Position class of every measure that lies in a melodic phrase inside a
/// section; nullopt elsewhere. A one-measure phrase counts as End.
std::vector<std::optional<PositionClass>> measurePositions(const AnalyzedSong& song);

/// Category-by-position table. Counts may be fractional (duration weights).
struct StatsTable {
  std::string name;
  std::vector<std::string> rows;
  Eigen::MatrixXd counts;  // rows x kStatsColumns

  /// Column-normalized counts; empty columns are all zero.
  Eigen::MatrixXd probabilities() const;
  double probability(int row, int column) const;
  int rowIndex(const std::string& row) const;
  /// RFC 4180 CSV with a header row; probabilities or raw counts.
  std::string toCsv(bool raw_counts = false) const;
};

enum class Weighting {
  /// Chords by the fraction of the measure they occupy, notes by duration.
  Occupancy,
  /// One per measure (representative chord) or one per note onset.
  Count,
};

/// Row labels "I".."VII", "other".
const std::vector<std::string>& chordDegreeRows();
/// Row labels "1".."7", "chromatic".
const std::vector<std::string>& scaleDegreeRows();
/// Row labels for durationByPosition.
const std::vector<std::string>& durationRows();

/// 0..6 for diatonic roots, 7 for anything else.
int chordDegreeIndex(const ChordLabel& chord, const KeySignature& key);

/// P(chord degree | position) over melodic-phrase measures of songs in `mode`.
StatsTable chordFrequencyByPosition(const Corpus& corpus, Mode mode, Weighting weighting = Weighting::Occupancy);

/// P(melody scale degree | chord degree, position), measures whose
/// representative chord has `chord_degree`.
StatsTable melodyPitchGivenChord(const Corpus& corpus, int chord_degree, Mode mode,
                                 Weighting weighting = Weighting::Occupancy);

/// Note-duration buckets (in sixteenths: <=2, 3-4, 5-15, >=16) by position of
/// the measure holding the onset. One count per note.
StatsTable durationByPosition(const Corpus& corpus);

/// Distribution of a row's counts over the six position classes, e.g.
/// P(position | whole-or-longer note). All zero when the row is empty.
std::array<double, kPositionClasses> positionGivenCategory(const StatsTable& table, int row);

enum class Boundary { PhraseEnd, PhraseEndMidSection, SectionEnd, Elsewhere };

std::string_view boundaryName(Boundary boundary);

struct TransitionEstimate {
  double from_count = 0.0;
  double transition_count = 0.0;
  /// nullopt when no transition leaves `from` at this boundary.
  std::optional<double> probability;
};

/// P(next measure's chord degree = to | this measure's = from) over measure
/// pairs (m, m + 1) where m closes a phrase of the given kind, or for
/// Elsewhere is any other phrase measure.
TransitionEstimate chordTransitionAtBoundary(const Corpus& corpus, int from_degree, int to_degree, Boundary boundary,
                                             Mode mode = Mode::Major);

/// Histogram over integer keys.
struct Histogram {
  std::map<int, long> counts;

  void add(int key) { ++counts[key]; }
  long total() const;
  double probability(int key) const;
};

struct CorpusSummary {
  /// Keyed by decile lower bound in percent (0, 10, ..., 90).
  Histogram repeated_melody_coverage;
  Histogram phrase_length;
  Histogram sections_per_song;
  Histogram phrases_per_section;
  Histogram distinct_melodic_phrases;
  Histogram distinct_melodic_per_section;
  std::map<SectionRelation, long> relations;

  double relationShare(SectionRelation relation) const;
};

/// Fraction of measures covered by repeated melodic phrases (uppercase, not X).
double repeatedMelodyCoverage(const StructureAnalysis& structure);

CorpusSummary corpusSummary(const Corpus& corpus);
nlohmann::json toJson(const CorpusSummary& summary);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  /// One-tailed, alternative mean(A) > mean(B).
  double p = 0.5;
};

/// Welch's unequal-variance t-test. Requires at least two finite values per
/// sample. Two zero-variance samples compare their means exactly.
TTestResult oneTailedUnpairedTTest(std::span<const double> a, std::span<const double> b);
TTestResult welchTTest(double mean_a, double var_a, double n_a, double mean_b, double var_b, double n_b);

/// One-tailed Welch tests of each position column against background, over
/// 0/1 indicator samples reconstructed from a Count-weighted table.
/// Result is rows x kPositionClasses.
std::vector<std::array<TTestResult, kPositionClasses>> significanceVsBackground(const StatsTable& count_table);

}  // namespace musan
