#pragma once

// Measure- and segment-level repetition scoring from chords, onset rhythm and
// melody.

#include <optional>

#include <Eigen/Core>

#include "musan/song.h"

namespace musan {

struct SimWeights {
  double chord = 0.25;
  double rhythm = 0.25;
  double melody = 0.5;
  /// Minimum weighted score for two measures to match.
  double theta_measure = 0.7;
  /// Minimum fraction of position-wise matched measures for two segments to match.
  double theta_segment = 0.8;

  /// Throws ContractError unless weights are non-negative, sum to 1 within
  /// 1e-9, and both thresholds lie in (0, 1].
  void validate() const;
};

struct PhraseLengthLimits {
  int min_length = 4;
  int max_length = 20;
};

/// 1 for identical representative chords, 0.5 for a shared root with a
/// different quality, else 0.
double chordSim(const Measure& a, const Measure& b);
/// Jaccard similarity of onset positions; two empty patterns give 1.
double rhythmSim(const Measure& a, const Measure& b);
/// 1 minus the length-normalized edit distance of the sixteenth-step pitch
/// grids. Both melodyless gives 1, exactly one melodyless gives 0.
double melodySim(const Measure& a, const Measure& b);

struct MeasureScore {
  double score = 0.0;
  bool matched = false;
};

MeasureScore measureMatch(const Measure& a, const Measure& b, const SimWeights& w);

struct MatchPair {
  int start1 = 0;
  int start2 = 0;
  int length = 0;
  double score = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// Dense symmetric table of measureMatch over all measure pairs of a song.
struct MeasureSimilarity {
  Eigen::MatrixXd score;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> matched;
};

MeasureSimilarity computeMeasureSimilarity(const Song& song, const SimWeights& w);

/// Matches segments [i, i+L) and [j, j+L): at least theta_segment of the
/// aligned measures match and both endpoint pairs match. Score is the mean
/// aligned measure score. Throws ContractError if the segments overlap, run
/// past the song end, or L is outside `limits`.
std::optional<MatchPair> segmentMatch(const Song& song, int i, int j, int length, const SimWeights& w,
                                      const PhraseLengthLimits& limits = {});
std::optional<MatchPair> segmentMatch(const MeasureSimilarity& sim, int i, int j, int length, const SimWeights& w,
                                      const PhraseLengthLimits& limits = {});

}  // namespace musan
