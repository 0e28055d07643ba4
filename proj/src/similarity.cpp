#include "musan/similarity.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "musan/error.h"

namespace musan {

namespace {

// Scores and thresholds are compared with this slack so that weights summing
// to 1 within rounding still match identical measures at theta = 1.
constexpr double kScoreEps = 1e-9;

int editDistance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void checkSegments(int n, int i, int j, int length, const PhraseLengthLimits& limits) {
  if (length < limits.min_length || length > limits.max_length) {
    throw ContractError("segment length " + std::to_string(length) + " outside [" +
                        std::to_string(limits.min_length) + ", " + std::to_string(limits.max_length) + "]");
  }
  if (i < 0 || i + length > j) throw ContractError("segments overlap or are out of order");
  if (j + length > n) throw ContractError("segment runs past the song end");
}

}  // namespace

void SimWeights::validate() const {
  if (chord < 0 || rhythm < 0 || melody < 0) throw ContractError("similarity weights must be non-negative");
  if (std::abs(chord + rhythm + melody - 1.0) > 1e-9) throw ContractError("similarity weights must sum to 1");
  if (!(theta_measure > 0 && theta_measure <= 1)) throw ContractError("theta_measure must be in (0, 1]");
  if (!(theta_segment > 0 && theta_segment <= 1)) throw ContractError("theta_segment must be in (0, 1]");
}

double chordSim(const Measure& a, const Measure& b) {
  const auto& ca = representativeChord(a);
  const auto& cb = representativeChord(b);
  if (ca.root_pc != cb.root_pc) return 0.0;
  return ca.quality == cb.quality ? 1.0 : 0.5;
}

double rhythmSim(const Measure& a, const Measure& b) {
  const auto& pa = a.onset_pattern;
  const auto& pb = b.onset_pattern;
  if (pa.empty() && pb.empty()) return 1.0;
  std::vector<int> common;
  std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(common));
  const std::size_t uni = pa.size() + pb.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

double melodySim(const Measure& a, const Measure& b) {
  if (!a.has_melody && !b.has_melody) return 1.0;
  if (a.has_melody != b.has_melody) return 0.0;
  const auto len = std::max(a.pitch_grid.size(), b.pitch_grid.size());
  if (len == 0) return 1.0;
  return 1.0 - static_cast<double>(editDistance(a.pitch_grid, b.pitch_grid)) / static_cast<double>(len);
}

MeasureScore measureMatch(const Measure& a, const Measure& b, const SimWeights& w) {
  const double score = w.chord * chordSim(a, b) + w.rhythm * rhythmSim(a, b) + w.melody * melodySim(a, b);
  return {score, score >= w.theta_measure - kScoreEps};
}

MeasureSimilarity computeMeasureSimilarity(const Song& song, const SimWeights& w) {
  const int n = song.measureCount();
  MeasureSimilarity sim{Eigen::MatrixXd::Zero(n, n), Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false)};
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const auto r = measureMatch(song.measures[a], song.measures[b], w);
      sim.score(a, b) = sim.score(b, a) = r.score;
      sim.matched(a, b) = sim.matched(b, a) = r.matched;
    }
  }
  return sim;
}

std::optional<MatchPair> segmentMatch(const MeasureSimilarity& sim, int i, int j, int length, const SimWeights& w,
                                      const PhraseLengthLimits& limits) {
  checkSegments(static_cast<int>(sim.score.rows()), i, j, length, limits);
  if (!sim.matched(i, j) || !sim.matched(i + length - 1, j + length - 1)) return std::nullopt;
  int matched = 0;
  double total = 0.0;
  for (int k = 0; k < length; ++k) {
    matched += sim.matched(i + k, j + k) ? 1 : 0;
    total += sim.score(i + k, j + k);
  }
  if (static_cast<double>(matched) / length < w.theta_segment - kScoreEps) return std::nullopt;
  return MatchPair{i, j, length, total / length};
}

std::optional<MatchPair> segmentMatch(const Song& song, int i, int j, int length, const SimWeights& w,
                                      const PhraseLengthLimits& limits) {
  checkSegments(song.measureCount(), i, j, length, limits);
  if (!measureMatch(song.measures[i], song.measures[j], w).matched ||
      !measureMatch(song.measures[i + length - 1], song.measures[j + length - 1], w).matched) {
    return std::nullopt;
  }
  int matched = 0;
  double total = 0.0;
  for (int k = 0; k < length; ++k) {
    const auto r = measureMatch(song.measures[i + k], song.measures[j + k], w);
    matched += r.matched ? 1 : 0;
    total += r.score;
  }
  if (static_cast<double>(matched) / length < w.theta_segment - kScoreEps) return std::nullopt;
  return MatchPair{i, j, length, total / length};
}

}  // namespace musan
