#include "musan/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "musan/error.h"

namespace musan {

namespace {

bool isPhrase(const PhraseToken& token) { return token.melodic() && token.label != 'X'; }

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string formatNumber(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << v;
  return os.str();
}

StatsTable emptyTable(std::string name, const std::vector<std::string>& rows) {
  StatsTable table;
  table.name = std::move(name);
  table.rows = rows;
  table.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), kStatsColumns);
  return table;
}

void addCount(StatsTable& table, int row, const PositionClass& pos, double weight) {
  table.counts(row, pos.column()) += weight;
  table.counts(row, kBackgroundColumn) += weight;
}

int durationBucket(int steps) {
  if (steps <= 2) return 0;
  if (steps <= 4) return 1;
  if (steps < 16) return 2;
  return 3;
}

}  // namespace

AnalyzedSong makeAnalyzedSong(Song song, StructureAnalysis structure, int separator_threshold) {
  checkCoversSong(structure, song.measureCount());
  AnalyzedSong out;
  out.song = std::move(song);
  out.structure = std::move(structure);
  out.sections = sectionsOrSeparators(out.structure, separator_threshold);
  return out;
}

const std::array<std::string, kStatsColumns>& positionColumnNames() {
  static const std::array<std::string, kStatsColumns> names = {
      "start_midsection",  "middle_midsection", "end_midsection", "start_sectionend",
      "middle_sectionend", "end_sectionend",    "background"};
  return names;
}

std::vector<std::optional<PositionClass>> measurePositions(const AnalyzedSong& song) {
  std::vector<std::optional<PositionClass>> out(static_cast<std::size_t>(song.song.measureCount()));
  std::vector<int> starts = song.structure.startMeasures();
  for (const TokenRun& section : song.sections.sections) {
    std::size_t last_phrase = section.tokens.size();
    for (std::size_t k = 0; k < section.tokens.size(); ++k)
      if (isPhrase(section.tokens[k])) last_phrase = k;
    for (std::size_t k = 0; k < section.tokens.size(); ++k) {
      const PhraseToken& token = section.tokens[k];
      if (!isPhrase(token)) continue;
      SectionPos spos = k == last_phrase ? SectionPos::SectionEnd : SectionPos::MidSection;
      int first = starts[section.first_token + k];
      for (int m = 0; m < token.length; ++m) {
        PhrasePos ppos = m == token.length - 1 ? PhrasePos::End : (m == 0 ? PhrasePos::Start : PhrasePos::Middle);
        out[static_cast<std::size_t>(first + m)] = PositionClass{ppos, spos};
      }
    }
  }
  return out;
}

Eigen::MatrixXd StatsTable::probabilities() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
  for (Eigen::Index c = 0; c < counts.cols(); ++c) {
    double total = counts.col(c).sum();
    if (total > 0.0) p.col(c) = counts.col(c) / total;
  }
  return p;
}

double StatsTable::probability(int row, int column) const {
  double total = counts.col(column).sum();
  return total > 0.0 ? counts(row, column) / total : 0.0;
}

int StatsTable::rowIndex(const std::string& row) const {
  auto it = std::find(rows.begin(), rows.end(), row);
  if (it == rows.end()) throw ContractError("unknown row '" + row + "' in table " + name);
  return static_cast<int>(it - rows.begin());
}

std::string StatsTable::toCsv(bool raw_counts) const {
  Eigen::MatrixXd values = raw_counts ? counts : probabilities();
  std::string out = "category";
  for (const std::string& col : positionColumnNames()) out += "," + csvField(col);
  out += "\r\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += csvField(rows[r]);
    for (int c = 0; c < kStatsColumns; ++c) out += "," + formatNumber(values(static_cast<Eigen::Index>(r), c));
    out += "\r\n";
  }
  return out;
}

const std::vector<std::string>& chordDegreeRows() {
  static const std::vector<std::string> rows = {"I", "II", "III", "IV", "V", "VI", "VII", "other"};
  return rows;
}

const std::vector<std::string>& scaleDegreeRows() {
  static const std::vector<std::string> rows = {"1", "2", "3", "4", "5", "6", "7", "chromatic"};
  return rows;
}

const std::vector<std::string>& durationRows() {
  static const std::vector<std::string> rows = {"eighth_or_shorter", "quarter", "half", "whole_or_longer"};
  return rows;
}

int chordDegreeIndex(const ChordLabel& chord, const KeySignature& key) {
  return scaleDegree(chord.root_pc, key).value_or(7);
}

StatsTable chordFrequencyByPosition(const Corpus& corpus, Mode mode, Weighting weighting) {
  StatsTable table = emptyTable(mode == Mode::Major ? "chord_major" : "chord_minor", chordDegreeRows());
  for (const AnalyzedSong& entry : corpus) {
    const Song& song = entry.song;
    if (song.key.mode != mode) continue;
    auto positions = measurePositions(entry);
    for (std::size_t m = 0; m < positions.size(); ++m) {
      if (!positions[m]) continue;
      const Measure& measure = song.measures[m];
      if (weighting == Weighting::Count) {
        addCount(table, chordDegreeIndex(representativeChord(measure), song.key), *positions[m], 1.0);
        continue;
      }
      for (std::size_t c = 0; c < measure.chords.size(); ++c) {
        int end = c + 1 < measure.chords.size() ? measure.chords[c + 1].onset : measure.steps;
        double share = static_cast<double>(end - measure.chords[c].onset) / measure.steps;
        addCount(table, chordDegreeIndex(measure.chords[c], song.key), *positions[m], share);
      }
    }
  }
  return table;
}

StatsTable melodyPitchGivenChord(const Corpus& corpus, int chord_degree, Mode mode, Weighting weighting) {
  if (chord_degree < 0 || chord_degree > 7) throw ContractError("chord degree must be in 0..7");
  StatsTable table = emptyTable("melody_given_" + chordDegreeRows()[static_cast<std::size_t>(chord_degree)] +
                                    (mode == Mode::Major ? "_major" : "_minor"),
                                scaleDegreeRows());
  for (const AnalyzedSong& entry : corpus) {
    const Song& song = entry.song;
    if (song.key.mode != mode) continue;
    auto positions = measurePositions(entry);
    int steps = song.measureSteps();
    for (std::size_t m = 0; m < positions.size(); ++m) {
      if (!positions[m]) continue;
      const Measure& measure = song.measures[m];
      if (chordDegreeIndex(representativeChord(measure), song.key) != chord_degree) continue;
      int measure_end = (static_cast<int>(m) + 1) * steps;
      for (const NoteEvent& note : measure.notes) {
        int row = scaleDegree(((note.pitch % 12) + 12) % 12, song.key).value_or(7);
        double weight = weighting == Weighting::Count ? 1.0 : std::min(note.end(), measure_end) - note.onset;
        addCount(table, row, *positions[m], weight);
      }
    }
  }
  return table;
}

StatsTable durationByPosition(const Corpus& corpus) {
  StatsTable table = emptyTable("duration", durationRows());
  for (const AnalyzedSong& entry : corpus) {
    auto positions = measurePositions(entry);
    for (std::size_t m = 0; m < positions.size(); ++m) {
      if (!positions[m]) continue;
      for (const NoteEvent& note : entry.song.measures[m].notes)
        addCount(table, durationBucket(note.duration), *positions[m], 1.0);
    }
  }
  return table;
}

std::array<double, kPositionClasses> positionGivenCategory(const StatsTable& table, int row) {
  std::array<double, kPositionClasses> out{};
  double total = 0.0;
  for (int c = 0; c < kPositionClasses; ++c) total += table.counts(row, c);
  if (total <= 0.0) return out;
  for (int c = 0; c < kPositionClasses; ++c) out[static_cast<std::size_t>(c)] = table.counts(row, c) / total;
  return out;
}

std::string_view boundaryName(Boundary boundary) {
  switch (boundary) {
    case Boundary::PhraseEnd: return "phrase_end";
    case Boundary::PhraseEndMidSection: return "phrase_end_midsection";
    case Boundary::SectionEnd: return "section_end";
    case Boundary::Elsewhere: return "elsewhere";
  }
  return "?";
}

TransitionEstimate chordTransitionAtBoundary(const Corpus& corpus, int from_degree, int to_degree, Boundary boundary,
                                             Mode mode) {
  TransitionEstimate out;
  for (const AnalyzedSong& entry : corpus) {
    const Song& song = entry.song;
    if (song.key.mode != mode) continue;
    auto positions = measurePositions(entry);
    for (std::size_t m = 0; m + 1 < positions.size(); ++m) {
      if (!positions[m]) continue;
      bool end = positions[m]->phrase == PhrasePos::End;
      bool section_end = positions[m]->section == SectionPos::SectionEnd;
      bool selected = false;
      switch (boundary) {
        case Boundary::PhraseEnd: selected = end; break;
        case Boundary::PhraseEndMidSection: selected = end && !section_end; break;
        case Boundary::SectionEnd: selected = end && section_end; break;
        case Boundary::Elsewhere: selected = !end; break;
      }
      if (!selected) continue;
      if (chordDegreeIndex(representativeChord(song.measures[m]), song.key) != from_degree) continue;
      out.from_count += 1.0;
      if (chordDegreeIndex(representativeChord(song.measures[m + 1]), song.key) == to_degree)
        out.transition_count += 1.0;
    }
  }
  if (out.from_count > 0.0) out.probability = out.transition_count / out.from_count;
  return out;
}

long Histogram::total() const {
  long t = 0;
  for (const auto& [key, n] : counts) t += n;
  return t;
}

double Histogram::probability(int key) const {
  long t = total();
  auto it = counts.find(key);
  return t == 0 || it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(t);
}

double CorpusSummary::relationShare(SectionRelation relation) const {
  long total = 0;
  for (const auto& [r, n] : relations) total += n;
  auto it = relations.find(relation);
  return total == 0 || it == relations.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

double repeatedMelodyCoverage(const StructureAnalysis& structure) {
  int total = structure.totalLength();
  if (total == 0) return 0.0;
  int covered = 0;
  for (const PhraseToken& t : structure.tokens)
    if (isPhrase(t)) covered += t.length;
  return static_cast<double>(covered) / total;
}

CorpusSummary corpusSummary(const Corpus& corpus) {
  CorpusSummary s;
  for (const AnalyzedSong& entry : corpus) {
    double cov = repeatedMelodyCoverage(entry.structure);
    s.repeated_melody_coverage.add(10 * std::min(9, static_cast<int>(std::floor(cov * 10.0 + 1e-9))));
    std::set<char> labels;
    for (const PhraseToken& t : entry.structure.tokens) {
      if (!isPhrase(t)) continue;
      s.phrase_length.add(t.length);
      labels.insert(t.label);
    }
    s.distinct_melodic_phrases.add(static_cast<int>(labels.size()));
    const auto& sections = entry.sections.sections;
    s.sections_per_song.add(static_cast<int>(sections.size()));
    for (std::size_t k = 0; k < sections.size(); ++k) {
      s.phrases_per_section.add(static_cast<int>(sections[k].tokens.size()));
      std::set<char> section_labels;
      for (const PhraseToken& t : sections[k].tokens)
        if (isPhrase(t)) section_labels.insert(t.label);
      s.distinct_melodic_per_section.add(static_cast<int>(section_labels.size()));
      if (k > 0) ++s.relations[classifyRelation(sections[k - 1].tokens, sections[k].tokens)];
    }
  }
  return s;
}

nlohmann::json toJson(const CorpusSummary& summary) {
  auto hist = [](const Histogram& h) {
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json probs = nlohmann::json::object();
    for (const auto& [key, n] : h.counts) {
      counts[std::to_string(key)] = n;
      probs[std::to_string(key)] = h.probability(key);
    }
    return nlohmann::json{{"counts", counts}, {"probabilities", probs}, {"total", h.total()}};
  };
  nlohmann::json relations = nlohmann::json::object();
  for (SectionRelation r : {SectionRelation::Exact, SectionRelation::SuffixRepeat, SectionRelation::PrefixRepeat,
                            SectionRelation::Other}) {
    auto it = summary.relations.find(r);
    relations[std::string(relationName(r))] = {{"count", it == summary.relations.end() ? 0L : it->second},
                                               {"share", summary.relationShare(r)}};
  }
  return {{"repeated_melody_coverage_percent", hist(summary.repeated_melody_coverage)},
          {"phrase_length", hist(summary.phrase_length)},
          {"sections_per_song", hist(summary.sections_per_song)},
          {"phrases_per_section", hist(summary.phrases_per_section)},
          {"distinct_melodic_phrases", hist(summary.distinct_melodic_phrases)},
          {"distinct_melodic_per_section", hist(summary.distinct_melodic_per_section)},
          {"section_relations", relations}};
}

TTestResult welchTTest(double mean_a, double var_a, double n_a, double mean_b, double var_b, double n_b) {
  if (n_a < 2 || n_b < 2) throw ContractError("t-test needs at least two observations per sample");
  for (double v : {mean_a, var_a, mean_b, var_b})
    if (!std::isfinite(v)) throw ContractError("t-test inputs must be finite");
  if (var_a < 0 || var_b < 0) throw ContractError("variance must be non-negative");
  TTestResult r;
  double qa = var_a / n_a;
  double qb = var_b / n_b;
  double se2 = qa + qb;
  if (se2 <= 0.0) {
    r.df = n_a + n_b - 2;
    if (mean_a > mean_b) {
      r.t = std::numeric_limits<double>::infinity();
      r.p = 0.0;
    } else if (mean_a < mean_b) {
      r.t = -std::numeric_limits<double>::infinity();
      r.p = 1.0;
    } else {
      r.t = 0.0;
      r.p = 0.5;
    }
    return r;
  }
  r.t = (mean_a - mean_b) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (n_a - 1) + qb * qb / (n_b - 1));
  boost::math::students_t dist(r.df);
  r.p = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

TTestResult oneTailedUnpairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ContractError("t-test needs at least two observations per sample");
  auto moments = [](std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) {
      if (!std::isfinite(v)) throw ContractError("t-test inputs must be finite");
      mean += v;
    }
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  return welchTTest(ma, va, static_cast<double>(a.size()), mb, vb, static_cast<double>(b.size()));
}

std::vector<std::array<TTestResult, kPositionClasses>> significanceVsBackground(const StatsTable& count_table) {
  std::vector<std::array<TTestResult, kPositionClasses>> out(count_table.rows.size());
  auto indicator = [](double hits, double n) {
    double mean = hits / n;
    double var = n > 1 ? mean * (1.0 - mean) * n / (n - 1) : 0.0;
    return std::pair{mean, std::max(0.0, var)};
  };
  double n_bg = count_table.counts.col(kBackgroundColumn).sum();
  for (std::size_t r = 0; r < count_table.rows.size(); ++r) {
    auto row = static_cast<Eigen::Index>(r);
    for (int c = 0; c < kPositionClasses; ++c) {
      double n_c = count_table.counts.col(c).sum();
      TTestResult& res = out[r][static_cast<std::size_t>(c)];
      if (n_c < 2 || n_bg < 2) {
        res = TTestResult{0.0, 0.0, std::numeric_limits<double>::quiet_NaN()};
        continue;
      }
      auto [ma, va] = indicator(count_table.counts(row, c), n_c);
      auto [mb, vb] = indicator(count_table.counts(row, kBackgroundColumn), n_bg);
      res = welchTTest(ma, va, n_c, mb, vb, n_bg);
    }
  }
  return out;
}

}  // namespace musan
