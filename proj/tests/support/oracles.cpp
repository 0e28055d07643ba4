#include "oracles.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace oracle {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::vector<int> pitchGrid(const musan::Song& song, int m) {
  int steps = song.measureSteps();
  std::vector<int> grid(static_cast<std::size_t>(steps), -1);
  for (const musan::Measure& measure : song.measures)
    for (const musan::NoteEvent& n : measure.notes)
      for (int s = 0; s < steps; ++s) {
        int t = m * steps + s;
        if (n.onset <= t && t < n.onset + n.duration) grid[static_cast<std::size_t>(s)] = n.pitch;
      }
  return grid;
}

std::set<int> onsets(const musan::Song& song, int m) {
  std::set<int> out;
  int steps = song.measureSteps();
  for (const musan::NoteEvent& n : song.measures[static_cast<std::size_t>(m)].notes) out.insert(n.onset - m * steps);
  return out;
}

musan::ChordLabel longestChord(const musan::Measure& measure, int steps) {
  musan::ChordLabel best = measure.chords.front();
  int best_len = -1;
  for (std::size_t k = 0; k < measure.chords.size(); ++k) {
    int end = k + 1 < measure.chords.size() ? measure.chords[k + 1].onset : steps;
    int len = end - measure.chords[k].onset;
    if (len > best_len) {
      best_len = len;
      best = measure.chords[k];
    }
  }
  return best;
}

int levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

}  // namespace

double measureScore(const musan::Song& song, int a, int b, const musan::SimWeights& w) {
  int steps = song.measureSteps();
  auto ca = longestChord(song.measures[static_cast<std::size_t>(a)], steps);
  auto cb = longestChord(song.measures[static_cast<std::size_t>(b)], steps);
  double chord = ca.root_pc != cb.root_pc ? 0.0 : (ca.quality == cb.quality ? 1.0 : 0.5);

  auto oa = onsets(song, a), ob = onsets(song, b);
  double rhythm = 1.0;
  if (!oa.empty() || !ob.empty()) {
    std::set<int> all = oa;
    all.insert(ob.begin(), ob.end());
    int common = 0;
    for (int x : oa) common += ob.count(x) ? 1 : 0;
    rhythm = static_cast<double>(common) / static_cast<double>(all.size());
  }

  auto ga = pitchGrid(song, a), gb = pitchGrid(song, b);
  bool ma = std::any_of(ga.begin(), ga.end(), [](int p) { return p >= 0; });
  bool mb = std::any_of(gb.begin(), gb.end(), [](int p) { return p >= 0; });
  double melody;
  if (!ma && !mb)
    melody = 1.0;
  else if (ma != mb)
    melody = 0.0;
  else
    melody = 1.0 - static_cast<double>(levenshtein(ga, gb)) / static_cast<double>(std::max(ga.size(), gb.size()));
  return w.chord * chord + w.rhythm * rhythm + w.melody * melody;
}

std::vector<musan::MatchPair> allPairs(const musan::Song& song, const musan::SimWeights& w,
                                       const musan::PhraseLengthLimits& limits) {
  const double eps = 1e-9;
  int n = song.measureCount();
  std::vector<std::vector<double>> score(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) score[a][b] = measureScore(song, a, b, w);
  auto match = [&](int a, int b) { return score[a][b] >= w.theta_measure - eps; };
  std::vector<musan::MatchPair> out;
  for (int len = limits.max_length; len >= limits.min_length; --len)
    for (int i = 0; i < n; ++i)
      for (int j = i + len; j + len <= n; ++j) {
        if (!match(i, j) || !match(i + len - 1, j + len - 1)) continue;
        int hits = 0;
        double total = 0.0;
        for (int k = 0; k < len; ++k) {
          hits += match(i + k, j + k) ? 1 : 0;
          total += score[i + k][j + k];
        }
        if (static_cast<double>(hits) / len >= w.theta_segment - eps) out.push_back({i, j, len, total / len});
      }
  return out;
}

std::vector<std::vector<int>> maximalCliquesBySubsets(const std::vector<std::vector<int>>& adjacency) {
  int n = static_cast<int>(adjacency.size());
  std::vector<std::uint32_t> nbr(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int u : adjacency[v]) nbr[v] |= 1u << u;
  auto isClique = [&](std::uint32_t s) {
    for (int v = 0; v < n; ++v)
      if ((s >> v & 1) && (s & ~(1u << v) & ~nbr[v])) return false;
    return true;
  };
  std::vector<std::vector<int>> out;
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    if (!isClique(s)) continue;
    bool maximal = true;
    for (int v = 0; v < n && maximal; ++v)
      if (!(s >> v & 1) && (nbr[v] & s) == s) maximal = false;
    if (!maximal) continue;
    std::vector<int> c;
    for (int v = 0; v < n; ++v)
      if (s >> v & 1) c.push_back(v);
    out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> randomGraph(std::mt19937_64& rng, int n, double density) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  std::bernoulli_distribution edge(density);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (edge(rng)) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
  for (auto& l : adj) std::sort(l.begin(), l.end());
  return adj;
}

double minimumSdlByEnumeration(const std::vector<bool>& mask, const std::vector<musan::PhraseSet>& sets,
                               const musan::SdlParams& params) {
  int n = static_cast<int>(mask.size());
  std::map<int, std::vector<std::pair<int, int>>> starts;  // start -> (set, length)
  for (std::size_t s = 0; s < sets.size(); ++s)
    for (const auto& inst : sets[s].instances) starts[inst.start].push_back({static_cast<int>(s), inst.length});
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> uses(sets.size(), 0);
  std::function<void(int, int, int)> go = [&](int pos, int tokens, int filler) {
    if (pos == n) {
      double described = filler;
      for (std::size_t s = 0; s < sets.size(); ++s)
        if (uses[s] > 0) described += sets[s].length();
      best = std::min(best, params.h * tokens + params.g * described);
      return;
    }
    for (auto [s, len] : starts[pos]) {
      if (pos + len > n) continue;
      ++uses[s];
      go(pos + len, tokens + 1, filler);
      --uses[s];
    }
    for (int end = pos + 1; end <= n && mask[end - 1] == mask[pos]; ++end) go(end, tokens + 1, filler + end - pos);
  };
  go(0, 0, 0);
  return best;
}

double sdlFromDefinition(const std::string& notation, double h, double g) {
  std::vector<std::pair<char, int>> tokens;
  for (std::size_t k = 0; k < notation.size();) {
    char label = notation[k++];
    int len = 0;
    while (k < notation.size() && std::isdigit(static_cast<unsigned char>(notation[k]))) len = 10 * len + (notation[k++] - '0');
    tokens.push_back({label, len});
  }
  std::map<char, std::vector<int>> groups;
  double described = 0.0;
  for (auto [label, len] : tokens) {
    if (label == 'X' || label == 'x' || label == 'i' || label == 'o')
      described += len;
    else
      groups[label].push_back(len);
  }
  for (const auto& [label, lens] : groups)
    described += static_cast<double>(std::accumulate(lens.begin(), lens.end(), 0)) / static_cast<double>(lens.size());
  return h * static_cast<double>(tokens.size()) + g * described;
}

std::vector<musan::PhraseSet> randomPhraseSets(std::mt19937_64& rng, int n, int max_sets) {
  std::vector<musan::PhraseSet> out;
  int count = uniform(rng, 0, max_sets);
  for (int s = 0; s < count; ++s) {
    int len = uniform(rng, 1, std::max(1, std::min(4, n / 2)));
    int want = uniform(rng, 2, 4);
    musan::PhraseSet set;
    for (int attempt = 0; attempt < 30 && static_cast<int>(set.instances.size()) < want; ++attempt) {
      musan::Instance inst{uniform(rng, 0, n - len), len};
      bool clash = std::any_of(set.instances.begin(), set.instances.end(),
                               [&](const musan::Instance& o) { return o.overlaps(inst); });
      if (!clash) set.instances.push_back(inst);
    }
    if (set.instances.size() < 2) continue;
    std::sort(set.instances.begin(), set.instances.end());
    set.mean_score = std::uniform_real_distribution<double>(0.7, 1.0)(rng);
    out.push_back(set);
  }
  return out;
}

std::vector<bool> randomMask(std::mt19937_64& rng, int n) {
  std::vector<bool> mask(static_cast<std::size_t>(n));
  bool cur = std::bernoulli_distribution(0.8)(rng);
  for (int m = 0; m < n; ++m) {
    if (std::bernoulli_distribution(0.15)(rng)) cur = !cur;
    mask[static_cast<std::size_t>(m)] = cur;
  }
  return mask;
}

std::string randomNotation(std::mt19937_64& rng) {
  static const std::string upper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  static const std::string lower = "abcdefghjklmnpqrstuvwxyz";
  auto length = [&] {
    int r = uniform(rng, 0, 9);
    return r < 8 ? uniform(rng, 1, 16) : uniform(rng, 17, 4000);
  };
  std::string out;
  for (int k = uniform(rng, 0, 2); k > 0; --k) out += "i" + std::to_string(length());
  for (int k = uniform(rng, 1, 14); k > 0; --k) {
    const std::string& pool = uniform(rng, 0, 2) == 0 ? lower : upper;
    out += pool[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(pool.size()) - 1))];
    out += std::to_string(length());
  }
  for (int k = uniform(rng, 0, 2); k > 0; --k) out += "o" + std::to_string(length());
  return out;
}

musan::ChordLabel degreeChord(int degree) {
  static const int roots[] = {0, 2, 4, 5, 7, 9, 11};
  static const musan::ChordQuality qualities[] = {musan::ChordQuality::Maj, musan::ChordQuality::Min,
                                                  musan::ChordQuality::Min, musan::ChordQuality::Maj,
                                                  musan::ChordQuality::Maj, musan::ChordQuality::Min,
                                                  musan::ChordQuality::Dim};
  return {roots[degree], qualities[degree], 0};
}

musan::Corpus plantedCadenceCorpus(std::uint64_t seed, const CadencePlant& plant) {
  enum Kind { Other, Elsewhere, MidEnd, SectionEnd };
  // i2 A4 B4 x3 A4 B4 x3 A4 B4 o2
  std::vector<Kind> kinds(2, Other);
  for (int section = 0; section < 3; ++section) {
    if (section > 0) kinds.insert(kinds.end(), 3, Other);
    kinds.insert(kinds.end(), {Elsewhere, Elsewhere, Elsewhere, MidEnd, Elsewhere, Elsewhere, Elsewhere, SectionEnd});
  }
  kinds.insert(kinds.end(), 2, Other);
  const std::string structure = "i2A4B4x3A4B4x3A4B4o2";

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto otherThan = [&](int avoid) {
    int d = uniform(rng, 0, 5);
    return d >= avoid ? d + 1 : d;
  };
  musan::Corpus corpus;
  for (int s = 0; s < plant.songs; ++s) {
    musan::Song song;
    song.id = "planted-" + std::to_string(s);
    song.key = {0, musan::Mode::Major};
    song.time = {4, 4};
    int chord = uniform(rng, 0, 6);
    for (std::size_t m = 0; m < kinds.size(); ++m) {
      musan::Measure measure;
      measure.index = static_cast<int>(m);
      measure.chords = {degreeChord(chord)};
      song.measures.push_back(measure);
      if (chord == 4) {
        double p = kinds[m] == SectionEnd ? plant.section_end
                   : kinds[m] == MidEnd   ? plant.mid_section
                   : kinds[m] == Elsewhere ? plant.elsewhere
                                           : 0.5;
        chord = unit(rng) < p ? 0 : otherThan(0);
      } else {
        chord = unit(rng) < 0.5 ? 4 : otherThan(4);
      }
    }
    musan::deriveMeasureFeatures(song);
    corpus.push_back(musan::makeAnalyzedSong(std::move(song), musan::parseStructure(structure)));
  }
  return corpus;
}

namespace {

void putVarLen(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void chunk(std::vector<std::uint8_t>& file, const char* tag, const std::vector<std::uint8_t>& body) {
  file.insert(file.end(), tag, tag + 4);
  put32(file, static_cast<std::uint32_t>(body.size()));
  file.insert(file.end(), body.begin(), body.end());
}

}  // namespace

std::vector<std::uint8_t> writeMidi(const std::vector<MidiTrackSpec>& tracks, int division, int numerator,
                                    int denominator, int tempo_us, bool running_status) {
  std::vector<std::uint8_t> file;
  std::vector<std::uint8_t> header;
  header.push_back(0);
  header.push_back(1);
  header.push_back(static_cast<std::uint8_t>((tracks.size() + 1) >> 8));
  header.push_back(static_cast<std::uint8_t>(tracks.size() + 1));
  header.push_back(static_cast<std::uint8_t>(division >> 8));
  header.push_back(static_cast<std::uint8_t>(division));
  chunk(file, "MThd", header);

  std::vector<std::uint8_t> conductor;
  int dd = 0;
  while ((1 << dd) < denominator) ++dd;
  putVarLen(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x51, 0x03, static_cast<std::uint8_t>(tempo_us >> 16),
                                     static_cast<std::uint8_t>(tempo_us >> 8), static_cast<std::uint8_t>(tempo_us)});
  putVarLen(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x58, 0x04, static_cast<std::uint8_t>(numerator),
                                     static_cast<std::uint8_t>(dd), 24, 8});
  putVarLen(conductor, 0);
  conductor.insert(conductor.end(), {0xFF, 0x2F, 0x00});
  chunk(file, "MTrk", conductor);

  for (const MidiTrackSpec& track : tracks) {
    struct Ev {
      std::int64_t tick;
      int order;
      std::uint8_t status, d1, d2;
    };
    std::vector<Ev> evs;
    for (const MidiNote& n : track.notes) {
      evs.push_back({n.on, 1, static_cast<std::uint8_t>(0x90 | n.channel), static_cast<std::uint8_t>(n.pitch),
                     static_cast<std::uint8_t>(n.velocity)});
      // Note-off as note-on with velocity 0 when running status is on.
      if (running_status)
        evs.push_back({n.off, 0, static_cast<std::uint8_t>(0x90 | n.channel), static_cast<std::uint8_t>(n.pitch), 0});
      else
        evs.push_back({n.off, 0, static_cast<std::uint8_t>(0x80 | n.channel), static_cast<std::uint8_t>(n.pitch), 64});
    }
    std::stable_sort(evs.begin(), evs.end(),
                     [](const Ev& a, const Ev& b) { return std::tie(a.tick, a.order) < std::tie(b.tick, b.order); });
    std::vector<std::uint8_t> body;
    putVarLen(body, 0);
    body.insert(body.end(), {0xFF, 0x03, static_cast<std::uint8_t>(track.name.size())});
    body.insert(body.end(), track.name.begin(), track.name.end());
    std::int64_t last = 0;
    int last_status = -1;
    for (const Ev& e : evs) {
      putVarLen(body, static_cast<std::uint32_t>(e.tick - last));
      last = e.tick;
      if (!running_status || e.status != last_status) body.push_back(e.status);
      last_status = e.status;
      body.push_back(e.d1);
      body.push_back(e.d2);
    }
    putVarLen(body, 0);
    body.insert(body.end(), {0xFF, 0x2F, 0x00});
    chunk(file, "MTrk", body);
  }
  return file;
}

}  // namespace oracle
