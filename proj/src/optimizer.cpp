#include "musan/optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <unordered_map>

#include "musan/error.h"

namespace musan {

namespace {

constexpr double kCostEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

int kindRank(const TileToken& t) {
  if (t.isFiller()) return 2;
  return t.melodic ? 0 : 1;
}

// Token-by-token order; only called on sequences covering the same span.
bool lexLess(const Tiling& a, const Tiling& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& x = a[k];
    const auto& y = b[k];
    if (x == y) continue;
    if (kindRank(x) != kindRank(y)) return kindRank(x) < kindRank(y);
    if (x.length != y.length) return x.length > y.length;
    if (x.set != y.set) return x.set < y.set;
    return x.melodic && !y.melodic;
  }
  return a.size() < b.size();
}

struct Problem {
  int n = 0;
  std::vector<bool> melodic;
  std::vector<int> run_end;
  std::vector<std::vector<std::pair<int, int>>> starts;  // per position: (set, length)
  std::vector<std::vector<int>> filler_ends;            // per position: candidate filler ends
  std::vector<int> set_length;
  std::vector<bool> set_melodic;
  std::vector<std::vector<int>> set_starts;  // ascending
  int words = 0;
  std::vector<std::vector<std::uint64_t>> live;  // per position 0..n
  int max_token = 1;

  int remainingInstances(int set, int pos) const {
    const auto& s = set_starts[set];
    return static_cast<int>(s.end() - std::lower_bound(s.begin(), s.end(), pos));
  }
};

Problem makeProblem(const std::vector<bool>& mask, const std::vector<PhraseSet>& sets) {
  Problem p;
  p.n = static_cast<int>(mask.size());
  p.melodic = mask;
  p.run_end.assign(p.n, p.n);
  for (int i = p.n - 1; i >= 0; --i) {
    p.run_end[i] = (i + 1 < p.n && mask[i + 1] == mask[i]) ? p.run_end[i + 1] : i + 1;
  }
  p.starts.resize(p.n);
  p.set_length.resize(sets.size());
  p.set_melodic.resize(sets.size());
  p.set_starts.resize(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto& set = sets[s];
    if (set.instances.empty()) throw ContractError("phrase set without instances");
    p.set_length[s] = set.length();
    p.set_melodic[s] = set.melodic;
    for (const auto& inst : set.instances) {
      if (inst.length != set.length()) throw ContractError("phrase set instances differ in length");
      if (inst.start < 0 || inst.end() > p.n || inst.length < 1) throw ContractError("phrase instance outside song");
      p.set_starts[s].push_back(inst.start);
    }
    std::sort(p.set_starts[s].begin(), p.set_starts[s].end());
    p.set_starts[s].erase(std::unique(p.set_starts[s].begin(), p.set_starts[s].end()), p.set_starts[s].end());
    for (int st : p.set_starts[s]) p.starts[st].push_back({static_cast<int>(s), set.length()});
    p.max_token = std::max(p.max_token, set.length());
  }
  p.filler_ends.resize(p.n);
  for (int i = 0; i < p.n; ++i) {
    for (int q = i + 1; q < p.run_end[i]; ++q) {
      if (!p.starts[q].empty()) p.filler_ends[i].push_back(q);
    }
    p.filler_ends[i].push_back(p.run_end[i]);
    p.max_token = std::max(p.max_token, p.run_end[i] - i);
  }
  p.words = static_cast<int>((sets.size() + 63) / 64);
  p.live.assign(p.n + 1, std::vector<std::uint64_t>(p.words, 0));
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const int last = p.set_starts[s].back();
    for (int pos = 0; pos <= last; ++pos) p.live[pos][s / 64] |= std::uint64_t{1} << (s % 64);
  }
  return p;
}

TileToken fillerToken(const Problem& p, int start, int end) { return {start, end - start, -1, p.melodic[start]}; }

// Gap [from, to) split at melody-status changes.
void appendFillers(const Problem& p, int from, int to, Tiling& out) {
  while (from < to) {
    const int end = std::min(p.run_end[from], to);
    out.push_back(fillerToken(p, from, end));
    from = end;
  }
}

// Forward DP with each set's g-term spread evenly over its instances.
Tiling greedyIncumbent(const Problem& p, const SdlParams& params) {
  std::vector<double> best(p.n + 1, kInf);
  std::vector<TileToken> choice(p.n);
  best[p.n] = 0.0;
  for (int q = p.n - 1; q >= 0; --q) {
    for (int e : p.filler_ends[q]) {
      const double c = params.h + params.g * (e - q) + best[e];
      if (c < best[q] - kCostEps) {
        best[q] = c;
        choice[q] = fillerToken(p, q, e);
      }
    }
    for (auto [s, len] : p.starts[q]) {
      const double c = params.h + params.g * len / static_cast<double>(p.set_starts[s].size()) + best[q + len];
      if (c < best[q] - kCostEps) {
        best[q] = c;
        choice[q] = {q, len, s, p.set_melodic[s]};
      }
    }
  }
  Tiling t;
  for (int q = 0; q < p.n; q = choice[q].end()) t.push_back(choice[q]);
  return t;
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto w : k) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

class AStar {
 public:
  AStar(const Problem& p, const SdlParams& params, const SearchOptions& options)
      : p_(p), params_(params), options_(options) {}

  OptimizeResult run() {
    OptimizeResult result;
    const Tiling incumbent = greedyIncumbent(p_, params_);
    const double incumbent_cost = tilingCost(incumbent, params_);

    nodes_.push_back({0, 0, 0, -1, {}, 0});
    bits_.assign(p_.words, 0);
    const int root_key = keyId(0, bits_.data());
    nodes_[0].key = root_key;
    best_for_key_[root_key] = 0;
    push(0);

    bool exhausted = false;
    while (!heap_.empty()) {
      const auto [f, seq, id] = heap_.top();
      heap_.pop();
      const Node node = nodes_[id];
      if (best_for_key_[node.key] != id) continue;
      if (best_goal_ >= 0 && f > cost(nodes_[best_goal_]) + kCostEps) break;
      if (f > incumbent_cost + kCostEps) break;
      if (result.expansions >= options_.budget) {
        exhausted = true;
        break;
      }
      ++result.expansions;
      if (options_.trace) result.trace.push_back({node.pos, cost(node), f, reconstruct(id)});
      expand(id);
    }

    Tiling best = best_goal_ >= 0 ? reconstruct(best_goal_) : incumbent;
    if (tilingLess(incumbent, best, params_)) best = incumbent;
    result.suboptimal = exhausted;
    result.tiling = std::move(best);
    return result;
  }

 private:
  struct Node {
    int pos;
    int tokens;
    int charged;  // measures charged with g
    int parent;
    TileToken token;
    int key;
  };
  using Entry = std::tuple<double, std::uint64_t, int>;

  double cost(const Node& n) const { return params_.h * n.tokens + params_.g * n.charged; }
  const std::uint64_t* usedBits(int id) const { return bits_.data() + static_cast<std::size_t>(id) * p_.words; }

  int keyId(int pos, const std::uint64_t* used) {
    std::vector<std::uint64_t> key(p_.words + 1);
    key[0] = static_cast<std::uint64_t>(pos);
    for (int w = 0; w < p_.words; ++w) key[w + 1] = used[w] & p_.live[pos][w];
    const auto [it, inserted] = key_index_.try_emplace(std::move(key), static_cast<int>(key_index_.size()));
    if (inserted) {
      best_for_key_.push_back(-1);
      heuristic_.push_back(-1.0);
    }
    return it->second;
  }

  Tiling reconstruct(int id) const {
    Tiling t;
    for (; id > 0; id = nodes_[id].parent) t.push_back(nodes_[id].token);
    std::reverse(t.begin(), t.end());
    return t;
  }

  bool prefixLess(int a, int b) const {
    const double ca = cost(nodes_[a]), cb = cost(nodes_[b]);
    if (std::abs(ca - cb) > kCostEps) return ca < cb;
    if (nodes_[a].tokens != nodes_[b].tokens) return nodes_[a].tokens < nodes_[b].tokens;
    return lexLess(reconstruct(a), reconstruct(b));
  }

  // Lower bound on the cost of completing from `pos` with the key's paid sets:
  // unpaid sets spread their g-term over the instances still ahead.
  double heuristic(int key, int pos, const std::uint64_t* used) {
    if (heuristic_[key] >= 0.0) return heuristic_[key];
    if (pos == p_.n) return heuristic_[key] = 0.0;
    std::vector<double> best(p_.n + 1, kInf);
    best[p_.n] = 0.0;
    for (int q = p_.n - 1; q >= pos; --q) {
      double v = kInf;
      for (int e : p_.filler_ends[q]) v = std::min(v, params_.h + params_.g * (e - q) + best[e]);
      for (auto [s, len] : p_.starts[q]) {
        const bool paid = (used[s / 64] >> (s % 64)) & 1u;
        const double charge = paid ? 0.0 : params_.g * len / p_.remainingInstances(s, pos);
        v = std::min(v, params_.h + charge + best[q + len]);
      }
      best[q] = v;
    }
    const int remaining = p_.n - pos;
    const double tokens_bound = params_.h * ((remaining + p_.max_token - 1) / p_.max_token);
    return heuristic_[key] = std::max(0.0, std::max(best[pos], tokens_bound) - kCostEps);
  }

  void push(int id) {
    const Node& n = nodes_[id];
    const double f = cost(n) + heuristic(n.key, n.pos, usedBits(id));
    heap_.emplace(f, seq_++, id);
  }

  void addChild(int parent, const TileToken& token) {
    const Node& from = nodes_[parent];
    Node child{token.end(), from.tokens + 1, from.charged, parent, token, -1};
    std::vector<std::uint64_t> used(usedBits(parent), usedBits(parent) + p_.words);
    if (token.isFiller()) {
      child.charged += token.length;
    } else {
      auto& word = used[token.set / 64];
      const std::uint64_t bit = std::uint64_t{1} << (token.set % 64);
      if (!(word & bit)) child.charged += token.length;
      word |= bit;
    }
    child.key = keyId(child.pos, used.data());
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(child);
    bits_.insert(bits_.end(), used.begin(), used.end());
    const int incumbent = best_for_key_[child.key];
    if (incumbent >= 0 && !prefixLess(id, incumbent)) {
      nodes_.pop_back();
      bits_.resize(bits_.size() - p_.words);
      return;
    }
    best_for_key_[child.key] = id;
    if (child.pos == p_.n) {
      best_goal_ = id;
      return;
    }
    push(id);
  }

  void expand(int id) {
    const int pos = nodes_[id].pos;
    for (auto [s, len] : p_.starts[pos]) addChild(id, {pos, len, s, p_.set_melodic[s]});
    for (int e : p_.filler_ends[pos]) addChild(id, fillerToken(p_, pos, e));
  }

  const Problem& p_;
  SdlParams params_;
  SearchOptions options_;
  std::vector<Node> nodes_;
  std::vector<std::uint64_t> bits_;
  std::unordered_map<std::vector<std::uint64_t>, int, KeyHash> key_index_;
  std::vector<int> best_for_key_;
  std::vector<double> heuristic_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  std::uint64_t seq_ = 0;
  int best_goal_ = -1;
};

void finish(OptimizeResult& r, const SdlParams& params) {
  r.structure = assignLabels(r.tiling);
  r.sdl = tilingCost(r.tiling, params);
}

}  // namespace

void SdlParams::validate() const {
  if (!(h > 0) || !(g > 0)) throw ContractError("SDL constants h and g must be positive");
}

double sdl(const StructureAnalysis& structure, const SdlParams& params) {
  std::map<char, std::pair<long, int>> by_label;  // label -> (total length, count)
  double filler_lengths = 0.0;
  for (const auto& t : structure.tokens) {
    if (t.isFiller()) {
      filler_lengths += t.length;
    } else {
      auto& [total, count] = by_label[t.label];
      total += t.length;
      ++count;
    }
  }
  double avg = filler_lengths;
  for (const auto& [label, tc] : by_label) avg += static_cast<double>(tc.first) / tc.second;
  return params.h * static_cast<double>(structure.tokens.size()) + params.g * avg;
}

double tilingCost(const Tiling& tiling, const SdlParams& params) {
  std::map<int, std::pair<long, int>> by_set;
  double described = 0.0;
  for (const auto& t : tiling) {
    if (t.isFiller()) {
      described += t.length;
    } else {
      auto& [total, count] = by_set[t.set];
      total += t.length;
      ++count;
    }
  }
  for (const auto& [set, tc] : by_set) {
    described += tc.first % tc.second == 0 ? static_cast<double>(tc.first / tc.second)
                                           : static_cast<double>(tc.first) / tc.second;
  }
  return params.h * static_cast<double>(tiling.size()) + params.g * described;
}

bool tilingLess(const Tiling& a, const Tiling& b, const SdlParams& params) {
  const double ca = tilingCost(a, params), cb = tilingCost(b, params);
  if (std::abs(ca - cb) > kCostEps) return ca < cb;
  if (a.size() != b.size()) return a.size() < b.size();
  return lexLess(a, b);
}

std::vector<std::pair<int, int>> melodyRuns(const std::vector<bool>& mask) {
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(mask.size());
  for (int i = 0; i < n;) {
    int j = i + 1;
    while (j < n && mask[j] == mask[i]) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  return runs;
}

OptimizeResult optimizeStructure(const std::vector<bool>& mask, const std::vector<PhraseSet>& sets,
                                 const SdlParams& params, const SearchOptions& options) {
  params.validate();
  const Problem p = makeProblem(mask, sets);
  OptimizeResult r;
  if (p.n > 0) r = AStar(p, params, options).run();
  finish(r, params);
  return r;
}

OptimizeResult optimizeStructure(const Song& song, const std::vector<PhraseSet>& sets, const SdlParams& params,
                                 const SearchOptions& options) {
  return optimizeStructure(melodyMask(song), sets, params, options);
}

OptimizeResult bruteForceOptimize(const std::vector<bool>& mask, const std::vector<PhraseSet>& sets,
                                  const SdlParams& params, int guard) {
  params.validate();
  if (static_cast<int>(mask.size()) > guard) {
    throw ContractError("exhaustive search refused: song has " + std::to_string(mask.size()) +
                        " measures, guard is " + std::to_string(guard));
  }
  const Problem p = makeProblem(mask, sets);
  std::optional<Tiling> best;
  Tiling current;

  // Each measure either extends the open gap or starts a set instance.
  auto recurse = [&](auto&& self, int pos, int gap_start) -> void {
    if (pos == p.n) {
      const auto mark = current.size();
      appendFillers(p, gap_start, pos, current);
      if (!best || tilingLess(current, *best, params)) best = current;
      current.resize(mark);
      return;
    }
    self(self, pos + 1, gap_start);
    for (auto [s, len] : p.starts[pos]) {
      const auto mark = current.size();
      appendFillers(p, gap_start, pos, current);
      current.push_back({pos, len, s, p.set_melodic[s]});
      self(self, pos + len, pos + len);
      current.resize(mark);
    }
  };
  OptimizeResult r;
  if (p.n > 0) {
    recurse(recurse, 0, 0);
    r.tiling = *best;
  }
  finish(r, params);
  return r;
}

OptimizeResult bruteForceOptimize(const Song& song, const std::vector<PhraseSet>& sets, const SdlParams& params,
                                  int guard) {
  return bruteForceOptimize(melodyMask(song), sets, params, guard);
}

Tiling absorbNearRepeats(Tiling tiling, const SdlParams& params, int max_filler) {
  std::map<int, int> uses;
  for (const auto& t : tiling) {
    if (!t.isFiller()) ++uses[t.set];
  }
  auto absorbable = [&](const TileToken& inst, const TileToken& filler) {
    return !inst.isFiller() && uses[inst.set] >= 2 && inst.melodic == filler.melodic;
  };
  for (std::size_t k = 1; k + 1 < tiling.size();) {
    const TileToken f = tiling[k];
    if (!f.isFiller() || f.length > max_filler) {
      ++k;
      continue;
    }
    const bool left = absorbable(tiling[k - 1], f);
    const bool right = absorbable(tiling[k + 1], f);
    if (!left && !right) {
      ++k;
      continue;
    }
    const bool use_left = left && (!right || uses[tiling[k - 1].set] >= uses[tiling[k + 1].set]);
    Tiling candidate = tiling;
    if (use_left) {
      candidate[k - 1].length += f.length;
    } else {
      candidate[k + 1].start = f.start;
      candidate[k + 1].length += f.length;
    }
    candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(k));
    if (tilingCost(candidate, params) < tilingCost(tiling, params) - kCostEps) {
      tiling = std::move(candidate);
    } else {
      ++k;
    }
  }
  return tiling;
}

StructureAnalysis assignLabels(const Tiling& tiling) {
  static const std::string kUpper = "ABCDEFGHIJKLMNOPQRSTUVWYZ";
  static const std::string kLower = "abcdefghjklmnpqrstuvwyz";
  std::map<int, int> uses;
  for (const auto& t : tiling) {
    if (!t.isFiller()) ++uses[t.set];
  }
  auto repeated = [&](const TileToken& t) { return !t.isFiller() && uses[t.set] >= 2; };

  const std::size_t n = tiling.size();
  std::size_t lead = 0;
  while (lead < n && !repeated(tiling[lead]) && !tiling[lead].melodic) ++lead;
  std::size_t trail = n;
  while (trail > lead && !repeated(tiling[trail - 1]) && !tiling[trail - 1].melodic) --trail;

  StructureAnalysis out;
  std::map<int, char> letters;
  std::size_t next_upper = 0, next_lower = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& t = tiling[k];
    char label;
    if (repeated(t)) {
      auto it = letters.find(t.set);
      if (it == letters.end()) {
        const std::string& alphabet = t.melodic ? kUpper : kLower;
        std::size_t& next = t.melodic ? next_upper : next_lower;
        if (next >= alphabet.size()) {
          throw LabelSpaceError(std::string("more than ") + std::to_string(alphabet.size()) + " " +
                                (t.melodic ? "melodic" : "non-melodic") + " phrase sets");
        }
        it = letters.emplace(t.set, alphabet[next++]).first;
      }
      label = it->second;
    } else if (t.melodic) {
      label = 'X';
    } else if (k < lead) {
      label = 'i';
    } else if (k >= trail) {
      label = 'o';
    } else {
      label = 'x';
    }
    out.tokens.push_back({label, t.length});
  }
  return out;
}

}  // namespace musan
