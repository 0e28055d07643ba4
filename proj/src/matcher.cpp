#include "musan/matcher.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include "musan/error.h"

namespace musan {

std::vector<MatchPair> findMatchedPairs(const Song& song, const SimWeights& w, const PhraseLengthLimits& limits,
                                        int jobs) {
  w.validate();
  const int n = song.measureCount();
  if (limits.min_length < 1 || limits.max_length < limits.min_length) throw ContractError("bad phrase length limits");
  if (n < 2 * limits.min_length) return {};
  const MeasureSimilarity sim = computeMeasureSimilarity(song, w);

  const int max_len = std::min(limits.max_length, n / 2);
  const int lengths = max_len - limits.min_length + 1;
  std::vector<std::vector<MatchPair>> by_length(static_cast<std::size_t>(std::max(0, lengths)));
  auto scan = [&](int slot) {
    const int len = max_len - slot;
    auto& out = by_length[slot];
    for (int i = 0; i + 2 * len <= n; ++i) {
      for (int j = i + len; j + len <= n; ++j) {
        if (auto p = segmentMatch(sim, i, j, len, w, limits)) out.push_back(*p);
      }
    }
  };
  const int workers = std::clamp(jobs, 1, std::max(1, lengths));
  if (workers == 1) {
    for (int s = 0; s < lengths; ++s) scan(s);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (int s = t; s < lengths; s += workers) scan(s);
      });
    }
  }
  std::vector<MatchPair> pairs;
  for (auto& v : by_length) pairs.insert(pairs.end(), v.begin(), v.end());
  return pairs;
}

std::vector<MatchPair> collapseNearDuplicates(const std::vector<MatchPair>& pairs) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].score > pairs[b].score; });
  std::set<std::tuple<int, int, int>> kept;
  std::vector<bool> keep(pairs.size(), false);
  for (std::size_t idx : order) {
    const auto& p = pairs[idx];
    bool duplicate = false;
    for (int di = -1; di <= 1 && !duplicate; ++di) {
      for (int dj = -1; dj <= 1 && !duplicate; ++dj) {
        if ((di != 0 || dj != 0) && kept.count({p.length, p.start1 + di, p.start2 + dj})) duplicate = true;
      }
    }
    if (!duplicate) {
      kept.insert({p.length, p.start1, p.start2});
      keep[idx] = true;
    }
  }
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (keep[i]) out.push_back(pairs[i]);
  }
  return out;
}

std::vector<std::vector<int>> MatchGraph::adjacency() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return adj;
}

double MatchGraph::edgeScore(int a, int b) const {
  for (const auto& e : edges) {
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return e.score;
  }
  return -1.0;
}

MatchGraph buildMatchGraph(const std::vector<MatchPair>& pairs, std::size_t node_cap) {
  const auto collapsed = collapseNearDuplicates(pairs);
  std::set<Instance> distinct;
  for (const auto& p : collapsed) {
    distinct.insert({p.start1, p.length});
    distinct.insert({p.start2, p.length});
  }
  if (distinct.size() > node_cap) {
    throw CapacityError("match graph has " + std::to_string(distinct.size()) + " nodes, cap is " +
                        std::to_string(node_cap));
  }
  MatchGraph g;
  g.nodes.assign(distinct.begin(), distinct.end());
  std::map<Instance, int> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i]] = static_cast<int>(i);
  for (const auto& p : collapsed) {
    g.edges.push_back({index.at({p.start1, p.length}), index.at({p.start2, p.length}), p.score});
  }
  return g;
}

namespace {

using VertexSet = std::vector<int>;  // sorted

VertexSet intersect(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

class BronKerbosch {
 public:
  explicit BronKerbosch(const std::vector<std::vector<int>>& adj) : adj_(adj) {}

  std::vector<VertexSet> run() {
    const int n = static_cast<int>(adj_.size());
    const auto order = degeneracyOrder();
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i) rank[order[i]] = i;
    for (int v : order) {
      VertexSet p, x;
      for (int u : adj_[v]) (rank[u] > rank[v] ? p : x).push_back(u);
      std::sort(p.begin(), p.end());
      std::sort(x.begin(), x.end());
      VertexSet r{v};
      expand(r, std::move(p), std::move(x));
    }
    for (auto& c : cliques_) std::sort(c.begin(), c.end());
    std::sort(cliques_.begin(), cliques_.end());
    return std::move(cliques_);
  }

 private:
  std::vector<int> degeneracyOrder() const {
    const int n = static_cast<int>(adj_.size());
    std::vector<int> degree(n);
    int max_deg = 0;
    for (int v = 0; v < n; ++v) {
      degree[v] = static_cast<int>(adj_[v].size());
      max_deg = std::max(max_deg, degree[v]);
    }
    std::vector<std::set<int>> buckets(max_deg + 1);
    for (int v = 0; v < n; ++v) buckets[degree[v]].insert(v);
    std::vector<bool> removed(n, false);
    std::vector<int> order;
    order.reserve(n);
    for (int k = 0; k < n; ++k) {
      int d = 0;
      while (buckets[d].empty()) ++d;
      const int v = *buckets[d].begin();
      buckets[d].erase(buckets[d].begin());
      removed[v] = true;
      order.push_back(v);
      for (int u : adj_[v]) {
        if (removed[u]) continue;
        buckets[degree[u]].erase(u);
        buckets[--degree[u]].insert(u);
      }
    }
    return order;
  }

  void expand(VertexSet& r, VertexSet p, VertexSet x) {
    if (p.empty()) {
      if (x.empty()) cliques_.push_back(r);
      return;
    }
    // pivot maximizing |P ∩ N(u)|
    int pivot = -1;
    std::size_t best = 0;
    for (const VertexSet* s : {&p, &x}) {
      for (int u : *s) {
        const std::size_t c = intersect(p, adj_[u]).size();
        if (pivot < 0 || c > best) {
          pivot = u;
          best = c;
        }
      }
    }
    VertexSet candidates;
    std::set_difference(p.begin(), p.end(), adj_[pivot].begin(), adj_[pivot].end(), std::back_inserter(candidates));
    for (int v : candidates) {
      r.push_back(v);
      expand(r, intersect(p, adj_[v]), intersect(x, adj_[v]));
      r.pop_back();
      p.erase(std::lower_bound(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  }

  const std::vector<std::vector<int>>& adj_;
  std::vector<VertexSet> cliques_;
};

}  // namespace

std::vector<std::vector<int>> enumerateMaximalCliques(const std::vector<std::vector<int>>& adjacency) {
  return BronKerbosch(adjacency).run();
}

std::vector<PhraseSet> maximalCliques(const MatchGraph& graph, const std::vector<bool>& measure_has_melody) {
  const auto adj = graph.adjacency();
  std::map<std::pair<int, int>, double> edge_score;
  for (const auto& e : graph.edges) {
    edge_score[{std::min(e.a, e.b), std::max(e.a, e.b)}] = e.score;
  }
  auto score = [&](int a, int b) { return edge_score.at({std::min(a, b), std::max(a, b)}); };

  std::vector<PhraseSet> out;
  for (auto clique : enumerateMaximalCliques(adj)) {
    if (clique.size() < 2) continue;
    // drop the weaker member of any overlapping pair until none remain
    for (;;) {
      auto meanTo = [&](int v) {
        double s = 0.0;
        for (int u : clique) {
          if (u != v) s += score(u, v);
        }
        return s / static_cast<double>(clique.size() - 1);
      };
      int drop = -1;
      for (std::size_t a = 0; a < clique.size() && drop < 0; ++a) {
        for (std::size_t b = a + 1; b < clique.size() && drop < 0; ++b) {
          const int u = clique[a], v = clique[b];
          if (!graph.nodes[u].overlaps(graph.nodes[v])) continue;
          const double su = meanTo(u), sv = meanTo(v);
          drop = su < sv ? u : (sv < su ? v : std::max(u, v));
        }
      }
      if (drop < 0) break;
      clique.erase(std::find(clique.begin(), clique.end(), drop));
      if (clique.size() < 2) break;
    }
    if (clique.size() < 2) continue;

    PhraseSet set;
    double total = 0.0;
    int edges = 0;
    int melodic_measures = 0;
    int measures = 0;
    for (std::size_t a = 0; a < clique.size(); ++a) {
      const auto& inst = graph.nodes[clique[a]];
      set.instances.push_back(inst);
      for (int m = inst.start; m < inst.end(); ++m) {
        ++measures;
        if (m < static_cast<int>(measure_has_melody.size()) && measure_has_melody[m]) ++melodic_measures;
      }
      for (std::size_t b = a + 1; b < clique.size(); ++b) {
        total += score(clique[a], clique[b]);
        ++edges;
      }
    }
    std::sort(set.instances.begin(), set.instances.end());
    set.mean_score = total / edges;
    set.melodic = 2 * melodic_measures > measures;
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<PhraseSet> pruneDominatedSets(std::vector<PhraseSet> sets) {
  auto covered = [](const PhraseSet& small, const PhraseSet& big) {
    return std::includes(big.instances.begin(), big.instances.end(), small.instances.begin(), small.instances.end());
  };
  std::vector<bool> dominated(sets.size(), false);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t t = 0; t < sets.size() && !dominated[s]; ++t) {
      if (t == s || sets[t].mean_score < sets[s].mean_score || !covered(sets[s], sets[t])) continue;
      const bool identical = sets[t].instances == sets[s].instances && sets[t].mean_score == sets[s].mean_score;
      dominated[s] = !identical || t < s;
    }
  }
  std::vector<PhraseSet> out;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (!dominated[s]) out.push_back(std::move(sets[s]));
  }
  return out;
}

void sortPhraseSets(std::vector<PhraseSet>& sets) {
  std::stable_sort(sets.begin(), sets.end(), [](const PhraseSet& a, const PhraseSet& b) {
    if (a.mean_score != b.mean_score) return a.mean_score > b.mean_score;
    if (a.length() != b.length()) return a.length() > b.length();
    return a.instances < b.instances;
  });
}

std::vector<bool> melodyMask(const Song& song) {
  std::vector<bool> mask;
  mask.reserve(song.measures.size());
  for (const auto& m : song.measures) mask.push_back(m.has_melody);
  return mask;
}

std::string dumpEdgeList(const MatchGraph& graph) {
  std::string out;
  char line[128];
  for (const auto& e : graph.edges) {
    const auto& a = graph.nodes[e.a];
    const auto& b = graph.nodes[e.b];
    std::snprintf(line, sizeof line, "%d %d %d %d %.6f\n", a.start, a.length, b.start, b.length, e.score);
    out += line;
  }
  return out;
}

}  // namespace musan
