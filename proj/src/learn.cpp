#include "bnci/learn.hpp"

#include <algorithm>
#include <limits>

#include "bnci/error.hpp"
#include "bnci/random.hpp"

namespace bnci {

DataCiTester::DataCiTester(const DiscreteDataset& data, TestConfig config, std::uint64_t seed)
    : data_(data), config_(std::move(config)), seed_(seed) {}

TestOutcome DataCiTester::test(std::size_t x, std::size_t y, std::span<const std::size_t> z) {
  std::vector<std::size_t> key{std::min(x, y), std::max(x, y)};
  key.insert(key.end(), z.begin(), z.end());
  std::sort(key.begin() + 2, key.end());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  TestConfig cfg = config_;
  std::uint64_t s = derive_seed({seed_, config_.permutation.seed});
  for (std::size_t v : key) s = derive_seed({s, v});
  cfg.permutation.seed = s;
  auto zs = std::span<const std::size_t>(key).subspan(2);
  TestOutcome out = ci_test(data_, key[0], key[1], zs, cfg);
  cache_.emplace(std::move(key), out);
  return out;
}

bool d_separated(const Dag& g, std::size_t x, std::size_t y, std::span<const std::size_t> z) {
  const std::size_t n = g.size();
  // Ancestral set of {x, y} and z.
  std::vector<char> keep(n, 0), in_z(n, 0);
  std::vector<std::size_t> stack{x, y};
  for (std::size_t v : z) {
    in_z[v] = 1;
    stack.push_back(v);
  }
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    if (keep[v]) continue;
    keep[v] = 1;
    for (std::size_t p : g.parents(v)) stack.push_back(p);
  }
  // Moral graph of the ancestral set.
  std::vector<std::vector<char>> und(n, std::vector<char>(n, 0));
  for (std::size_t v = 0; v < n; ++v) {
    if (!keep[v]) continue;
    const auto& ps = g.parents(v);
    for (std::size_t a = 0; a < ps.size(); ++a) {
      und[ps[a]][v] = und[v][ps[a]] = 1;
      for (std::size_t b = a + 1; b < ps.size(); ++b) und[ps[a]][ps[b]] = und[ps[b]][ps[a]] = 1;
    }
  }
  // Connectivity avoiding z.
  std::vector<char> seen(n, 0);
  stack = {x};
  seen[x] = 1;
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    if (v == y) return false;
    for (std::size_t w = 0; w < n; ++w)
      if (und[v][w] && keep[w] && !in_z[w] && !seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return true;
}

TestOutcome DSeparationOracle::test(std::size_t x, std::size_t y, std::span<const std::size_t> z) {
  TestOutcome out;
  out.df = 1;
  const bool sep = d_separated(dag_, x, y, z);
  out.p_value = sep ? 1.0 : 0.0;
  out.statistic = sep ? 0.0 : 1.0;
  return out;
}

namespace {

// Calls fn(subset) for every subset of `pool` of size <= max_size, smaller
// sizes first, lexicographic within a size. Stops early when fn returns true.
template <class Fn>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t max_size, Fn&& fn) {
  std::vector<std::size_t> subset;
  const std::size_t limit = std::min(max_size, pool.size());
  for (std::size_t size = 0; size <= limit; ++size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      subset.clear();
      for (std::size_t i : idx) subset.push_back(pool[i]);
      if (fn(subset)) return true;
      // next combination
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == pool.size() - size + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return false;
}

// Weakest association seen so far between the target and a candidate:
// the largest p-value over conditioning subsets, ties to the smaller statistic.
struct MinAssociation {
  double p = -1.0;
  double statistic = std::numeric_limits<double>::infinity();

  void update(const TestOutcome& t) {
    if (t.p_value > p || (t.p_value == p && t.statistic < statistic)) {
      p = t.p_value;
      statistic = t.statistic;
    }
  }
};

}  // namespace

std::vector<std::size_t> mmpc_node(CiTester& tester, std::size_t x, const MmpcOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) fail(ErrorKind::config, "alpha must lie in (0, 1)");
  const std::size_t nv = tester.num_vars();
  if (x >= nv) fail(ErrorKind::argument, "mmpc_node: target out of range");

  std::vector<std::size_t> cpc;
  std::vector<std::size_t> open;
  std::vector<MinAssociation> assoc(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    if (v == x) continue;
    assoc[v].update(tester.test(x, v, {}));
    if (assoc[v].p < options.alpha) open.push_back(v);
  }

  // Forward phase.
  while (!open.empty()) {
    auto best = open.begin();
    for (auto it = open.begin() + 1; it != open.end(); ++it) {
      const auto &a = assoc[*it], &b = assoc[*best];
      if (a.p < b.p || (a.p == b.p && a.statistic > b.statistic)) best = it;
    }
    if (assoc[*best].p >= options.alpha) break;
    const std::size_t added = *best;
    open.erase(best);
    if (options.max_conditioning > 0) {
      std::vector<std::size_t> others = cpc;
      std::vector<std::size_t> kept;
      for (std::size_t v : open) {
        // Only subsets that contain the new member are new.
        for_each_subset(others, options.max_conditioning - 1, [&](const std::vector<std::size_t>& s) {
          std::vector<std::size_t> z = s;
          z.push_back(added);
          assoc[v].update(tester.test(x, v, z));
          return assoc[v].p >= options.alpha;
        });
        if (assoc[v].p < options.alpha) kept.push_back(v);
      }
      open = std::move(kept);
    }
    cpc.push_back(added);
  }

  // Backward phase.
  for (std::size_t idx = 0; idx < cpc.size();) {
    const std::size_t v = cpc[idx];
    std::vector<std::size_t> others;
    for (std::size_t w : cpc)
      if (w != v) others.push_back(w);
    bool independent = for_each_subset(others, options.max_conditioning, [&](const std::vector<std::size_t>& s) {
      return tester.test(x, v, s).p_value >= options.alpha;
    });
    if (independent)
      cpc.erase(cpc.begin() + static_cast<std::ptrdiff_t>(idx));
    else
      ++idx;
  }
  std::sort(cpc.begin(), cpc.end());
  return cpc;
}

SkeletonCandidates mmpc(CiTester& tester, const MmpcOptions& options) {
  const std::size_t nv = tester.num_vars();
  SkeletonCandidates raw(nv);
  for (std::size_t v = 0; v < nv; ++v) raw[v] = mmpc_node(tester, v, options);
  SkeletonCandidates out(nv);
  for (std::size_t v = 0; v < nv; ++v)
    for (std::size_t w : raw[v])
      if (std::binary_search(raw[w].begin(), raw[w].end(), v)) out[v].push_back(w);
  return out;
}

namespace {

enum class MoveKind { add = 0, remove = 1, reverse = 2 };

struct Move {
  MoveKind kind;
  std::size_t parent;
  std::size_t child;
  double gain;
};

bool better(const Move& a, const Move& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.parent != b.parent) return a.parent < b.parent;
  return a.child < b.child;
}

std::vector<std::size_t> with(std::vector<std::size_t> set, std::size_t v) {
  set.insert(std::lower_bound(set.begin(), set.end(), v), v);
  return set;
}

std::vector<std::size_t> without(std::vector<std::size_t> set, std::size_t v) {
  set.erase(std::lower_bound(set.begin(), set.end(), v));
  return set;
}

// Gains at or below this are treated as ties with the current graph.
constexpr double kMinGain = 1e-9;

}  // namespace

Dag hill_climb(const std::vector<std::string>& names, LocalScorer& scorer, const SkeletonCandidates& candidates,
               std::optional<std::size_t> max_parents, std::vector<double>* trace) {
  const std::size_t nv = names.size();
  if (candidates.size() != nv) fail(ErrorKind::argument, "hill_climb: candidate sets do not match the node count");
  std::vector<char> allowed(nv * nv, 0);
  for (std::size_t v = 0; v < nv; ++v)
    for (std::size_t w : candidates[v]) {
      if (w >= nv || w == v) fail(ErrorKind::argument, "hill_climb: bad candidate index");
      allowed[v * nv + w] = 1;
    }
  for (std::size_t v = 0; v < nv; ++v)
    for (std::size_t w = 0; w < nv; ++w)
      if (allowed[v * nv + w] != allowed[w * nv + v]) fail(ErrorKind::argument, "hill_climb: candidates not symmetric");

  Dag g(names);
  std::vector<double> local(nv);
  double total = 0.0;
  for (std::size_t v = 0; v < nv; ++v) total += local[v] = scorer.local(v, {});
  if (trace) trace->assign(1, total);
  const std::size_t cap = max_parents.value_or(std::numeric_limits<std::size_t>::max());

  while (true) {
    std::optional<Move> best;
    auto consider = [&](Move m) {
      if (m.gain > kMinGain && (!best || better(m, *best))) best = m;
    };
    for (std::size_t p = 0; p < nv; ++p)
      for (std::size_t c = 0; c < nv; ++c) {
        if (p == c) continue;
        if (g.has_arc(p, c)) {
          const auto without_p = without(g.parents(c), p);
          const double drop = scorer.local(c, without_p) - local[c];
          consider({MoveKind::remove, p, c, drop});
          // Reversal: legal unless another directed path p ~> c exists.
          if (g.parents(p).size() < cap) {
            Dag probe = g;
            probe.remove_arc(p, c);
            if (!probe.reachable(p, c)) {
              const double gain = drop + scorer.local(p, with(g.parents(p), c)) - local[p];
              consider({MoveKind::reverse, p, c, gain});
            }
          }
        } else if (allowed[p * nv + c] && !g.has_arc(c, p) && g.parents(c).size() < cap &&
                   !g.would_create_cycle(p, c)) {
          consider({MoveKind::add, p, c, scorer.local(c, with(g.parents(c), p)) - local[c]});
        }
      }
    if (!best) break;
    const Move m = *best;
    switch (m.kind) {
      case MoveKind::add: g.add_arc(m.parent, m.child); break;
      case MoveKind::remove: g.remove_arc(m.parent, m.child); break;
      case MoveKind::reverse: g.reverse_arc(m.parent, m.child); break;
    }
    local[m.child] = scorer.local(m.child, g.parents(m.child));
    local[m.parent] = scorer.local(m.parent, g.parents(m.parent));
    total = 0.0;
    for (double s : local) total += s;
    if (trace) trace->push_back(total);
  }
  return g;
}

std::vector<std::size_t> mmpc_node(const DiscreteDataset& data, std::size_t x, const LearnConfig& config) {
  DataCiTester tester(data, config.test, config.seed);
  return mmpc_node(tester, x, {config.test.alpha, config.max_conditioning});
}

SkeletonCandidates mmpc(const DiscreteDataset& data, const LearnConfig& config) {
  DataCiTester tester(data, config.test, config.seed);
  return mmpc(tester, {config.test.alpha, config.max_conditioning});
}

Dag hill_climb(const DiscreteDataset& data, const SkeletonCandidates& candidates, const LearnConfig& config) {
  ScoreCache cache(data, config.score);
  return hill_climb(data.names(), cache, candidates, config.max_parents);
}

Dag mmhc(const DiscreteDataset& data, const LearnConfig& config) {
  return hill_climb(data, mmpc(data, config), config);
}

}  // namespace bnci
