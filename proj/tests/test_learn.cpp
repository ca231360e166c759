#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "bnci/error.hpp"
#include "bnci/learn.hpp"
#include "bnci/network.hpp"

using namespace bnci;

namespace {

Dag make(const std::vector<std::string>& names, const std::vector<std::pair<std::string, std::string>>& arcs) {
  Dag g(names);
  for (const auto& [p, c] : arcs) g.add_arc(g.index_of(p), g.index_of(c));
  return g;
}

class Independent : public CiTester {
 public:
  explicit Independent(std::size_t n) : n_(n) {}
  std::size_t num_vars() const override { return n_; }
  TestOutcome test(std::size_t, std::size_t, std::span<const std::size_t>) override { return {0.0, 1, 1.0, Method::mi}; }

 private:
  std::size_t n_;
};

// Scores each family by a fixed table; unknown families score 0.
class StubScorer : public LocalScorer {
 public:
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> table;
  double local(std::size_t node, std::span<const std::size_t> parents) override {
    auto it = table.find({node, std::vector<std::size_t>(parents.begin(), parents.end())});
    return it == table.end() ? 0.0 : it->second;
  }
};

BayesNet binary_net(const Dag& g, std::mt19937_64& rng) {
  std::vector<Variable> vars;
  std::vector<Cpt> cpts;
  for (std::size_t v = 0; v < g.size(); ++v) {
    vars.push_back({g.name(v), {"0", "1"}});
    Cpt c{g.parents(v), {}};
    for (std::size_t j = 0; j < (std::size_t{1} << c.parents.size()); ++j) {
      // Strong additive effects: P(1) rises with the number of parents at 1.
      const double noise = 0.05 + 0.1 * static_cast<double>(rng() % 2);
      const double k = static_cast<double>(c.parents.size());
      const double p1 = c.parents.empty() ? 0.5 : noise + (1 - 2 * noise) * __builtin_popcountll(j) / k;
      c.probs.push_back(1 - p1);
      c.probs.push_back(p1);
    }
    cpts.push_back(c);
  }
  return BayesNet("toy", vars, cpts);
}

bool symmetric(const SkeletonCandidates& c) {
  for (std::size_t x = 0; x < c.size(); ++x)
    for (auto y : c[x])
      if (std::find(c[y].begin(), c[y].end(), x) == c[y].end()) return false;
  return true;
}

}  // namespace

TEST_CASE("d-separation") {
  auto chain = make({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
  std::vector<std::size_t> b{1}, none;
  CHECK_FALSE(d_separated(chain, 0, 2, none));
  CHECK(d_separated(chain, 0, 2, b));
  auto collider = make({"A", "B", "C", "D"}, {{"A", "C"}, {"B", "C"}, {"C", "D"}});
  std::vector<std::size_t> c{2}, d{3};
  CHECK(d_separated(collider, 0, 1, none));
  CHECK_FALSE(d_separated(collider, 0, 1, c));
  CHECK_FALSE(d_separated(collider, 0, 1, d));  // conditioning on a descendant opens the collider
}

TEST_CASE("mmpc_node with a d-separation oracle") {
  DSeparationOracle chain(make({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}));
  MmpcOptions opts;
  CHECK(mmpc_node(chain, 1, opts) == std::vector<std::size_t>{0, 2});
  CHECK(mmpc_node(chain, 0, opts) == std::vector<std::size_t>{1});

  Independent none(4);
  for (std::size_t v = 0; v < 4; ++v) CHECK(mmpc_node(none, v, opts).empty());
}

TEST_CASE("mmpc on a collider and on independence") {
  DSeparationOracle collider(make({"A", "B", "C"}, {{"A", "C"}, {"B", "C"}}));
  auto cpc = mmpc(collider, {});
  CHECK(cpc[0] == std::vector<std::size_t>{2});
  CHECK(cpc[1] == std::vector<std::size_t>{2});
  CHECK(cpc[2] == std::vector<std::size_t>{0, 1});

  Independent none(5);
  for (const auto& set : mmpc(none, {})) CHECK(set.empty());
}

TEST_CASE("mmpc with an oracle recovers the skeleton of random DAGs") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 4;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("N" + std::to_string(i));
    Dag g(names);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t p = 0; p < c; ++p)
        if (rng() % 3 == 0) g.add_arc(p, c);
    DSeparationOracle oracle(g);
    auto cpc = mmpc(oracle, {0.05, n});
    REQUIRE(symmetric(cpc));
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const bool in = std::find(cpc[x].begin(), cpc[x].end(), y) != cpc[x].end();
        REQUIRE(in == g.adjacent(x, y));
      }
  }
}

TEST_CASE("hill climbing with a stub score") {
  StubScorer s;
  s.table[{1, {0}}] = 1.0;   // A -> B gains 1
  s.table[{0, {1}}] = -1.0;  // B -> A loses
  s.table[{2, {0}}] = -1.0;
  s.table[{0, {2}}] = -1.0;
  s.table[{2, {1}}] = -1.0;
  s.table[{1, {2}}] = -1.0;
  SkeletonCandidates full{{1, 2}, {0, 2}, {0, 1}};
  std::vector<double> trace;
  auto g = hill_climb({"A", "B", "C"}, s, full, std::nullopt, &trace);
  CHECK(g.arcs() == std::vector<Arc>{{0, 1}});
  CHECK(trace.size() == 2);

  auto empty = hill_climb({"A", "B", "C"}, s, SkeletonCandidates(3), std::nullopt, nullptr);
  CHECK(empty.num_arcs() == 0);
}

TEST_CASE("hill climbing breaks ties by move then parent then child") {
  StubScorer s;
  s.table[{1, {0}}] = 1.0;
  s.table[{0, {1}}] = 1.0;
  auto g = hill_climb({"A", "B"}, s, {{1}, {0}});
  CHECK(g.arcs() == std::vector<Arc>{{0, 1}});
}

TEST_CASE("hill climbing respects max_parents and yields a strictly increasing trace") {
  std::mt19937_64 rng(9);
  auto truth = make({"A", "B", "C", "D"}, {{"A", "D"}, {"B", "D"}, {"C", "D"}});
  auto data = forward_sample(binary_net(truth, rng), 3000, 5);
  ScoreCache cache(data, {ScoreKind::bic, 10.0});
  SkeletonCandidates full{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  std::vector<double> trace;
  auto g = hill_climb(data.names(), cache, full, std::size_t{1}, &trace);
  for (std::size_t v = 0; v < g.size(); ++v) CHECK(g.parents(v).size() <= 1);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] > trace[i - 1]);
  CHECK(trace.back() == Catch::Approx(network_score(g, data, {ScoreKind::bic, 10.0}).total).margin(1e-6));
}

TEST_CASE("two strongly dependent variables get one arc") {
  std::mt19937_64 rng(1);
  auto data = forward_sample(binary_net(make({"X", "Y"}, {{"X", "Y"}}), rng),
                             1000, 3);
  LearnConfig cfg;
  cfg.score = {ScoreKind::bic, 10.0};
  auto g = hill_climb(data, {{1}, {0}}, cfg);
  CHECK(g.num_arcs() == 1);
}

TEST_CASE("mmhc recovers a chain from data") {
  std::mt19937_64 rng(2);
  auto truth = make({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
  auto data = forward_sample(binary_net(truth, rng), 5000, 42);
  for (auto m : {Method::mi, Method::x2, Method::mi_shrink, Method::mi_perm}) {
    LearnConfig cfg;
    cfg.test.method = m;
    cfg.test.permutation.replicates = 300;
    cfg.seed = 8;
    auto g = mmhc(data, cfg);
    CHECK(shd(g, truth) == 0);
    CHECK(mmhc(data, cfg) == g);
  }
}

TEST_CASE("mmhc with an oracle skeleton recovers 5-node generators") {
  std::mt19937_64 rng(77);
  const std::vector<std::vector<std::pair<std::string, std::string>>> shapes{
      {{"A", "B"}, {"B", "C"}, {"C", "D"}, {"D", "E"}},
      {{"A", "C"}, {"B", "C"}, {"C", "D"}, {"C", "E"}},
      {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}, {"D", "E"}},
  };
  for (const auto& arcs : shapes) {
    auto truth = make({"A", "B", "C", "D", "E"}, arcs);
    auto data = forward_sample(binary_net(truth, rng), 10000, rng());
    DSeparationOracle oracle(truth);
    auto cpc = mmpc(oracle, {});
    ScoreCache cache(data, {});
    auto g = hill_climb(data.names(), cache, cpc);
    CHECK(shd(g, truth) <= 1);
  }
}

TEST_CASE("learned structures stay inside a symmetric skeleton") {
  std::mt19937_64 rng(3);
  auto truth = make({"A", "B", "C", "D", "E"}, {{"A", "C"}, {"B", "C"}, {"C", "D"}, {"B", "E"}});
  auto data = forward_sample(binary_net(truth, rng), 300, 8);
  LearnConfig cfg;
  for (auto m : {Method::mi, Method::x2, Method::mi_shrink}) {
    cfg.test.method = m;
    auto cpc = mmpc(data, cfg);
    CHECK(symmetric(cpc));
    auto g = mmhc(data, cfg);
    for (auto [p, c] : g.arcs()) CHECK(std::find(cpc[c].begin(), cpc[c].end(), p) != cpc[c].end());
  }
}

TEST_CASE("DataCiTester memoizes canonical queries") {
  std::mt19937_64 rng(5);
  auto data = forward_sample(binary_net(make({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}), rng), 500, 1);
  TestConfig cfg;
  cfg.method = Method::mi_perm;
  cfg.permutation.replicates = 200;
  DataCiTester t(data, cfg, 4);
  std::vector<std::size_t> z1{1};
  auto a = t.test(0, 2, z1);
  auto b = t.test(2, 0, z1);
  CHECK(a.p_value == b.p_value);
  CHECK(t.tests_run() == 1);
  t.test(1, 0, {});
  CHECK(t.tests_run() == 2);

  // Order of queries does not change answers.
  DataCiTester u(data, cfg, 4);
  u.test(0, 1, {});
  CHECK(u.test(2, 0, z1).p_value == a.p_value);
}
