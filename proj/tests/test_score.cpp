#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bnci/error.hpp"
#include "bnci/network.hpp"
#include "bnci/score.hpp"
#include "oracles.hpp"

using namespace bnci;
using Catch::Approx;

namespace {

// Random discrete data with dependence injected between neighbouring columns.
DiscreteDataset sample_data(std::mt19937_64& rng, std::size_t vars, std::size_t n) {
  std::vector<Variable> v;
  std::vector<std::vector<Level>> cols(vars, std::vector<Level>(n));
  for (std::size_t i = 0; i < vars; ++i) {
    Variable var{oracle::node_names(static_cast<int>(vars))[i], {}};
    const std::size_t r = 2 + rng() % 2;
    for (std::size_t l = 0; l < r; ++l) var.levels.push_back(std::to_string(l));
    v.push_back(var);
  }
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t i = 0; i < vars; ++i) {
      const auto r = v[i].levels.size();
      Level x = static_cast<Level>(rng() % r);
      if (i > 0 && rng() % 3) x = static_cast<Level>(cols[i - 1][row] % r);
      cols[i][row] = x;
    }
  return DiscreteDataset(v, cols);
}

BayesNet toy_generator(int n, std::uint32_t mask, std::mt19937_64& rng) {
  std::vector<Variable> vars;
  for (const auto& name : oracle::node_names(n)) vars.push_back({name, {"0", "1"}});
  std::vector<Cpt> cpts(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    for (int p = 0; p < n; ++p)
      if (mask >> (p * n + c) & 1u) cpts[c].parents.push_back(static_cast<std::size_t>(p));
    const std::size_t q = std::size_t{1} << cpts[c].parents.size();
    for (std::size_t j = 0; j < q; ++j) {
      // P(1) rises with the number of parents at 1, so every arc is strong.
      const double noise = 0.05 + 0.1 * static_cast<double>(rng() % 2);
      const double k = static_cast<double>(cpts[c].parents.size());
      const double p1 = k == 0 ? 0.3 : noise + (1 - 2 * noise) * __builtin_popcountll(j) / k;
      cpts[c].probs.push_back(1.0 - p1);
      cpts[c].probs.push_back(p1);
    }
  }
  return BayesNet("toy", vars, cpts);
}

}  // namespace

TEST_CASE("score kinds parse") {
  CHECK(parse_score_kind("bde") == ScoreKind::bde);
  CHECK(parse_score_kind("bdeu") == ScoreKind::bde);
  CHECK(parse_score_kind("bic") == ScoreKind::bic);
  CHECK_THROWS_AS(parse_score_kind("aic"), Error);
}

TEST_CASE("local score examples") {
  auto d = load_csv_text("A\n0\n0\n0\n1\n");
  CHECK(local_bde(d, 0, {}) == Approx(-2.7937909298903825).margin(1e-10));
  CHECK(local_bde(d, 0, {}, 10.0) == local_bde(d, 0, {}));
  CHECK(local_bic(d, 0, {}) == Approx(-2.9424877590351786).margin(1e-12));
  CHECK(local_bic(load_csv_text("A\n0\n0\n0\n0\n", {{"A", {"0", "1"}}}), 0, {}) ==
        Approx(-0.5 * std::log(4.0)).margin(1e-12));

  auto empty = DiscreteDataset({{"A", {"0", "1"}}}, {{}});
  CHECK(local_bde(empty, 0, {}) == 0.0);
  CHECK_THROWS_AS(local_bde(d, 0, {}, 0.0), Error);
}

TEST_CASE("BIC penalty grows with the parent configurations") {
  std::mt19937_64 rng(3);
  auto d = sample_data(rng, 3, 400);
  const double logn = std::log(400.0);
  std::vector<std::size_t> none, one{0}, two{0, 1};
  auto fc0 = family_counts(d, 2, none), fc1 = family_counts(d, 2, one), fc2 = family_counts(d, 2, two);
  CHECK(fc1.configurations == d.levels(0));
  CHECK(fc2.configurations == d.levels(0) * d.levels(1));
  const double r1 = static_cast<double>(d.levels(2) - 1);
  auto loglik = [](const FamilyCounts& fc) {
    double ll = 0;
    for (const auto& row : fc.observed) {
      Count total = 0;
      for (auto c : row) total += c;
      for (auto c : row)
        if (c > 0) ll += static_cast<double>(c) * std::log(static_cast<double>(c) / static_cast<double>(total));
    }
    return ll;
  };
  for (const auto* fc : {&fc0, &fc1, &fc2}) {
    const auto& ps = fc == &fc0 ? none : fc == &fc1 ? one : two;
    CHECK(local_bic(d, 2, ps) == Approx(loglik(*fc) - 0.5 * static_cast<double>(fc->configurations) * r1 * logn).margin(1e-9));
  }
  CHECK(loglik(fc1) >= loglik(fc0) - 1e-9);
  CHECK(loglik(fc2) >= loglik(fc1) - 1e-9);
}

TEST_CASE("network_score decomposes and matches name-aligned columns") {
  std::mt19937_64 rng(5);
  auto d = sample_data(rng, 4, 300);
  Dag g(d.names());
  g.add_arc(0, 1);
  g.add_arc(2, 1);
  g.add_arc(1, 3);
  for (ScoreSpec spec : {ScoreSpec{ScoreKind::bde, 10.0}, ScoreSpec{ScoreKind::bic, 10.0}}) {
    auto s = network_score(g, d, spec);
    double sum = 0;
    for (double x : s.per_node) sum += x;
    CHECK(s.total == Approx(sum).margin(1e-9));
    CHECK(s.n == 300);
    CHECK(s.per_node[1] == local_score(d, 1, std::vector<std::size_t>{0, 2}, spec));
    CHECK(s.params.has_value() == (spec.kind == ScoreKind::bic));

    auto empty = network_score(Dag(d.names()), d, spec);
    double parentless = 0;
    for (std::size_t v = 0; v < 4; ++v) parentless += local_score(d, v, {}, spec);
    CHECK(empty.total == Approx(parentless).margin(1e-9));
  }
  // Dag nodes in a different order than the data columns.
  Dag reordered({"D", "C", "B", "A"});
  reordered.add_arc(3, 2);
  Dag same(d.names());
  same.add_arc(0, 1);
  CHECK(network_score(reordered, d, {}).total == Approx(network_score(same, d, {}).total).margin(1e-9));
  CHECK_THROWS_AS(network_score(Dag({"A", "Q"}), d, {}), Error);
}

TEST_CASE("BIC params match the ALARM-style free-parameter count") {
  std::mt19937_64 rng(6);
  auto net = toy_generator(4, (1u << (0 * 4 + 1)) | (1u << (1 * 4 + 2)) | (1u << (0 * 4 + 3)), rng);
  auto data = forward_sample(net, 100, 1);
  auto s = network_score(net.dag(), data, {ScoreKind::bic, 10.0});
  CHECK(s.params == net.free_parameters());
}

TEST_CASE("ScoreCache is consistent and decomposable") {
  std::mt19937_64 rng(7);
  auto d = sample_data(rng, 4, 200);
  ScoreCache cache(d, {});
  std::vector<std::size_t> ps{2, 0};
  const double first = cache.local(1, ps);
  std::vector<std::size_t> sorted{0, 2};
  CHECK(cache.local(1, sorted) == first);
  CHECK(cache.misses() == 1);
  CHECK(first == local_bde(d, 1, sorted));

  // Changing one node's parents changes only that node's local term.
  Dag g(d.names()), h(d.names());
  g.add_arc(0, 1);
  h.add_arc(0, 1);
  h.add_arc(2, 3);
  auto sg = network_score(g, d, ScoreSpec{});
  auto sh = network_score(h, d, ScoreSpec{});
  for (std::size_t v = 0; v < 3; ++v) CHECK(sg.per_node[v] == sh.per_node[v]);
  CHECK(sg.per_node[3] != sh.per_node[3]);
}

TEST_CASE("BDeu is score equivalent") {
  std::mt19937_64 rng(11);
  auto d = sample_data(rng, 2, 500);
  Dag ab(d.names()), ba(d.names());
  ab.add_arc(0, 1);
  ba.add_arc(1, 0);
  CHECK(network_score(ab, d, {}).total == Approx(network_score(ba, d, {}).total).margin(1e-9));

  for (int n = 2; n <= 4; ++n) {
    oracle::CpdagByEnumeration classes(n);
    for (int trial = 0; trial < 5; ++trial) {
      auto data = sample_data(rng, static_cast<std::size_t>(n), 50 + rng() % 300);
      ScoreCache cache(data, {});
      std::map<std::uint32_t, double> totals;
      for (auto mask : classes.dags()) {
        double total = 0;
        auto g = oracle::to_dag(mask, n);
        for (std::size_t v = 0; v < g.size(); ++v) total += cache.local(v, g.parents(v));
        totals[mask] = total;
      }
      for (auto mask : classes.dags())
        for (auto other : classes.members(mask)) REQUIRE(totals[other] == Approx(totals[mask]).margin(1e-8));
    }
  }
}

TEST_CASE("BIC drops when adding an irrelevant parent") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    auto net = toy_generator(3, 1u << (0 * 3 + 1), rng);  // A -> B, C independent
    auto data = forward_sample(net, 1000, rng());
    CHECK(local_bic(data, 2, std::vector<std::size_t>{0}) < local_bic(data, 2, {}));
    CHECK(local_bic(data, 1, std::vector<std::size_t>{0}) > local_bic(data, 1, {}));
  }
}

TEST_CASE("BIC is maximized by the generator's equivalence class at large n") {
  std::mt19937_64 rng(19);
  const int n = 4;
  oracle::CpdagByEnumeration classes(n);
  const auto& dags = classes.dags();
  for (int trial = 0; trial < 4; ++trial) {
    auto mask = dags[rng() % dags.size()];
    auto net = toy_generator(n, mask, rng);
    auto data = forward_sample(net, 100000, rng());
    ScoreCache cache(data, {ScoreKind::bic, 10.0});
    double best = -INFINITY;
    std::uint32_t argbest = 0;
    for (auto m : dags) {
      auto g = oracle::to_dag(m, n);
      double total = 0;
      for (std::size_t v = 0; v < g.size(); ++v) total += cache.local(v, g.parents(v));
      if (total > best + 1e-9) {
        best = total;
        argbest = m;
      }
    }
    CHECK(oracle::equivalence_key(argbest, n) == oracle::equivalence_key(mask, n));
  }
}
