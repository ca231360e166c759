#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <fstream>
#include <random>
#include <sstream>

#include "bnci/data.hpp"
#include "bnci/error.hpp"

using namespace bnci;

TEST_CASE("load_csv encodes levels in first-appearance order") {
  auto d = load_csv_text("A,B\nyes,no\nno,no\n");
  REQUIRE(d.num_vars() == 2);
  REQUIRE(d.n() == 2);
  CHECK(d.variable(0).levels == std::vector<std::string>{"yes", "no"});
  CHECK(d.variable(1).levels == std::vector<std::string>{"no"});
  CHECK(d.at(0, 0) == 0);
  CHECK(d.at(1, 0) == 1);
}

TEST_CASE("load_csv rejects ragged rows with the line number") {
  try {
    load_csv_text("A,B\nyes,no\nno,no,maybe\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("load_csv rejects an empty body") {
  CHECK_THROWS_AS(load_csv_text("A,B\n"), FormatError);
  CHECK_THROWS_AS(load_csv_text(""), FormatError);
}

TEST_CASE("declared levels fix the order and the level count") {
  std::istringstream decl("A:lo,mid,hi\n");
  auto levels = parse_level_declarations(decl);
  auto d = load_csv_text("A,B\nhi,x\nlo,y\n", levels);
  CHECK(d.levels(0) == 3);
  CHECK(d.at(0, 0) == 2);
  CHECK(d.at(1, 0) == 0);
  CHECK_THROWS_AS(load_csv_text("A,B\nvery,x\n", levels), FormatError);
}

TEST_CASE("csv round-trip through write_csv") {
  auto d = load_csv_text("X,Y\na,b\nc,b\na,d\n");
  std::ostringstream out;
  write_csv(d, out);
  CHECK(out.str() == "X,Y\na,b\nc,b\na,d\n");
}

TEST_CASE("ALARM-sized sample loads with 37 variables") {
  // Header and a couple of rows shaped like a 37-column ALARM sample.
  std::ostringstream csv;
  for (int v = 0; v < 37; ++v) csv << (v ? "," : "") << "V" << v;
  csv << '\n';
  for (int r = 0; r < 20000; ++r) {
    for (int v = 0; v < 37; ++v) csv << (v ? "," : "") << ((r + v) % 3 == 0 ? "LOW" : "HIGH");
    csv << '\n';
  }
  auto d = load_csv_text(csv.str());
  CHECK(d.num_vars() == 37);
  CHECK(d.n() == 20000);
}

namespace {

DiscreteDataset make(std::vector<std::vector<Level>> cols, std::vector<std::size_t> levels) {
  std::vector<Variable> vars;
  for (std::size_t v = 0; v < cols.size(); ++v) {
    Variable var{"V" + std::to_string(v), {}};
    for (std::size_t l = 0; l < levels[v]; ++l) var.levels.push_back(std::to_string(l));
    vars.push_back(var);
  }
  return DiscreteDataset(vars, cols);
}

}  // namespace

TEST_CASE("stratify: exhaustive 2x2 with no conditioning set") {
  auto d = make({{0, 0, 1, 1}, {0, 1, 0, 1}}, {2, 2});
  auto t = stratify(d, 0, 1, {});
  REQUIRE(t.strata() == 1);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(t.count(i, j, 0) == 1);
}

TEST_CASE("stratify: a constant conditioning variable gives one stratum") {
  auto d = make({{0, 0, 1, 1}, {0, 1, 0, 1}, {0, 0, 0, 0}}, {2, 2, 2});
  std::vector<std::size_t> z{2};
  auto t = stratify(d, 0, 1, z);
  REQUIRE(t.strata() == 1);
  CHECK(t.n() == 4);
  CHECK(t.count(1, 1, 0) == 1);
}

TEST_CASE("stratify: binary X, Y, Z crossing every combination once") {
  std::vector<Level> x, y, z;
  for (Level a = 0; a < 2; ++a)
    for (Level b = 0; b < 2; ++b)
      for (Level c = 0; c < 2; ++c) {
        x.push_back(a);
        y.push_back(b);
        z.push_back(c);
      }
  auto d = make({x, y, z}, {2, 2, 2});
  std::vector<std::size_t> zs{2};
  auto t = stratify(d, 0, 1, zs);
  REQUIRE(t.strata() == 2);
  for (auto c : t.counts()) CHECK(c == 1);
  CHECK(t.degrees_of_freedom() == 2);
}

TEST_CASE("stratify argument errors") {
  auto d = make({{0, 1}, {0, 1}, {1, 0}}, {2, 2, 2});
  std::vector<std::size_t> bad{0};
  CHECK_THROWS_AS(stratify(d, 0, 0, {}), Error);
  CHECK_THROWS_AS(stratify(d, 0, 1, bad), Error);
}

TEST_CASE("stratify properties on random data") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<std::size_t> levels{2 + rng() % 3, 2 + rng() % 3, 2 + rng() % 3, 1 + rng() % 3};
    std::vector<std::vector<Level>> cols(4, std::vector<Level>(n));
    for (std::size_t v = 0; v < 4; ++v)
      for (auto& l : cols[v]) l = static_cast<Level>(rng() % levels[v]);
    auto d = make(cols, levels);
    std::vector<std::size_t> z{2, 3};
    auto t = stratify(d, 0, 1, z);
    CHECK(t.n() == static_cast<Count>(n));
    CHECK(t.rows() == levels[0]);
    CHECK(t.cols() == levels[1]);
    for (std::size_t k = 0; k < t.strata(); ++k) {
      auto v = stratum_view(t, k);
      Count rs = 0, cs = 0;
      for (auto r : v.row_margins) rs += r;
      for (auto c : v.col_margins) cs += c;
      CHECK(rs == v.total);
      CHECK(cs == v.total);
      CHECK(v.total > 0);  // empty strata are dropped
      double m = 0;
      for (std::size_t i = 0; i < v.rows; ++i)
        for (std::size_t j = 0; j < v.cols; ++j) m += v.expected(i, j);
      CHECK(m == Catch::Approx(static_cast<double>(v.total)).epsilon(1e-12));
    }

    // Row order does not matter.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto shuffled = cols;
    for (std::size_t v = 0; v < 4; ++v)
      for (std::size_t r = 0; r < n; ++r) shuffled[v][r] = cols[v][perm[r]];
    auto t2 = stratify(make(shuffled, levels), 0, 1, z);
    CHECK(std::equal(t.counts().begin(), t.counts().end(), t2.counts().begin(), t2.counts().end()));
  }
}
