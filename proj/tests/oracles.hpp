// Independent reference computations for the test suites. Nothing here calls
// into the library's statistic, graph or score code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "bnci/data.hpp"
#include "bnci/graph.hpp"

namespace oracle {

using Cells = std::vector<std::vector<std::vector<long>>>;  // [k][i][j]

inline Cells cells_of(const bnci::StratifiedTable& t) {
  Cells c(t.strata(), std::vector<std::vector<long>>(t.rows(), std::vector<long>(t.cols())));
  for (std::size_t k = 0; k < t.strata(); ++k)
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < t.cols(); ++j) c[k][i][j] = static_cast<long>(t.count(i, j, k));
  return c;
}

inline bnci::StratifiedTable table_of(const Cells& c) {
  std::vector<bnci::Count> flat;
  for (const auto& s : c)
    for (const auto& r : s)
      for (long v : r) flat.push_back(v);
  return bnci::StratifiedTable(c[0].size(), c[0][0].size(), c.size(), flat);
}

/// Mutual information straight from the definition.
inline double mi(const Cells& c) {
  double n = 0;
  for (const auto& s : c)
    for (const auto& r : s)
      for (long v : r) n += static_cast<double>(v);
  double total = 0.0;
  for (const auto& s : c) {
    double nk = 0;
    for (const auto& r : s)
      for (long v : r) nk += static_cast<double>(v);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s[i].size(); ++j) {
        if (s[i][j] == 0) continue;
        double ni = 0, nj = 0;
        for (long v : s[i]) ni += static_cast<double>(v);
        for (const auto& r : s) nj += static_cast<double>(r[j]);
        total += static_cast<double>(s[i][j]) / n * std::log(static_cast<double>(s[i][j]) * nk / (ni * nj));
      }
  }
  return total;
}

inline double x2(const Cells& c) {
  double total = 0.0;
  for (const auto& s : c) {
    double nk = 0;
    for (const auto& r : s)
      for (long v : r) nk += static_cast<double>(v);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s[i].size(); ++j) {
        double ni = 0, nj = 0;
        for (long v : s[i]) ni += static_cast<double>(v);
        for (const auto& r : s) nj += static_cast<double>(r[j]);
        double m = nk > 0 ? ni * nj / nk : 0.0;
        if (m > 0) total += (static_cast<double>(s[i][j]) - m) * (static_cast<double>(s[i][j]) - m) / m;
      }
  }
  return total;
}

/// Composite Simpson quadrature of the chi-square density after t = u^2,
/// which removes the df = 1 singularity at zero.
inline double chisq_survival(double x, int df, int panels = 200000) {
  const double k = df;
  const double norm = std::pow(2.0, k / 2.0) * std::tgamma(k / 2.0);
  auto f = [&](double u) { return 2.0 * std::pow(u, k - 1.0) * std::exp(-u * u / 2.0) / norm; };
  const double b = std::sqrt(x);
  const double h = b / panels;
  double s = f(0.0) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return 1.0 - s * h / 3.0;
}

/// Direct evaluation of the closed-form shrinkage intensity, clamped.
inline double lambda_star(const std::vector<long>& counts, const std::vector<double>& target) {
  double n = 0;
  for (long v : counts) n += static_cast<double>(v);
  double num = 1.0, den = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double p = static_cast<double>(counts[i]) / n;
    num -= p * p;
    den += (target[i] - p) * (target[i] - p);
  }
  if (n <= 1 || den == 0.0) return 1.0;
  return std::clamp(num / ((n - 1) * den), 0.0, 1.0);
}

/// All R x C tables with the given margins, with their probability under
/// uniform permutation of the observations (multivariate hypergeometric).
inline std::vector<std::pair<std::vector<std::vector<long>>, double>> margin_fixed_tables(
    const std::vector<long>& rows, const std::vector<long>& cols) {
  std::vector<std::pair<std::vector<std::vector<long>>, double>> out;
  const std::size_t R = rows.size(), C = cols.size();
  long n = 0;
  for (long r : rows) n += r;
  auto lfact = [](long v) { return std::lgamma(static_cast<double>(v) + 1.0); };
  double log_const = -lfact(n);
  for (long r : rows) log_const += lfact(r);
  for (long c : cols) log_const += lfact(c);
  std::vector<std::vector<long>> t(R, std::vector<long>(C, 0));
  std::vector<long> col_left = cols;
  // Fill cell by cell; the last column of each row and the last row are forced.
  std::function<void(std::size_t, std::size_t, long)> rec = [&](std::size_t i, std::size_t j, long row_left) {
    if (i == R - 1) {
      for (std::size_t jj = 0; jj < C; ++jj) t[i][jj] = col_left[jj];
      long sum = 0;
      for (long v : t[i]) sum += v;
      if (sum != rows[i]) return;
      double lp = log_const;
      for (const auto& r : t)
        for (long v : r) lp -= lfact(v);
      out.emplace_back(t, std::exp(lp));
      return;
    }
    if (j == C - 1) {
      if (row_left > col_left[j]) return;
      t[i][j] = row_left;
      col_left[j] -= row_left;
      rec(i + 1, 0, rows[i + 1]);
      col_left[j] += row_left;
      return;
    }
    for (long v = 0; v <= std::min(row_left, col_left[j]); ++v) {
      t[i][j] = v;
      col_left[j] -= v;
      rec(i, j + 1, row_left - v);
      col_left[j] += v;
    }
  };
  rec(0, 0, rows[0]);
  return out;
}

// ---------------------------------------------------------------------------
// Graphs on <= 5 nodes, represented by an adjacency bitmask (bit p*n+c for
// the arc p -> c).

inline bool acyclic(std::uint32_t mask, int n) {
  std::vector<int> indeg(n, 0);
  for (int p = 0; p < n; ++p)
    for (int c = 0; c < n; ++c)
      if (mask >> (p * n + c) & 1u) ++indeg[c];
  std::vector<int> ready;
  for (int v = 0; v < n; ++v)
    if (!indeg[v]) ready.push_back(v);
  int seen = 0;
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    ++seen;
    for (int c = 0; c < n; ++c)
      if (mask >> (v * n + c) & 1u)
        if (--indeg[c] == 0) ready.push_back(c);
  }
  return seen == n;
}

/// Every DAG on n labelled nodes.
inline std::vector<std::uint32_t> all_dags(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  std::vector<std::uint32_t> out;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint32_t mask = 0;
    std::uint64_t rest = code;
    for (auto [a, b] : pairs) {
      int state = static_cast<int>(rest % 3);
      rest /= 3;
      if (state == 1) mask |= 1u << (a * n + b);
      if (state == 2) mask |= 1u << (b * n + a);
    }
    if (acyclic(mask, n)) out.push_back(mask);
  }
  return out;
}

/// Skeleton plus v-structures: two DAGs are Markov equivalent iff keys match.
inline std::pair<std::uint32_t, std::set<std::tuple<int, int, int>>> equivalence_key(std::uint32_t mask, int n) {
  auto arc = [&](int p, int c) { return (mask >> (p * n + c) & 1u) != 0; };
  std::uint32_t skeleton = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (arc(a, b) || arc(b, a)) skeleton |= 1u << (a * n + b);
  std::set<std::tuple<int, int, int>> vs;
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (a != c && b != c && arc(a, c) && arc(b, c) && !arc(a, b) && !arc(b, a)) vs.emplace(a, c, b);
  return {skeleton, vs};
}

/// Per-pair marks of the CPDAG, computed by enumerating the equivalence
/// class: 0 none, 1 a->b, 2 b->a, 3 undirected (for a < b).
class CpdagByEnumeration {
 public:
  explicit CpdagByEnumeration(int n) : n_(n), dags_(all_dags(n)) {
    for (auto d : dags_) classes_[equivalence_key(d, n)].push_back(d);
  }
  const std::vector<std::uint32_t>& dags() const { return dags_; }
  const std::vector<std::uint32_t>& members(std::uint32_t mask) const { return classes_.at(equivalence_key(mask, n_)); }

  std::vector<int> marks(std::uint32_t mask) const {
    const auto& cls = members(mask);
    std::vector<int> out;
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b) {
        bool any_ab = false, any_ba = false;
        for (auto d : cls) {
          any_ab |= (d >> (a * n_ + b) & 1u) != 0;
          any_ba |= (d >> (b * n_ + a) & 1u) != 0;
        }
        out.push_back(any_ab && any_ba ? 3 : any_ab ? 1 : any_ba ? 2 : 0);
      }
    return out;
  }

  std::size_t shd(std::uint32_t a, std::uint32_t b) const {
    auto ma = marks(a), mb = marks(b);
    std::size_t d = 0;
    for (std::size_t i = 0; i < ma.size(); ++i) d += ma[i] != mb[i];
    return d;
  }

 private:
  int n_;
  std::vector<std::uint32_t> dags_;
  std::map<std::pair<std::uint32_t, std::set<std::tuple<int, int, int>>>, std::vector<std::uint32_t>> classes_;
};

inline std::vector<std::string> node_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('A' + i)));
  return names;
}

inline bnci::Dag to_dag(std::uint32_t mask, int n) {
  bnci::Dag g(node_names(n));
  for (int p = 0; p < n; ++p)
    for (int c = 0; c < n; ++c)
      if (mask >> (p * n + c) & 1u) g.add_arc(static_cast<std::size_t>(p), static_cast<std::size_t>(c));
  return g;
}

}  // namespace oracle
