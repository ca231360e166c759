#include "bnci/score.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "bnci/error.hpp"
#include "bnci/network.hpp"

namespace bnci {

std::string_view to_string(ScoreKind k) { return k == ScoreKind::bde ? "bde" : "bic"; }

ScoreKind parse_score_kind(std::string_view tag) {
  if (tag == "bde" || tag == "bdeu") return ScoreKind::bde;
  if (tag == "bic") return ScoreKind::bic;
  fail(ErrorKind::config, "unknown score '" + std::string(tag) + "'");
}

FamilyCounts family_counts(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents) {
  FamilyCounts fc;
  fc.levels = data.levels(node);
  fc.configurations = 1;
  for (std::size_t p : parents) {
    if (p == node) fail(ErrorKind::argument, "a node cannot be its own parent");
    fc.configurations *= data.levels(p);
  }
  const std::size_t n = data.n(), r = fc.levels;
  std::vector<std::size_t> config(n, 0);
  std::size_t stride = 1;
  for (std::size_t p : parents) {
    auto col = data.column(p);
    for (std::size_t row = 0; row < n; ++row) config[row] += stride * col[row];
    stride *= data.levels(p);
  }
  auto child = data.column(node);
  if (fc.configurations <= (std::size_t{1} << 16)) {
    std::vector<Count> dense(fc.configurations * r, 0);
    for (std::size_t row = 0; row < n; ++row) ++dense[config[row] * r + child[row]];
    for (std::size_t j = 0; j < fc.configurations; ++j) {
      auto first = dense.begin() + static_cast<std::ptrdiff_t>(j * r);
      if (std::any_of(first, first + static_cast<std::ptrdiff_t>(r), [](Count c) { return c != 0; }))
        fc.observed.emplace_back(first, first + static_cast<std::ptrdiff_t>(r));
    }
  } else {
    std::unordered_map<std::size_t, std::size_t> slot;
    for (std::size_t row = 0; row < n; ++row) {
      auto [it, fresh] = slot.emplace(config[row], fc.observed.size());
      if (fresh) fc.observed.emplace_back(r, 0);
      ++fc.observed[it->second][child[row]];
    }
  }
  return fc;
}

double local_bde(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents, double ess) {
  if (!(ess > 0.0)) fail(ErrorKind::argument, "BDe equivalent sample size must be positive");
  const FamilyCounts fc = family_counts(data, node, parents);
  const double q = static_cast<double>(fc.configurations), r = static_cast<double>(fc.levels);
  const double a_j = ess / q, a_jk = ess / (q * r);
  const double lg_aj = std::lgamma(a_j), lg_ajk = std::lgamma(a_jk);
  double s = 0.0;
  for (const auto& row : fc.observed) {
    Count nj = 0;
    for (Count c : row) {
      nj += c;
      if (c > 0) s += std::lgamma(a_jk + static_cast<double>(c)) - lg_ajk;
    }
    s += lg_aj - std::lgamma(a_j + static_cast<double>(nj));
  }
  return s;
}

double local_bic(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents) {
  const FamilyCounts fc = family_counts(data, node, parents);
  double ll = 0.0;
  for (const auto& row : fc.observed) {
    Count nj = 0;
    for (Count c : row) nj += c;
    const double log_nj = std::log(static_cast<double>(nj));
    for (Count c : row)
      if (c > 0) ll += static_cast<double>(c) * (std::log(static_cast<double>(c)) - log_nj);
  }
  const double d = static_cast<double>(fc.configurations * (fc.levels - 1));
  const double n = static_cast<double>(data.n());
  return ll - 0.5 * d * (n > 0 ? std::log(n) : 0.0);
}

double local_score(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents,
                   const ScoreSpec& spec) {
  return spec.kind == ScoreKind::bde ? local_bde(data, node, parents, spec.ess) : local_bic(data, node, parents);
}

ScoreCache::ScoreCache(const DiscreteDataset& data, ScoreSpec spec) : data_(data), spec_(spec) {
  if (spec_.kind == ScoreKind::bde && !(spec_.ess > 0.0))
    fail(ErrorKind::argument, "BDe equivalent sample size must be positive");
}

double ScoreCache::local(std::size_t node, std::span<const std::size_t> parents) {
  std::vector<std::size_t> key;
  key.reserve(parents.size() + 1);
  key.push_back(node);
  key.insert(key.end(), parents.begin(), parents.end());
  std::sort(key.begin() + 1, key.end());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  ++misses_;
  double value = local_score(data_, node, std::span<const std::size_t>(key).subspan(1), spec_);
  cache_.emplace(std::move(key), value);
  return value;
}

ScoreValue network_score(const Dag& dag, const DiscreteDataset& data, const ScoreSpec& spec) {
  const auto cols = align_columns(dag.names(), data);
  ScoreValue out;
  out.n = data.n();
  std::size_t params = 0;
  for (std::size_t v = 0; v < dag.size(); ++v) {
    std::vector<std::size_t> parents;
    std::size_t q = 1;
    for (std::size_t p : dag.parents(v)) {
      parents.push_back(cols[p]);
      q *= data.levels(cols[p]);
    }
    params += q * (data.levels(cols[v]) - 1);
    double local = local_score(data, cols[v], parents, spec);
    out.per_node.push_back(local);
    out.total += local;
  }
  if (spec.kind == ScoreKind::bic) out.params = params;
  return out;
}

}  // namespace bnci
