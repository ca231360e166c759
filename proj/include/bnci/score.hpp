#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bnci/data.hpp"
#include "bnci/graph.hpp"

namespace bnci {

enum class ScoreKind { bde, bic };

std::string_view to_string(ScoreKind k);
ScoreKind parse_score_kind(std::string_view tag);

struct ScoreSpec {
  ScoreKind kind = ScoreKind::bde;
  double ess = 10.0;  // BDe imaginary sample size
};

/// Log-scale, higher is better.
struct ScoreValue {
  double total = 0.0;
  std::vector<double> per_node;
  std::size_t n = 0;
  std::optional<std::size_t> params;  // BIC only
};

/// Child-by-parent-configuration counts N_jk for one family.
struct FamilyCounts {
  std::size_t levels = 0;          // r
  std::size_t configurations = 0;  // q, including unobserved ones
  /// Only observed configurations are stored: one r-vector per entry.
  std::vector<std::vector<Count>> observed;
};

FamilyCounts family_counts(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents);

/// BDeu local log marginal likelihood with alpha_jk = ess / (q r).
double local_bde(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents,
                 double ess = 10.0);
/// Maximized local log-likelihood minus q (r - 1) log(n) / 2.
double local_bic(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents);

double local_score(const DiscreteDataset& data, std::size_t node, std::span<const std::size_t> parents,
                   const ScoreSpec& spec);

/// Local-score source for the hill climber; node indices are data columns.
class LocalScorer {
 public:
  virtual ~LocalScorer() = default;
  virtual double local(std::size_t node, std::span<const std::size_t> parents) = 0;
};

/// Memoizes local scores by (node, sorted parent set). Not thread-safe; use
/// one per task.
class ScoreCache : public LocalScorer {
 public:
  ScoreCache(const DiscreteDataset& data, ScoreSpec spec);
  double local(std::size_t node, std::span<const std::size_t> parents) override;
  std::size_t size() const noexcept { return cache_.size(); }
  std::size_t misses() const noexcept { return misses_; }

 private:
  const DiscreteDataset& data_;
  ScoreSpec spec_;
  std::map<std::vector<std::size_t>, double> cache_;  // key: node followed by sorted parents
  std::size_t misses_ = 0;
};

/// Sum of local scores of `dag` on `data` (nodes matched by name).
ScoreValue network_score(const Dag& dag, const DiscreteDataset& data, const ScoreSpec& spec);

}  // namespace bnci
