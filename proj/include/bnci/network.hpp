#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnci/data.hpp"
#include "bnci/graph.hpp"

namespace bnci {

/// Conditional probability table of one node. `parents` keeps the order of
/// the BIF probability block; the configuration index is mixed-radix with the
/// first parent varying fastest. Entry (config, level) lives at
/// probs[config * levels + level].
struct Cpt {
  std::vector<std::size_t> parents;
  std::vector<double> probs;
};

class BayesNet {
 public:
  /// Validates dimensions and that every row sums to 1 within `row_tolerance`;
  /// rows off by more than 1e-10 are renormalized.
  BayesNet(std::string name, std::vector<Variable> variables, std::vector<Cpt> cpts, double row_tolerance = 1e-6);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return variables_.size(); }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const Variable& variable(std::size_t v) const { return variables_.at(v); }
  std::size_t levels(std::size_t v) const { return variables_.at(v).levels.size(); }
  const Cpt& cpt(std::size_t v) const { return cpts_.at(v); }
  const Dag& dag() const noexcept { return dag_; }

  /// Number of parent configurations q of node v.
  std::size_t configurations(std::size_t v) const;
  /// Sum over nodes of q * (r - 1).
  std::size_t free_parameters() const;
  double probability(std::size_t v, std::size_t config, std::size_t level) const {
    return cpts_[v].probs[config * levels(v) + level];
  }

 private:
  std::string name_;
  std::vector<Variable> variables_;
  std::vector<Cpt> cpts_;
  Dag dag_;
};

/// Discrete subset of BIF 0.3: network, variable (type discrete), and
/// probability blocks with either `table` or per-configuration rows.
/// `table` on a node with parents lists whole rows back to back in
/// configuration order (first parent fastest).
BayesNet parse_bif(std::string_view text);
BayesNet read_bif(std::istream& in);
/// Probabilities are printed with 10 significant digits.
std::string emit_bif(const BayesNet& net);

/// Ancestral sampling, one uniform draw per node per row.
DiscreteDataset forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed);

/// Empirical-frequency CPTs for `dag` on `data` (variables matched by name).
/// Parent configurations never observed get a uniform row.
BayesNet fit_mle(const Dag& dag, const DiscreteDataset& data);

/// Natural-log likelihood of `data` under `net`; -infinity when some row has
/// probability zero. Variables and levels are matched by name.
double log_likelihood(const BayesNet& net, const DiscreteDataset& data);

/// Maps each of `names` to its column in `data`; throws if any is missing.
std::vector<std::size_t> align_columns(const std::vector<std::string>& names, const DiscreteDataset& data);

}  // namespace bnci
