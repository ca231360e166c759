#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnci/data.hpp"
#include "bnci/random.hpp"

namespace bnci {

enum class Method { mi, x2, mi_perm, x2_perm, mi_shrink };

/// The two base statistics a test can be built on.
enum class Statistic { mi, x2 };

std::string_view to_string(Method m);
/// Throws a config error for an unknown tag.
Method parse_method(std::string_view tag);

struct TestOutcome {
  double statistic = 0.0;
  long df = 0;
  double p_value = 1.0;
  Method method = Method::mi;
  std::optional<long> permutations_used;  // permutation methods only
  std::optional<double> lambda;           // shrinkage only
};

struct ShrinkageSpec {
  /// Target cell probabilities in StratifiedTable::counts() order; empty
  /// means uniform over all R*C*L cells.
  std::vector<double> target;
  std::optional<double> lambda_override;
};

struct PermutationPlan {
  long replicates = 5000;
  std::uint64_t seed = 0;
};

enum class PermuteAlgorithm {
  hypergeometric,  // sequential conditional hypergeometric draws, O(R*C) per table
  shuffle,         // expand to label pairs, shuffle one side, re-tabulate, O(n)
};

/// Mutual information in nats; zero cells contribute 0.
double mutual_information(const StratifiedTable& tab);
/// Log-likelihood ratio statistic, 2n times the mutual information.
double g2_statistic(const StratifiedTable& tab);
double pearson_x2(const StratifiedTable& tab);

/// P(chi^2_df >= x), the regularized upper incomplete gamma Q(df/2, x/2).
double chisq_survival(double x, long df);

TestOutcome asymptotic_test(const StratifiedTable& tab, Statistic stat);

/// Draws a table with the same row and column margins as `view`, uniformly
/// over permutations of the stratum's observations.
std::vector<Count> permute_stratum(const StratumView& view, Rng& rng,
                                   PermuteAlgorithm algorithm = PermuteAlgorithm::hypergeometric);

/// Conditional Monte Carlo test: p = #{r : T*_r >= T} / R, each replicate
/// permuting every stratum independently. Replicate r draws from a stream
/// seeded by (plan.seed, r).
TestOutcome permutation_test(const StratifiedTable& tab, Statistic stat, const PermutationPlan& plan,
                             PermuteAlgorithm algorithm = PermuteAlgorithm::hypergeometric);

/// Closed-form MSE-optimal shrinkage intensity toward `target`, clamped to
/// [0, 1]. Degenerate inputs (n <= 1, or p-hat equal to the target) give 1.
double shrinkage_lambda(std::span<const Count> cells, std::span<const double> target = {});
double shrinkage_lambda(const StratifiedTable& tab, const ShrinkageSpec& spec = {});

/// Mutual information of an arbitrary cell-probability table laid out like
/// StratifiedTable::counts().
double mutual_information_of(std::span<const double> probs, std::size_t rows, std::size_t cols,
                             std::size_t strata);

TestOutcome shrinkage_mi_test(const StratifiedTable& tab, const ShrinkageSpec& spec = {});

struct TestConfig {
  Method method = Method::mi;
  double alpha = 0.05;  // not applied by ci_test; callers compare p to alpha
  PermutationPlan permutation;
  ShrinkageSpec shrinkage;
  PermuteAlgorithm permute_algorithm = PermuteAlgorithm::hypergeometric;
};

TestOutcome run_test(const StratifiedTable& tab, const TestConfig& config);

/// Stratifies and dispatches to the configured engine.
TestOutcome ci_test(const DiscreteDataset& data, std::size_t x, std::size_t y, std::span<const std::size_t> z,
                    const TestConfig& config);

}  // namespace bnci
