#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnci/citest.hpp"
#include "bnci/data.hpp"
#include "bnci/graph.hpp"
#include "bnci/score.hpp"

namespace bnci {

/// Source of conditional-independence decisions for MMPC.
class CiTester {
 public:
  virtual ~CiTester() = default;
  virtual std::size_t num_vars() const = 0;
  virtual TestOutcome test(std::size_t x, std::size_t y, std::span<const std::size_t> z) = 0;
};

/// Runs the configured test on a dataset. Queries are canonicalized
/// (x < y, z sorted) and memoized, and the permutation seed of each query is
/// derived from (seed, x, y, z) so answers do not depend on query order.
class DataCiTester : public CiTester {
 public:
  DataCiTester(const DiscreteDataset& data, TestConfig config, std::uint64_t seed);
  std::size_t num_vars() const override { return data_.num_vars(); }
  TestOutcome test(std::size_t x, std::size_t y, std::span<const std::size_t> z) override;
  std::size_t tests_run() const noexcept { return cache_.size(); }

 private:
  const DiscreteDataset& data_;
  TestConfig config_;
  std::uint64_t seed_;
  std::map<std::vector<std::size_t>, TestOutcome> cache_;
};

/// Answers from d-separation in a known DAG: p = 1 when separated, else 0.
class DSeparationOracle : public CiTester {
 public:
  explicit DSeparationOracle(Dag dag) : dag_(std::move(dag)) {}
  std::size_t num_vars() const override { return dag_.size(); }
  TestOutcome test(std::size_t x, std::size_t y, std::span<const std::size_t> z) override;

 private:
  Dag dag_;
};

bool d_separated(const Dag& g, std::size_t x, std::size_t y, std::span<const std::size_t> z);

struct MmpcOptions {
  double alpha = 0.05;
  std::size_t max_conditioning = 3;
};

/// Candidate parents-and-children per node.
using SkeletonCandidates = std::vector<std::vector<std::size_t>>;

std::vector<std::size_t> mmpc_node(CiTester& tester, std::size_t x, const MmpcOptions& options);
/// mmpc_node for every node, then the AND rule: y stays in CPC(x) only if
/// x is in CPC(y).
SkeletonCandidates mmpc(CiTester& tester, const MmpcOptions& options);

/// Greedy search from the empty graph over additions (candidate pairs only),
/// deletions and reversals; applies the best strictly improving move until
/// none is left. Equal gains go to the smallest (kind, parent, child) with
/// kinds ordered add < delete < reverse.
Dag hill_climb(const std::vector<std::string>& names, LocalScorer& scorer, const SkeletonCandidates& candidates,
               std::optional<std::size_t> max_parents = std::nullopt, std::vector<double>* trace = nullptr);

struct LearnConfig {
  TestConfig test;
  ScoreSpec score;
  std::size_t max_conditioning = 3;
  std::optional<std::size_t> max_parents;
  std::uint64_t seed = 0;
};

std::vector<std::size_t> mmpc_node(const DiscreteDataset& data, std::size_t x, const LearnConfig& config);
SkeletonCandidates mmpc(const DiscreteDataset& data, const LearnConfig& config);
Dag hill_climb(const DiscreteDataset& data, const SkeletonCandidates& candidates, const LearnConfig& config);
/// Max-Min Hill-Climbing: hill_climb restricted to the mmpc skeleton.
Dag mmhc(const DiscreteDataset& data, const LearnConfig& config);

}  // namespace bnci
