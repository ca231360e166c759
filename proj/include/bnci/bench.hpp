#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bnci/citest.hpp"
#include "bnci/network.hpp"
#include "bnci/score.hpp"

namespace bnci {

struct TestPair {
  Method alternative = Method::mi_perm;
  Method baseline = Method::mi;
};

/// One benchmark run: sample from the reference network, learn with each
/// test pair under each score, and compare against held-out data and the
/// true structure.
struct Protocol {
  std::string true_net;        // BIF path, relative to the protocol file
  bool alarm_signature = false;  // require 37 nodes, 46 arcs, 509 parameters
  std::vector<std::size_t> sample_sizes;
  std::size_t replicates = 50;
  std::size_t holdout_n = 20000;
  std::vector<TestPair> test_pairs;
  std::vector<double> alphas{0.05};
  std::vector<ScoreSpec> scores{{ScoreKind::bde, 10.0}, {ScoreKind::bic, 10.0}};
  long permutations = 5000;
  std::size_t max_conditioning = 3;
  std::uint64_t master_seed = 1;
};

/// Named grids: "permutation" (n in {200, 500, 1000, 5000}; mi_perm:mi and
/// x2_perm:x2) and "shrinkage" (n in {10, 20, 50, 100, 150, 200}; mi_shrink:mi).
Protocol protocol_preset(std::string_view name);

/// Flat "key = value" text; '#' starts a comment. See README for the keys.
Protocol parse_protocol(std::string_view text);
void validate(const Protocol& p);

enum class Indicator { bde_train, bic_train, bde_holdout, bic_holdout, shd };
std::string_view to_string(Indicator i);

struct BenchRecord {
  Method test = Method::mi_perm;
  Method baseline = Method::mi;
  ScoreKind score = ScoreKind::bde;
  double alpha = 0.05;
  std::size_t n = 0;
  std::size_t replicate = 0;
  Indicator indicator = Indicator::shd;
  double value_alt = 0.0;
  double value_base = 0.0;
  double rel_delta = 0.0;
  bool raw_difference = false;  // score baseline was 0, rel_delta holds alt - base
};

/// Relative improvement of the alternative over the baseline. Scores:
/// (alt - base) / |base|. SHD: (base - alt) / max(base, 1), negative when the
/// baseline is closer to the truth.
double rel_delta(double alt, double base, Indicator indicator);

/// Roles used to derive independent seed streams per replicate.
enum class SeedRole : std::uint64_t { train = 1, holdout = 2, permutation = 3, sampler = 4 };
std::uint64_t role_seed(std::uint64_t master, std::size_t n, std::size_t replicate, SeedRole role);

using Logger = std::function<void(const std::string&)>;

std::vector<BenchRecord> run_protocol(const Protocol& p, const BayesNet& truth, const Logger& log = {});
/// Loads `p.true_net` relative to `base_dir` and checks the ALARM signature
/// when requested.
std::vector<BenchRecord> run_protocol(const Protocol& p, const std::filesystem::path& base_dir,
                                      const Logger& log = {});

/// Sorted by (test, baseline, alpha, score, n, replicate, indicator).
void sort_records(std::vector<BenchRecord>& records);
/// Header: test,baseline,score,alpha,n,replicate,indicator,value_alt,value_base,rel_delta
void write_records_csv(const std::vector<BenchRecord>& records, std::ostream& out);

struct SummaryRow {
  Method test;
  Method baseline;
  ScoreKind score;
  double alpha;
  std::size_t n;
  Indicator indicator;
  std::size_t count;
  double min, q1, median, q3, max;
};

/// Box-plot statistics of rel_delta per (test, baseline, score, alpha, n,
/// indicator); quartiles use linear interpolation (type 7).
std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records);
double quantile_type7(std::vector<double> values, double prob);
/// `parameters` adds a ratio column n / parameters when non-zero.
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out, std::size_t parameters = 0);

}  // namespace bnci
