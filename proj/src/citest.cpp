#include "bnci/citest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "bnci/error.hpp"

namespace bnci {

namespace {

constexpr std::string_view kMethodNames[] = {"mi", "x2", "mi_perm", "x2_perm", "mi_shrink"};

/// Per-stratum margins and cached logs, shared by the observed table and all
/// of its permutations (the margins are invariant under permutation).
struct StratumMargins {
  std::size_t rows = 0, cols = 0;
  std::vector<Count> row;
  std::vector<Count> col;
  Count total = 0;
  std::vector<double> log_row;
  std::vector<double> log_col;
  double log_total = 0.0;

  StratumMargins(const StratifiedTable& tab, std::size_t k) : rows(tab.rows()), cols(tab.cols()) {
    StratumView v = stratum_view(tab, k);
    row = std::move(v.row_margins);
    col = std::move(v.col_margins);
    total = v.total;
    log_row.resize(rows);
    log_col.resize(cols);
    for (std::size_t i = 0; i < rows; ++i) log_row[i] = row[i] > 0 ? std::log(static_cast<double>(row[i])) : 0.0;
    for (std::size_t j = 0; j < cols; ++j) log_col[j] = col[j] > 0 ? std::log(static_cast<double>(col[j])) : 0.0;
    log_total = total > 0 ? std::log(static_cast<double>(total)) : 0.0;
  }
};

// Sum over one stratum of n_ij * log(n_ij n_++ / (n_i+ n_+j)); zero cells add 0.
double log_ratio_sum(const Count* cells, const StratumMargins& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) {
      Count c = cells[i * m.cols + j];
      if (c == 0) continue;
      double dc = static_cast<double>(c);
      s += dc * (std::log(dc) + m.log_total - m.log_row[i] - m.log_col[j]);
    }
  return s;
}

// Pearson sum over one stratum; cells with zero expectation add 0.
double pearson_sum(const Count* cells, const StratumMargins& m) {
  if (m.total == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) {
      double e = static_cast<double>(m.row[i]) * static_cast<double>(m.col[j]) / static_cast<double>(m.total);
      if (e <= 0.0) continue;
      double d = static_cast<double>(cells[i * m.cols + j]) - e;
      s += d * d / e;
    }
  return s;
}

std::vector<StratumMargins> all_margins(const StratifiedTable& tab) {
  std::vector<StratumMargins> out;
  out.reserve(tab.strata());
  for (std::size_t k = 0; k < tab.strata(); ++k) out.emplace_back(tab, k);
  return out;
}

// The value compared across replicates: mutual information or Pearson X^2.
double statistic_of(std::span<const Count> counts, const std::vector<StratumMargins>& margins, Statistic stat,
                    Count n) {
  const std::size_t block = margins.empty() ? 0 : margins.front().rows * margins.front().cols;
  double s = 0.0;
  for (std::size_t k = 0; k < margins.size(); ++k) {
    const Count* cells = counts.data() + k * block;
    s += stat == Statistic::mi ? log_ratio_sum(cells, margins[k]) : pearson_sum(cells, margins[k]);
  }
  if (stat == Statistic::mi) s = n > 0 ? s / static_cast<double>(n) : 0.0;
  return std::max(s, 0.0);
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Number of successes in `draws` draws without replacement from `population`
// items of which `successes` are marked. Inverse transform started at the
// mode and walking outwards, so the expected cost is O(standard deviation).
Count hypergeometric(Count population, Count successes, Count draws, Rng& rng) {
  const Count lo = std::max<Count>(0, draws - (population - successes));
  const Count hi = std::min(draws, successes);
  if (lo >= hi) return lo;

  const double N = static_cast<double>(population), K = static_cast<double>(successes),
               m = static_cast<double>(draws);
  Count mode = static_cast<Count>(std::floor((m + 1.0) * (K + 1.0) / (N + 2.0)));
  mode = std::clamp(mode, lo, hi);
  auto pmf_ratio_up = [&](Count k) {  // p(k+1) / p(k)
    double dk = static_cast<double>(k);
    return (K - dk) * (m - dk) / ((dk + 1.0) * (N - K - m + dk + 1.0));
  };
  const double dmode = static_cast<double>(mode);
  const double p_mode = std::exp(log_choose(K, dmode) + log_choose(N - K, m - dmode) - log_choose(N, m));

  double u = uniform01(rng) - p_mode;
  if (u < 0.0) return mode;
  Count down = mode, up = mode;
  double p_down = p_mode, p_up = p_mode;
  while (down > lo || up < hi) {
    if (up < hi) {
      p_up *= pmf_ratio_up(up);
      ++up;
      u -= p_up;
      if (u < 0.0) return up;
    }
    if (down > lo) {
      p_down /= pmf_ratio_up(down - 1);
      --down;
      u -= p_down;
      if (u < 0.0) return down;
    }
  }
  return mode;  // u exceeded the accumulated mass by rounding
}

void permute_hypergeometric(const StratumView& v, Rng& rng, Count* out) {
  const std::size_t R = v.rows, C = v.cols;
  std::vector<Count> col_left(v.col_margins);
  Count total_left = v.total;
  for (std::size_t i = 0; i + 1 < R; ++i) {
    Count need = v.row_margins[i];
    Count pool = total_left;
    for (std::size_t j = 0; j + 1 < C; ++j) {
      Count x = hypergeometric(pool, col_left[j], need, rng);
      out[i * C + j] = x;
      need -= x;
      pool -= col_left[j];
      col_left[j] -= x;
    }
    out[i * C + C - 1] = need;
    col_left[C - 1] -= need;
    total_left -= v.row_margins[i];
  }
  for (std::size_t j = 0; j < C; ++j) out[(R - 1) * C + j] = col_left[j];
}

void permute_shuffle(const StratumView& v, Rng& rng, Count* out) {
  const std::size_t C = v.cols;
  std::vector<std::size_t> col_labels;
  col_labels.reserve(static_cast<std::size_t>(v.total));
  for (std::size_t j = 0; j < C; ++j) col_labels.insert(col_labels.end(), static_cast<std::size_t>(v.col_margins[j]), j);
  std::shuffle(col_labels.begin(), col_labels.end(), rng);
  std::fill(out, out + v.rows * C, Count{0});
  std::size_t pos = 0;
  for (std::size_t i = 0; i < v.rows; ++i)
    for (Count t = 0; t < v.row_margins[i]; ++t) ++out[i * C + col_labels[pos++]];
}

TestOutcome degenerate(Method method, long df) {
  TestOutcome out;
  out.statistic = 0.0;
  out.df = df;
  out.p_value = 1.0;
  out.method = method;
  return out;
}

}  // namespace

std::string_view to_string(Method m) { return kMethodNames[static_cast<int>(m)]; }

Method parse_method(std::string_view tag) {
  for (int i = 0; i < 5; ++i)
    if (kMethodNames[i] == tag) return static_cast<Method>(i);
  fail(ErrorKind::config, "unknown test method '" + std::string(tag) + "'");
}

double mutual_information(const StratifiedTable& tab) {
  return statistic_of(tab.counts(), all_margins(tab), Statistic::mi, tab.n());
}

double g2_statistic(const StratifiedTable& tab) { return 2.0 * static_cast<double>(tab.n()) * mutual_information(tab); }

double pearson_x2(const StratifiedTable& tab) {
  return statistic_of(tab.counts(), all_margins(tab), Statistic::x2, tab.n());
}

double chisq_survival(double x, long df) {
  if (!(x >= 0.0)) fail(ErrorKind::argument, "chisq_survival: x must be non-negative");
  if (df <= 0) fail(ErrorKind::argument, "chisq_survival: df must be positive");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

TestOutcome asymptotic_test(const StratifiedTable& tab, Statistic stat) {
  const Method method = stat == Statistic::mi ? Method::mi : Method::x2;
  const long df = tab.degrees_of_freedom();
  if (df == 0) return degenerate(method, df);
  TestOutcome out;
  out.method = method;
  out.df = df;
  out.statistic = stat == Statistic::mi ? g2_statistic(tab) : pearson_x2(tab);
  out.p_value = chisq_survival(out.statistic, df);
  return out;
}

std::vector<Count> permute_stratum(const StratumView& view, Rng& rng, PermuteAlgorithm algorithm) {
  std::vector<Count> out(view.rows * view.cols, 0);
  if (view.total == 0) return out;
  if (algorithm == PermuteAlgorithm::hypergeometric)
    permute_hypergeometric(view, rng, out.data());
  else
    permute_shuffle(view, rng, out.data());
  return out;
}

TestOutcome permutation_test(const StratifiedTable& tab, Statistic stat, const PermutationPlan& plan,
                             PermuteAlgorithm algorithm) {
  if (plan.replicates < 1) fail(ErrorKind::argument, "permutation_test: at least one replicate is required");
  const Method method = stat == Statistic::mi ? Method::mi_perm : Method::x2_perm;
  const long df = tab.degrees_of_freedom();
  if (df == 0) {
    TestOutcome out = degenerate(method, df);
    out.permutations_used = 0;
    return out;
  }

  const auto margins = all_margins(tab);
  std::vector<StratumView> views;
  views.reserve(tab.strata());
  for (std::size_t k = 0; k < tab.strata(); ++k) views.push_back(stratum_view(tab, k));

  const double observed = statistic_of(tab.counts(), margins, stat, tab.n());
  // Ties are decided up to summation-order rounding.
  const double threshold = observed - (1e-9 * observed + 1e-12);

  const std::size_t block = tab.rows() * tab.cols();
  std::vector<Count> permuted(tab.counts().size());
  long hits = 0;
  for (long r = 0; r < plan.replicates; ++r) {
    Rng rng(derive_seed({plan.seed, static_cast<std::uint64_t>(r)}));
    for (std::size_t k = 0; k < views.size(); ++k) {
      Count* dst = permuted.data() + k * block;
      if (views[k].total == 0) {
        std::fill(dst, dst + block, Count{0});
      } else if (algorithm == PermuteAlgorithm::hypergeometric) {
        permute_hypergeometric(views[k], rng, dst);
      } else {
        permute_shuffle(views[k], rng, dst);
      }
    }
    if (statistic_of(permuted, margins, stat, tab.n()) >= threshold) ++hits;
  }

  TestOutcome out;
  out.method = method;
  out.df = df;
  out.statistic = stat == Statistic::mi ? 2.0 * static_cast<double>(tab.n()) * observed : observed;
  out.p_value = static_cast<double>(hits) / static_cast<double>(plan.replicates);
  out.permutations_used = plan.replicates;
  return out;
}

double shrinkage_lambda(std::span<const Count> cells, std::span<const double> target) {
  if (cells.empty()) fail(ErrorKind::argument, "shrinkage_lambda: no cells");
  if (!target.empty() && target.size() != cells.size())
    fail(ErrorKind::argument, "shrinkage_lambda: target size does not match the table");
  Count n = 0;
  for (Count c : cells) n += c;
  if (n <= 1) return 1.0;

  double lambda;
  if (target.empty()) {
    // Uniform target: with S = sum n_i^2 and K cells the estimator reduces to
    // K (n^2 - S) / ((n - 1)(K S - n^2)), all integers until the division.
    long double S = 0.0L;
    for (Count c : cells) S += static_cast<long double>(c) * static_cast<long double>(c);
    const long double K = static_cast<long double>(cells.size());
    const long double nn = static_cast<long double>(n) * static_cast<long double>(n);
    const long double den = static_cast<long double>(n - 1) * (K * S - nn);
    if (den <= 0.0L) return 1.0;
    lambda = static_cast<double>(K * (nn - S) / den);
  } else {
    const double dn = static_cast<double>(n);
    double sum_sq = 0.0, dist = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double p = static_cast<double>(cells[i]) / dn;
      sum_sq += p * p;
      dist += (target[i] - p) * (target[i] - p);
    }
    if (dist == 0.0) return 1.0;
    lambda = (1.0 - sum_sq) / ((dn - 1.0) * dist);
  }
  return std::clamp(lambda, 0.0, 1.0);
}

double shrinkage_lambda(const StratifiedTable& tab, const ShrinkageSpec& spec) {
  return shrinkage_lambda(tab.counts(), spec.target);
}

double mutual_information_of(std::span<const double> probs, std::size_t rows, std::size_t cols, std::size_t strata) {
  if (probs.size() != rows * cols * strata) fail(ErrorKind::argument, "mutual_information_of: size mismatch");
  double s = 0.0;
  std::vector<double> row(rows), col(cols);
  for (std::size_t k = 0; k < strata; ++k) {
    const double* p = probs.data() + k * rows * cols;
    std::fill(row.begin(), row.end(), 0.0);
    std::fill(col.begin(), col.end(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) {
        row[i] += p[i * cols + j];
        col[j] += p[i * cols + j];
        total += p[i * cols + j];
      }
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) {
        double v = p[i * cols + j];
        if (v > 0.0) s += v * std::log(v * total / (row[i] * col[j]));
      }
  }
  return std::max(s, 0.0);
}

TestOutcome shrinkage_mi_test(const StratifiedTable& tab, const ShrinkageSpec& spec) {
  const std::size_t cells = tab.counts().size();
  if (!spec.target.empty()) {
    if (spec.target.size() != cells) fail(ErrorKind::argument, "shrinkage target size does not match the table");
    double sum = 0.0;
    for (double t : spec.target) {
      if (t < 0.0) fail(ErrorKind::argument, "shrinkage target has a negative entry");
      sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(ErrorKind::argument, "shrinkage target does not sum to 1");
  }
  double lambda;
  if (spec.lambda_override) {
    lambda = *spec.lambda_override;
    if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorKind::argument, "lambda override must lie in [0, 1]");
  } else {
    lambda = shrinkage_lambda(tab, spec);
  }

  const long df = tab.degrees_of_freedom();
  TestOutcome out;
  out.method = Method::mi_shrink;
  out.df = df;
  out.lambda = lambda;
  if (df == 0 || tab.n() == 0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }

  if (lambda == 0.0) {
    out.statistic = g2_statistic(tab);
  } else {
    const double n = static_cast<double>(tab.n());
    const double uniform = 1.0 / static_cast<double>(cells);
    std::vector<double> shrunk(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      double t = spec.target.empty() ? uniform : spec.target[c];
      shrunk[c] = lambda * t + (1.0 - lambda) * static_cast<double>(tab.counts()[c]) / n;
    }
    out.statistic = 2.0 * n * mutual_information_of(shrunk, tab.rows(), tab.cols(), tab.strata());
  }
  out.p_value = chisq_survival(out.statistic, df);
  return out;
}

TestOutcome run_test(const StratifiedTable& tab, const TestConfig& config) {
  switch (config.method) {
    case Method::mi: return asymptotic_test(tab, Statistic::mi);
    case Method::x2: return asymptotic_test(tab, Statistic::x2);
    case Method::mi_perm: return permutation_test(tab, Statistic::mi, config.permutation, config.permute_algorithm);
    case Method::x2_perm: return permutation_test(tab, Statistic::x2, config.permutation, config.permute_algorithm);
    case Method::mi_shrink: return shrinkage_mi_test(tab, config.shrinkage);
  }
  fail(ErrorKind::config, "unknown test method");
}

TestOutcome ci_test(const DiscreteDataset& data, std::size_t x, std::size_t y, std::span<const std::size_t> z,
                    const TestConfig& config) {
  return run_test(stratify(data, x, y, z), config);
}

}  // namespace bnci
