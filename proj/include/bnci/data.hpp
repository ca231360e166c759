#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bnci {

using Level = std::uint16_t;
using Count = std::int64_t;

struct Variable {
  std::string name;
  std::vector<std::string> levels;
};

/// Discrete sample stored column-major as dense 0-based level indices.
/// Immutable after construction.
class DiscreteDataset {
 public:
  DiscreteDataset(std::vector<Variable> variables, std::vector<std::vector<Level>> columns);

  std::size_t n() const noexcept { return rows_; }
  std::size_t num_vars() const noexcept { return variables_.size(); }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const Variable& variable(std::size_t v) const { return variables_.at(v); }
  std::size_t levels(std::size_t v) const { return variables_.at(v).levels.size(); }
  std::span<const Level> column(std::size_t v) const { return columns_.at(v); }
  Level at(std::size_t row, std::size_t v) const { return columns_[v][row]; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Like index_of but throws an argument error naming the missing variable.
  std::size_t require(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<Variable> variables_;
  std::vector<std::vector<Level>> columns_;
  std::size_t rows_ = 0;
};

/// Parsed sidecar declarations: "variable:level1,level2,..." one per line.
using LevelDeclarations = std::map<std::string, std::vector<std::string>>;

LevelDeclarations parse_level_declarations(std::istream& in);

/// Reads a plain comma-separated file with a header row. Levels are taken
/// from `declared` when present for a variable, otherwise they are the
/// distinct values in first-appearance order.
DiscreteDataset load_csv(std::istream& in, const LevelDeclarations& declared = {});
DiscreteDataset load_csv_text(std::string_view text, const LevelDeclarations& declared = {});

void write_csv(const DiscreteDataset& data, std::ostream& out);

/// Observed counts n_ijk of X (rows i) and Y (columns j) across the observed
/// configurations k of a conditioning set. Storage is stratum-major so each
/// stratum is one contiguous R*C block.
class StratifiedTable {
 public:
  StratifiedTable(std::size_t rows, std::size_t cols, std::size_t strata, std::vector<Count> counts);

  std::size_t rows() const noexcept { return r_; }
  std::size_t cols() const noexcept { return c_; }
  std::size_t strata() const noexcept { return l_; }
  Count n() const noexcept { return n_; }

  Count count(std::size_t i, std::size_t j, std::size_t k) const { return counts_[(k * r_ + i) * c_ + j]; }
  std::span<const Count> counts() const noexcept { return counts_; }
  std::span<const Count> stratum_counts(std::size_t k) const {
    return std::span<const Count>(counts_).subspan(k * r_ * c_, r_ * c_);
  }

  Count row_margin(std::size_t i, std::size_t k) const;
  Count col_margin(std::size_t j, std::size_t k) const;
  Count stratum_total(std::size_t k) const;

  /// (R-1)(C-1)L.
  long degrees_of_freedom() const noexcept {
    return static_cast<long>((r_ - 1) * (c_ - 1) * l_);
  }

 private:
  std::size_t r_, c_, l_;
  std::vector<Count> counts_;
  Count n_ = 0;
};

/// One stratum with its margins and expected counts under independence.
struct StratumView {
  std::size_t k = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const Count> counts;
  std::vector<Count> row_margins;
  std::vector<Count> col_margins;
  Count total = 0;

  Count count(std::size_t i, std::size_t j) const { return counts[i * cols + j]; }
  /// m_ij = n_i+ n_+j / n_++ (0 for an empty stratum).
  double expected(std::size_t i, std::size_t j) const;
};

StratumView stratum_view(const StratifiedTable& tab, std::size_t k);

/// Cross-tabulates x against y within each observed configuration of z.
/// Empty strata are dropped; an empty z gives a single stratum. R and C are
/// the declared level counts.
StratifiedTable stratify(const DiscreteDataset& data, std::size_t x, std::size_t y,
                         std::span<const std::size_t> z);

}  // namespace bnci
