#include "bnci/data.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "bnci/error.hpp"

namespace bnci {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

DiscreteDataset::DiscreteDataset(std::vector<Variable> variables, std::vector<std::vector<Level>> columns)
    : variables_(std::move(variables)), columns_(std::move(columns)) {
  if (variables_.size() != columns_.size())
    fail(ErrorKind::argument, "dataset: variable and column counts differ");
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    const auto& var = variables_[v];
    if (var.levels.empty()) fail(ErrorKind::validation, "variable '" + var.name + "' has no levels");
    auto sorted = var.levels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      fail(ErrorKind::validation, "variable '" + var.name + "' has duplicate levels");
    if (var.levels.size() > std::numeric_limits<Level>::max())
      fail(ErrorKind::validation, "variable '" + var.name + "' has too many levels");
    if (columns_[v].size() != rows_) fail(ErrorKind::argument, "dataset: ragged columns");
    for (Level l : columns_[v])
      if (l >= var.levels.size())
        fail(ErrorKind::validation, "variable '" + var.name + "' has an out-of-range level index");
  }
  for (std::size_t a = 0; a < variables_.size(); ++a)
    for (std::size_t b = a + 1; b < variables_.size(); ++b)
      if (variables_[a].name == variables_[b].name)
        fail(ErrorKind::validation, "duplicate variable name '" + variables_[a].name + "'");
}

std::optional<std::size_t> DiscreteDataset::index_of(std::string_view name) const {
  for (std::size_t v = 0; v < variables_.size(); ++v)
    if (variables_[v].name == name) return v;
  return std::nullopt;
}

std::size_t DiscreteDataset::require(std::string_view name) const {
  if (auto v = index_of(name)) return *v;
  fail(ErrorKind::argument, "unknown variable '" + std::string(name) + "'");
}

std::vector<std::string> DiscreteDataset::names() const {
  std::vector<std::string> out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

LevelDeclarations parse_level_declarations(std::istream& in) {
  LevelDeclarations out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw FormatError(lineno, "expected 'variable:level1,level2,...'");
    std::string name(trim(std::string_view(line).substr(0, colon)));
    auto levels = split_fields(std::string_view(line).substr(colon + 1));
    if (name.empty() || levels.empty() || std::any_of(levels.begin(), levels.end(), [](auto& s) { return s.empty(); }))
      throw FormatError(lineno, "empty variable name or level label");
    if (!out.emplace(name, std::move(levels)).second) throw FormatError(lineno, "variable '" + name + "' declared twice");
  }
  return out;
}

DiscreteDataset load_csv(std::istream& in, const LevelDeclarations& declared) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw FormatError(lineno == 0 ? 1 : lineno, "missing header");

  std::vector<Variable> vars(header.size());
  std::vector<std::unordered_map<std::string, Level>> lookup(header.size());
  std::vector<bool> fixed(header.size(), false);
  for (std::size_t v = 0; v < header.size(); ++v) {
    if (header[v].empty()) throw FormatError(lineno, "empty column name");
    vars[v].name = header[v];
    if (auto it = declared.find(header[v]); it != declared.end()) {
      vars[v].levels = it->second;
      fixed[v] = true;
      for (std::size_t l = 0; l < it->second.size(); ++l) lookup[v].emplace(it->second[l], static_cast<Level>(l));
    }
  }

  std::vector<std::vector<Level>> columns(header.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw FormatError(lineno, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    for (std::size_t v = 0; v < fields.size(); ++v) {
      auto& map = lookup[v];
      auto it = map.find(fields[v]);
      if (it == map.end()) {
        if (fixed[v])
          throw FormatError(lineno, "value '" + fields[v] + "' is not a declared level of '" + vars[v].name + "'");
        if (fields[v].empty()) throw FormatError(lineno, "missing value for '" + vars[v].name + "'");
        it = map.emplace(fields[v], static_cast<Level>(vars[v].levels.size())).first;
        vars[v].levels.push_back(fields[v]);
      }
      columns[v].push_back(it->second);
    }
  }
  if (columns.front().empty()) throw FormatError(lineno, "dataset has no rows");
  return DiscreteDataset(std::move(vars), std::move(columns));
}

DiscreteDataset load_csv_text(std::string_view text, const LevelDeclarations& declared) {
  std::istringstream in{std::string(text)};
  return load_csv(in, declared);
}

void write_csv(const DiscreteDataset& data, std::ostream& out) {
  for (std::size_t v = 0; v < data.num_vars(); ++v) out << (v ? "," : "") << data.variable(v).name;
  out << '\n';
  for (std::size_t r = 0; r < data.n(); ++r) {
    for (std::size_t v = 0; v < data.num_vars(); ++v)
      out << (v ? "," : "") << data.variable(v).levels[data.at(r, v)];
    out << '\n';
  }
}

StratifiedTable::StratifiedTable(std::size_t rows, std::size_t cols, std::size_t strata, std::vector<Count> counts)
    : r_(rows), c_(cols), l_(strata), counts_(std::move(counts)) {
  if (r_ == 0 || c_ == 0 || l_ == 0) fail(ErrorKind::argument, "table dimensions must be positive");
  if (counts_.size() != r_ * c_ * l_) fail(ErrorKind::argument, "table count vector has the wrong size");
  for (Count c : counts_) {
    if (c < 0) fail(ErrorKind::argument, "table counts must be non-negative");
    n_ += c;
  }
}

Count StratifiedTable::row_margin(std::size_t i, std::size_t k) const {
  Count s = 0;
  for (std::size_t j = 0; j < c_; ++j) s += count(i, j, k);
  return s;
}

Count StratifiedTable::col_margin(std::size_t j, std::size_t k) const {
  Count s = 0;
  for (std::size_t i = 0; i < r_; ++i) s += count(i, j, k);
  return s;
}

Count StratifiedTable::stratum_total(std::size_t k) const {
  auto block = stratum_counts(k);
  return std::accumulate(block.begin(), block.end(), Count{0});
}

double StratumView::expected(std::size_t i, std::size_t j) const {
  if (total == 0) return 0.0;
  return static_cast<double>(row_margins[i]) * static_cast<double>(col_margins[j]) / static_cast<double>(total);
}

StratumView stratum_view(const StratifiedTable& tab, std::size_t k) {
  if (k >= tab.strata()) fail(ErrorKind::argument, "stratum index out of range");
  StratumView v;
  v.k = k;
  v.rows = tab.rows();
  v.cols = tab.cols();
  v.counts = tab.stratum_counts(k);
  v.row_margins.assign(v.rows, 0);
  v.col_margins.assign(v.cols, 0);
  for (std::size_t i = 0; i < v.rows; ++i)
    for (std::size_t j = 0; j < v.cols; ++j) {
      Count c = v.count(i, j);
      v.row_margins[i] += c;
      v.col_margins[j] += c;
      v.total += c;
    }
  return v;
}

StratifiedTable stratify(const DiscreteDataset& data, std::size_t x, std::size_t y, std::span<const std::size_t> z) {
  const std::size_t nv = data.num_vars();
  if (x >= nv || y >= nv) fail(ErrorKind::argument, "stratify: variable index out of range");
  if (x == y) fail(ErrorKind::argument, "stratify: x and y must differ");
  for (std::size_t a = 0; a < z.size(); ++a) {
    if (z[a] >= nv) fail(ErrorKind::argument, "stratify: conditioning index out of range");
    if (z[a] == x || z[a] == y) fail(ErrorKind::argument, "stratify: conditioning set overlaps x or y");
    for (std::size_t b = a + 1; b < z.size(); ++b)
      if (z[a] == z[b]) fail(ErrorKind::argument, "stratify: repeated conditioning variable");
  }

  const std::size_t n = data.n();
  const std::size_t r = data.levels(x), c = data.levels(y);

  // Mixed-radix code of the z configuration, first variable fastest.
  std::uint64_t configs = 1;
  for (std::size_t v : z) {
    std::uint64_t lv = data.levels(v);
    if (configs > (std::uint64_t{1} << 62) / lv) fail(ErrorKind::argument, "stratify: conditioning set too large");
    configs *= lv;
  }
  std::vector<std::uint64_t> code(n, 0);
  std::uint64_t radix = 1;
  for (std::size_t v : z) {
    auto col = data.column(v);
    for (std::size_t row = 0; row < n; ++row) code[row] += radix * col[row];
    radix *= data.levels(v);
  }

  // Observed configurations in ascending code order, so the layout does not
  // depend on row order.
  std::vector<std::size_t> stratum_of(n);
  std::size_t strata = 0;
  if (configs <= (std::uint64_t{1} << 20)) {
    std::vector<std::int64_t> index(configs, -1);
    for (std::uint64_t cd : code) index[cd] = 0;
    for (auto& slot : index)
      if (slot == 0) slot = static_cast<std::int64_t>(strata++);
    for (std::size_t row = 0; row < n; ++row) stratum_of[row] = static_cast<std::size_t>(index[code[row]]);
  } else {
    std::vector<std::uint64_t> distinct = code;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    strata = distinct.size();
    for (std::size_t row = 0; row < n; ++row)
      stratum_of[row] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), code[row]) -
                                                 distinct.begin());
  }
  if (strata == 0) strata = 1;  // zero-row input: one empty stratum

  std::vector<Count> counts(r * c * strata, 0);
  auto xc = data.column(x), yc = data.column(y);
  for (std::size_t row = 0; row < n; ++row) ++counts[(stratum_of[row] * r + xc[row]) * c + yc[row]];
  return StratifiedTable(r, c, strata, std::move(counts));
}

}  // namespace bnci
