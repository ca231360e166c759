#include "bnci/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "bnci/error.hpp"
#include "bnci/random.hpp"

namespace bnci {

BayesNet::BayesNet(std::string name, std::vector<Variable> variables, std::vector<Cpt> cpts, double row_tolerance)
    : name_(std::move(name)), variables_(std::move(variables)), cpts_(std::move(cpts)) {
  if (variables_.empty()) fail(ErrorKind::validation, "network has no variables");
  if (cpts_.size() != variables_.size()) fail(ErrorKind::validation, "one CPT per variable is required");
  std::vector<std::string> names;
  for (const auto& v : variables_) {
    if (v.levels.empty()) fail(ErrorKind::validation, "variable '" + v.name + "' has no levels");
    names.push_back(v.name);
  }
  dag_ = Dag(names);
  for (std::size_t v = 0; v < size(); ++v) {
    for (std::size_t p : cpts_[v].parents) {
      if (p >= size()) fail(ErrorKind::validation, "CPT of '" + names[v] + "' names an unknown parent");
      try {
        dag_.add_arc(p, v);
      } catch (const Error& e) {
        fail(ErrorKind::validation, e.what());
      }
    }
    const std::size_t r = levels(v), q = configurations(v);
    auto& probs = cpts_[v].probs;
    if (probs.size() != q * r)
      fail(ErrorKind::validation, "CPT of '" + names[v] + "' has " + std::to_string(probs.size()) +
                                      " entries, expected " + std::to_string(q * r));
    for (std::size_t j = 0; j < q; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        double p = probs[j * r + k];
        if (!(p >= 0.0) || !std::isfinite(p))
          fail(ErrorKind::validation, "CPT of '" + names[v] + "' has a negative or non-finite entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > row_tolerance)
        fail(ErrorKind::validation, "CPT row " + std::to_string(j) + " of '" + names[v] + "' sums to " +
                                        std::to_string(sum));
      if (std::abs(sum - 1.0) > 1e-10)
        for (std::size_t k = 0; k < r; ++k) probs[j * r + k] /= sum;
    }
  }
}

std::size_t BayesNet::configurations(std::size_t v) const {
  std::size_t q = 1;
  for (std::size_t p : cpts_.at(v).parents) q *= levels(p);
  return q;
}

std::size_t BayesNet::free_parameters() const {
  std::size_t d = 0;
  for (std::size_t v = 0; v < size(); ++v) d += configurations(v) * (levels(v) - 1);
  return d;
}

// ---------------------------------------------------------------------------
// BIF reader

namespace {

struct Token {
  std::string text;
  std::size_t line = 0;
  bool punct = false;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t line = 1, i = 0;
  auto is_punct = [](char c) {
    return c == '{' || c == '}' || c == '(' || c == ')' || c == '[' || c == ']' || c == ';' || c == ',' || c == '|';
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      i += 2;
      while (i + 1 < s.size() && !(s[i] == '*' && s[i + 1] == '/')) line += s[i++] == '\n';
      i += 2;
    } else if (is_punct(c)) {
      out.push_back({std::string(1, c), line, true});
      ++i;
    } else {
      std::size_t start = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && !is_punct(s[i])) ++i;
      out.push_back({std::string(s.substr(start, i - start)), line, false});
    }
  }
  return out;
}

class BifParser {
 public:
  explicit BifParser(std::string_view text) : tokens_(tokenize(text)) {}

  BayesNet parse() {
    while (!at_end()) {
      const Token& t = next();
      if (t.text == "network") {
        parse_network();
      } else if (t.text == "variable") {
        parse_variable();
      } else if (t.text == "probability") {
        parse_probability();
      } else {
        error(t, "unexpected '" + t.text + "'");
      }
    }
    if (vars_.empty()) fail(ErrorKind::parse, "BIF: no variables declared");
    std::vector<Cpt> cpts(vars_.size());
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      if (!cpts_[v]) fail(ErrorKind::validation, "BIF: no probability block for '" + vars_[v].name + "'");
      cpts[v] = std::move(*cpts_[v]);
    }
    return BayesNet(name_, std::move(vars_), std::move(cpts), 1e-6);
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::string name_ = "unknown";
  std::vector<Variable> vars_;
  std::vector<std::optional<Cpt>> cpts_;
  std::map<std::string, std::size_t> index_;

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const {
    if (at_end()) fail(ErrorKind::parse, "BIF: unexpected end of input");
    return tokens_[pos_];
  }
  const Token& next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  [[noreturn]] static void error(const Token& t, const std::string& what) {
    fail(ErrorKind::parse, "BIF line " + std::to_string(t.line) + ": " + what);
  }
  void expect(std::string_view text) {
    const Token& t = next();
    if (t.text != text) error(t, "expected '" + std::string(text) + "', found '" + t.text + "'");
  }
  std::string word() {
    const Token& t = next();
    if (t.punct) error(t, "expected a name, found '" + t.text + "'");
    return t.text;
  }
  void skip_to_semicolon() {
    while (next().text != ";") {
    }
  }
  double number() {
    const Token& t = next();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) error(t, "expected a number, found '" + t.text + "'");
    return v;
  }
  // Numbers up to ';', separated by commas and/or whitespace.
  std::vector<double> numbers() {
    std::vector<double> out;
    while (peek().text != ";") {
      if (peek().text == ",") {
        ++pos_;
        continue;
      }
      out.push_back(number());
    }
    ++pos_;
    return out;
  }
  std::size_t lookup(const Token& t) {
    auto it = index_.find(t.text);
    if (it == index_.end()) error(t, "undeclared variable '" + t.text + "'");
    return it->second;
  }

  void parse_network() {
    std::string name;
    while (peek().text != "{") name += (name.empty() ? "" : " ") + next().text;
    if (!name.empty()) name_ = name;
    expect("{");
    int depth = 1;
    while (depth > 0) {
      const Token& t = next();
      if (t.text == "{") ++depth;
      if (t.text == "}") --depth;
    }
  }

  void parse_variable() {
    const Token& name_tok = peek();
    std::string name = word();
    if (index_.count(name)) error(name_tok, "variable '" + name + "' declared twice");
    expect("{");
    Variable var{name, {}};
    bool typed = false;
    while (peek().text != "}") {
      const Token& t = next();
      if (t.text == "type") {
        expect("discrete");
        expect("[");
        const Token& count_tok = peek();
        double declared = number();
        expect("]");
        expect("{");
        while (peek().text != "}") {
          if (peek().text == ",") {
            ++pos_;
            continue;
          }
          var.levels.push_back(word());
        }
        ++pos_;
        expect(";");
        if (declared != static_cast<double>(var.levels.size()))
          error(count_tok, "declared " + count_tok.text + " levels but listed " + std::to_string(var.levels.size()));
        typed = true;
      } else if (t.text == "property") {
        skip_to_semicolon();
      } else {
        error(t, "unexpected '" + t.text + "' in variable block");
      }
    }
    ++pos_;
    if (!typed) error(name_tok, "variable '" + name + "' has no discrete type");
    index_[name] = vars_.size();
    vars_.push_back(std::move(var));
    cpts_.emplace_back();
  }

  void parse_probability() {
    expect("(");
    const Token& child_tok = peek();
    std::size_t child = lookup(next());
    Cpt cpt;
    if (peek().text == "|") {
      ++pos_;
      while (peek().text != ")") {
        if (peek().text == ",") {
          ++pos_;
          continue;
        }
        cpt.parents.push_back(lookup(next()));
      }
    }
    expect(")");
    if (cpts_[child]) error(child_tok, "second probability block for '" + vars_[child].name + "'");

    const std::size_t r = vars_[child].levels.size();
    std::size_t q = 1;
    for (std::size_t p : cpt.parents) q *= vars_[p].levels.size();
    std::vector<double> probs(q * r, std::numeric_limits<double>::quiet_NaN());
    std::optional<std::vector<double>> fallback;

    expect("{");
    while (peek().text != "}") {
      const Token& t = peek();
      if (t.text == "table") {
        ++pos_;
        auto values = numbers();
        if (values.size() != q * r)
          error(t, "table for '" + vars_[child].name + "' has " + std::to_string(values.size()) + " values, expected " +
                       std::to_string(q * r));
        probs = std::move(values);
      } else if (t.text == "default") {
        ++pos_;
        auto values = numbers();
        if (values.size() != r) error(t, "default row has the wrong length");
        fallback = std::move(values);
      } else if (t.text == "property") {
        ++pos_;
        skip_to_semicolon();
      } else if (t.text == "(") {
        ++pos_;
        std::size_t config = 0, stride = 1, idx = 0;
        while (peek().text != ")") {
          if (peek().text == ",") {
            ++pos_;
            continue;
          }
          const Token& lt = next();
          if (idx >= cpt.parents.size()) error(lt, "too many parent levels in row label");
          const auto& levels = vars_[cpt.parents[idx]].levels;
          auto it = std::find(levels.begin(), levels.end(), lt.text);
          if (it == levels.end()) error(lt, "'" + lt.text + "' is not a level of '" + vars_[cpt.parents[idx]].name + "'");
          config += stride * static_cast<std::size_t>(it - levels.begin());
          stride *= levels.size();
          ++idx;
        }
        ++pos_;
        if (idx != cpt.parents.size()) error(t, "row label lists the wrong number of parent levels");
        auto values = numbers();
        if (values.size() != r) error(t, "row has " + std::to_string(values.size()) + " values, expected " + std::to_string(r));
        std::copy(values.begin(), values.end(), probs.begin() + static_cast<std::ptrdiff_t>(config * r));
      } else {
        error(t, "unexpected '" + t.text + "' in probability block");
      }
    }
    ++pos_;

    for (std::size_t j = 0; j < q; ++j) {
      if (!std::isnan(probs[j * r])) continue;
      if (!fallback) error(child_tok, "probability block for '" + vars_[child].name + "' misses a configuration");
      std::copy(fallback->begin(), fallback->end(), probs.begin() + static_cast<std::ptrdiff_t>(j * r));
    }
    cpt.probs = std::move(probs);
    cpts_[child] = std::move(cpt);
  }
};

std::string format_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", p);
  return buf;
}

}  // namespace

BayesNet parse_bif(std::string_view text) { return BifParser(text).parse(); }

BayesNet read_bif(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_bif(text);
}

std::string emit_bif(const BayesNet& net) {
  if (net.size() == 0) fail(ErrorKind::validation, "cannot emit a network without variables");
  std::ostringstream out;
  out << "network " << net.name() << " {\n}\n";
  for (const auto& v : net.variables()) {
    out << "variable " << v.name << " {\n  type discrete [ " << v.levels.size() << " ] { ";
    for (std::size_t l = 0; l < v.levels.size(); ++l) out << (l ? ", " : "") << v.levels[l];
    out << " };\n}\n";
  }
  for (std::size_t v = 0; v < net.size(); ++v) {
    const Cpt& cpt = net.cpt(v);
    const std::size_t r = net.levels(v), q = net.configurations(v);
    out << "probability ( " << net.variable(v).name;
    for (std::size_t p = 0; p < cpt.parents.size(); ++p)
      out << (p ? ", " : " | ") << net.variable(cpt.parents[p]).name;
    out << " ) {\n";
    auto row = [&](std::size_t j) {
      for (std::size_t k = 0; k < r; ++k) out << (k ? ", " : "") << format_prob(cpt.probs[j * r + k]);
      out << ";\n";
    };
    if (cpt.parents.empty()) {
      out << "  table ";
      row(0);
    } else {
      for (std::size_t j = 0; j < q; ++j) {
        out << "  (";
        std::size_t rest = j;
        for (std::size_t p = 0; p < cpt.parents.size(); ++p) {
          const auto& levels = net.variable(cpt.parents[p]).levels;
          out << (p ? ", " : "") << levels[rest % levels.size()];
          rest /= levels.size();
        }
        out << ") ";
        row(j);
      }
    }
    out << "}\n";
  }
  return out.str();
}

DiscreteDataset forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed) {
  if (n == 0) fail(ErrorKind::argument, "forward_sample: n must be positive");
  const auto order = topological_order(net.dag());
  std::vector<std::vector<Level>> columns(net.size(), std::vector<Level>(n));
  Rng rng(seed);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t v : order) {
      const Cpt& cpt = net.cpt(v);
      std::size_t config = 0, stride = 1;
      for (std::size_t p : cpt.parents) {
        config += stride * columns[p][row];
        stride *= net.levels(p);
      }
      const std::size_t r = net.levels(v);
      const double* probs = cpt.probs.data() + config * r;
      const double u = uniform01(rng);
      double cum = 0.0;
      std::size_t level = r;
      std::size_t last_positive = 0;
      for (std::size_t k = 0; k < r; ++k) {
        if (probs[k] > 0.0) last_positive = k;
        cum += probs[k];
        if (u < cum && probs[k] > 0.0) {
          level = k;
          break;
        }
      }
      if (level == r) level = last_positive;
      columns[v][row] = static_cast<Level>(level);
    }
  }
  return DiscreteDataset(net.variables(), std::move(columns));
}

std::vector<std::size_t> align_columns(const std::vector<std::string>& names, const DiscreteDataset& data) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& name : names) out.push_back(data.require(name));
  return out;
}

BayesNet fit_mle(const Dag& dag, const DiscreteDataset& data) {
  const auto cols = align_columns(dag.names(), data);
  std::vector<Variable> vars;
  std::vector<Cpt> cpts;
  for (std::size_t v = 0; v < dag.size(); ++v) {
    vars.push_back(data.variable(cols[v]));
    Cpt cpt;
    cpt.parents = dag.parents(v);
    const std::size_t r = data.levels(cols[v]);
    std::size_t q = 1;
    for (std::size_t p : cpt.parents) q *= data.levels(cols[p]);
    std::vector<double> counts(q * r, 0.0);
    auto child = data.column(cols[v]);
    for (std::size_t row = 0; row < data.n(); ++row) {
      std::size_t config = 0, stride = 1;
      for (std::size_t p : cpt.parents) {
        config += stride * data.at(row, cols[p]);
        stride *= data.levels(cols[p]);
      }
      counts[config * r + child[row]] += 1.0;
    }
    for (std::size_t j = 0; j < q; ++j) {
      double total = 0.0;
      for (std::size_t k = 0; k < r; ++k) total += counts[j * r + k];
      for (std::size_t k = 0; k < r; ++k)
        counts[j * r + k] = total > 0.0 ? counts[j * r + k] / total : 1.0 / static_cast<double>(r);
    }
    cpt.probs = std::move(counts);
    cpts.push_back(std::move(cpt));
  }
  return BayesNet("fitted", std::move(vars), std::move(cpts));
}

double log_likelihood(const BayesNet& net, const DiscreteDataset& data) {
  std::vector<std::string> names;
  for (const auto& v : net.variables()) names.push_back(v.name);
  const auto cols = align_columns(names, data);
  // data level index -> net level index
  std::vector<std::vector<std::size_t>> level_map(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) {
    const auto& net_levels = net.variable(v).levels;
    for (const auto& label : data.variable(cols[v]).levels) {
      auto it = std::find(net_levels.begin(), net_levels.end(), label);
      if (it == net_levels.end())
        fail(ErrorKind::argument, "level '" + label + "' of '" + names[v] + "' is unknown to the network");
      level_map[v].push_back(static_cast<std::size_t>(it - net_levels.begin()));
    }
  }
  double ll = 0.0;
  for (std::size_t row = 0; row < data.n(); ++row)
    for (std::size_t v = 0; v < net.size(); ++v) {
      const Cpt& cpt = net.cpt(v);
      std::size_t config = 0, stride = 1;
      for (std::size_t p : cpt.parents) {
        config += stride * level_map[p][data.at(row, cols[p])];
        stride *= net.levels(p);
      }
      double p = net.probability(v, config, level_map[v][data.at(row, cols[v])]);
      if (p <= 0.0) return -std::numeric_limits<double>::infinity();
      ll += std::log(p);
    }
  return ll;
}

}  // namespace bnci
