#include "bnci/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "bnci/error.hpp"
#include "bnci/learn.hpp"
#include "bnci/random.hpp"

namespace bnci {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  char extra;
  if (!(in >> out) || (in >> extra)) fail(ErrorKind::parse, "protocol: bad value '" + value + "' for '" + key + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  fail(ErrorKind::parse, "protocol: bad boolean '" + value + "' for '" + key + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

Protocol protocol_preset(std::string_view name) {
  Protocol p;
  if (name == "permutation") {
    p.sample_sizes = {200, 500, 1000, 5000};
    p.test_pairs = {{Method::mi_perm, Method::mi}, {Method::x2_perm, Method::x2}};
  } else if (name == "shrinkage") {
    p.sample_sizes = {10, 20, 50, 100, 150, 200};
    p.test_pairs = {{Method::mi_shrink, Method::mi}};
  } else {
    fail(ErrorKind::config, "unknown protocol preset '" + std::string(name) + "'");
  }
  p.alarm_signature = true;
  return p;
}

Protocol parse_protocol(std::string_view text) {
  // The preset, when given, applies first so that other keys override it.
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(lineno, "expected 'key = value'");
    entries.emplace_back(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
  }

  Protocol p;
  for (const auto& [key, value] : entries)
    if (key == "preset") p = protocol_preset(value);

  for (const auto& [key, value] : entries) {
    if (key == "preset") {
      continue;
    } else if (key == "true_net") {
      p.true_net = value;
    } else if (key == "alarm_signature") {
      p.alarm_signature = parse_bool(key, value);
    } else if (key == "sample_sizes") {
      p.sample_sizes.clear();
      for (const auto& s : split_list(value)) p.sample_sizes.push_back(parse_number<std::size_t>(key, s));
    } else if (key == "replicates") {
      p.replicates = parse_number<std::size_t>(key, value);
    } else if (key == "holdout_n") {
      p.holdout_n = parse_number<std::size_t>(key, value);
    } else if (key == "test_pairs") {
      p.test_pairs.clear();
      for (const auto& s : split_list(value)) {
        auto colon = s.find(':');
        if (colon == std::string::npos) fail(ErrorKind::parse, "protocol: test pair '" + s + "' is not 'alt:baseline'");
        p.test_pairs.push_back({parse_method(trim(s.substr(0, colon))), parse_method(trim(s.substr(colon + 1)))});
      }
    } else if (key == "alphas") {
      p.alphas.clear();
      for (const auto& s : split_list(value)) p.alphas.push_back(parse_number<double>(key, s));
    } else if (key == "scores") {
      const double ess = p.scores.empty() ? 10.0 : p.scores.front().ess;
      p.scores.clear();
      for (const auto& s : split_list(value)) p.scores.push_back({parse_score_kind(s), ess});
    } else if (key == "ess") {
      double ess = parse_number<double>(key, value);
      for (auto& s : p.scores) s.ess = ess;
    } else if (key == "permutations") {
      p.permutations = parse_number<long>(key, value);
    } else if (key == "max_conditioning") {
      p.max_conditioning = parse_number<std::size_t>(key, value);
    } else if (key == "master_seed") {
      p.master_seed = parse_number<std::uint64_t>(key, value);
    } else {
      fail(ErrorKind::parse, "protocol: unknown key '" + key + "'");
    }
  }
  validate(p);
  return p;
}

void validate(const Protocol& p) {
  if (p.replicates < 1) fail(ErrorKind::config, "protocol: replicates must be at least 1");
  if (p.sample_sizes.empty()) fail(ErrorKind::config, "protocol: no sample sizes");
  for (std::size_t i = 0; i < p.sample_sizes.size(); ++i) {
    if (p.sample_sizes[i] == 0) fail(ErrorKind::config, "protocol: sample sizes must be positive");
    if (i > 0 && p.sample_sizes[i] <= p.sample_sizes[i - 1])
      fail(ErrorKind::config, "protocol: sample sizes must be ascending");
  }
  if (p.holdout_n == 0) fail(ErrorKind::config, "protocol: holdout_n must be positive");
  if (p.test_pairs.empty()) fail(ErrorKind::config, "protocol: no test pairs");
  if (p.alphas.empty()) fail(ErrorKind::config, "protocol: no alphas");
  for (double a : p.alphas)
    if (!(a > 0.0 && a < 1.0)) fail(ErrorKind::config, "protocol: alpha must lie in (0, 1)");
  if (p.scores.empty()) fail(ErrorKind::config, "protocol: no scores");
  for (const auto& s : p.scores)
    if (s.kind == ScoreKind::bde && !(s.ess > 0.0)) fail(ErrorKind::config, "protocol: ess must be positive");
  if (p.permutations < 1) fail(ErrorKind::config, "protocol: permutations must be at least 1");
}

std::string_view to_string(Indicator i) {
  switch (i) {
    case Indicator::bde_train: return "bde_train";
    case Indicator::bic_train: return "bic_train";
    case Indicator::bde_holdout: return "bde_holdout";
    case Indicator::bic_holdout: return "bic_holdout";
    case Indicator::shd: return "shd";
  }
  return "?";
}

double rel_delta(double alt, double base, Indicator indicator) {
  if (indicator == Indicator::shd) return (base - alt) / std::max(base, 1.0);
  if (base == 0.0) return alt - base;
  return (alt - base) / std::abs(base);
}

std::uint64_t role_seed(std::uint64_t master, std::size_t n, std::size_t replicate, SeedRole role) {
  return derive_seed({master, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replicate),
                      static_cast<std::uint64_t>(role)});
}

namespace {


void emit(std::vector<BenchRecord>& out, const TestPair& pair, ScoreKind score, double alpha, std::size_t n,
          std::size_t rep, Indicator ind, double alt, double base, const Logger& log) {
  BenchRecord r;
  r.test = pair.alternative;
  r.baseline = pair.baseline;
  r.score = score;
  r.alpha = alpha;
  r.n = n;
  r.replicate = rep;
  r.indicator = ind;
  r.value_alt = alt;
  r.value_base = base;
  r.raw_difference = ind != Indicator::shd && base == 0.0;
  r.rel_delta = rel_delta(alt, base, ind);
  if (r.raw_difference && log)
    log("note: zero baseline for " + std::string(to_string(ind)) + " at n=" + std::to_string(n) + " replicate " +
        std::to_string(rep) + "; rel_delta holds the raw difference");
  out.push_back(r);
}

}  // namespace

std::vector<BenchRecord> run_protocol(const Protocol& p, const BayesNet& truth, const Logger& log) {
  validate(p);
  const Dag& true_dag = truth.dag();
  const DiscreteDataset holdout =
      forward_sample(truth, p.holdout_n, derive_seed({p.master_seed, static_cast<std::uint64_t>(SeedRole::holdout)}));

  std::vector<BenchRecord> records;
  for (std::size_t n : p.sample_sizes) {
    for (std::size_t rep = 0; rep < p.replicates; ++rep) {
      std::vector<BenchRecord> local;
      try {
        // Every learner of this replicate sees the same training sample.
        const DiscreteDataset train = forward_sample(truth, n, role_seed(p.master_seed, n, rep, SeedRole::train));
        const std::uint64_t perm_seed = role_seed(p.master_seed, n, rep, SeedRole::permutation);
        for (const auto& pair : p.test_pairs) {
          for (double alpha : p.alphas) {
            auto skeleton = [&](Method m) {
              LearnConfig cfg;
              cfg.test.method = m;
              cfg.test.alpha = alpha;
              cfg.test.permutation.replicates = p.permutations;
              cfg.max_conditioning = p.max_conditioning;
              cfg.seed = perm_seed;
              return mmpc(train, cfg);
            };
            // The skeleton does not depend on the score, so it is shared by
            // the BDe and BIC hill climbs.
            const auto skel_alt = skeleton(pair.alternative);
            const auto skel_base = skeleton(pair.baseline);
            for (const auto& spec : p.scores) {
              ScoreCache cache_alt(train, spec), cache_base(train, spec);
              const Dag dag_alt = hill_climb(train.names(), cache_alt, skel_alt);
              const Dag dag_base = hill_climb(train.names(), cache_base, skel_base);
              const bool bde = spec.kind == ScoreKind::bde;
              emit(local, pair, spec.kind, alpha, n, rep, bde ? Indicator::bde_train : Indicator::bic_train,
                   network_score(dag_alt, train, spec).total, network_score(dag_base, train, spec).total, log);
              emit(local, pair, spec.kind, alpha, n, rep, bde ? Indicator::bde_holdout : Indicator::bic_holdout,
                   network_score(dag_alt, holdout, spec).total, network_score(dag_base, holdout, spec).total, log);
              emit(local, pair, spec.kind, alpha, n, rep, Indicator::shd,
                   static_cast<double>(shd(dag_alt, true_dag)), static_cast<double>(shd(dag_base, true_dag)), log);
            }
          }
        }
      } catch (const std::exception& e) {
        if (log) log("replicate " + std::to_string(rep) + " at n=" + std::to_string(n) + " failed: " + e.what());
        continue;
      }
      records.insert(records.end(), local.begin(), local.end());
      if (log) log("n=" + std::to_string(n) + " replicate " + std::to_string(rep + 1) + "/" + std::to_string(p.replicates) + " done");
    }
  }
  sort_records(records);
  return records;
}

std::vector<BenchRecord> run_protocol(const Protocol& p, const std::filesystem::path& base_dir, const Logger& log) {
  if (p.true_net.empty()) fail(ErrorKind::config, "protocol: true_net is not set");
  std::filesystem::path path = p.true_net;
  if (path.is_relative()) path = base_dir / path;
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  const BayesNet truth = read_bif(in);
  if (p.alarm_signature) {
    if (truth.size() != 37 || truth.dag().num_arcs() != 46 || truth.free_parameters() != 509)
      fail(ErrorKind::validation, "'" + path.string() + "' does not match the ALARM signature (37 nodes, 46 arcs, "
                                  "509 parameters): found " + std::to_string(truth.size()) + "/" +
                                  std::to_string(truth.dag().num_arcs()) + "/" + std::to_string(truth.free_parameters()));
  }
  return run_protocol(p, truth, log);
}

void sort_records(std::vector<BenchRecord>& records) {
  auto key = [](const BenchRecord& r) {
    return std::make_tuple(to_string(r.test), to_string(r.baseline), r.alpha, to_string(r.score), r.n, r.replicate,
                           to_string(r.indicator));
  };
  std::stable_sort(records.begin(), records.end(),
                   [&](const BenchRecord& a, const BenchRecord& b) { return key(a) < key(b); });
}

void write_records_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
  out << "test,baseline,score,alpha,n,replicate,indicator,value_alt,value_base,rel_delta\n";
  for (const auto& r : records)
    out << to_string(r.test) << ',' << to_string(r.baseline) << ',' << to_string(r.score) << ','
        << format_number(r.alpha) << ',' << r.n << ',' << r.replicate << ',' << to_string(r.indicator) << ','
        << format_number(r.value_alt) << ',' << format_number(r.value_base) << ',' << format_number(r.rel_delta)
        << '\n';
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) fail(ErrorKind::argument, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records) {
  if (records.empty()) fail(ErrorKind::argument, "summarize: no records");
  using Key = std::tuple<std::string_view, std::string_view, double, std::string_view, std::size_t, std::string_view>;
  std::map<Key, std::pair<const BenchRecord*, std::vector<double>>> groups;
  for (const auto& r : records) {
    Key k{to_string(r.test), to_string(r.baseline), r.alpha, to_string(r.score), r.n, to_string(r.indicator)};
    auto& g = groups[k];
    if (!g.first) g.first = &r;
    g.second.push_back(r.rel_delta);
  }
  std::vector<SummaryRow> out;
  for (const auto& [k, g] : groups) {
    const BenchRecord& r = *g.first;
    const auto& v = g.second;
    out.push_back({r.test, r.baseline, r.score, r.alpha, r.n, r.indicator, v.size(), *std::min_element(v.begin(), v.end()),
                   quantile_type7(v, 0.25), quantile_type7(v, 0.5), quantile_type7(v, 0.75),
                   *std::max_element(v.begin(), v.end())});
  }
  return out;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out, std::size_t parameters) {
  out << "test,baseline,score,alpha,n,indicator,count,min,q1,median,q3,max";
  if (parameters) out << ",ratio";
  out << '\n';
  for (const auto& s : rows) {
    out << to_string(s.test) << ',' << to_string(s.baseline) << ',' << to_string(s.score) << ','
        << format_number(s.alpha) << ',' << s.n << ',' << to_string(s.indicator) << ',' << s.count << ','
        << format_number(s.min) << ',' << format_number(s.q1) << ',' << format_number(s.median) << ','
        << format_number(s.q3) << ',' << format_number(s.max);
    if (parameters) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(s.n) / static_cast<double>(parameters));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace bnci
