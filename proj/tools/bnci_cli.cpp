// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnci/bnci.h"

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bnci_status s) {
  if (s != BNCI_OK) throw CliError(bnci_last_error());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("cannot write '" + path + "'");
  out << text;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  bnci_string_free(s);
  return out;
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<bnci_dataset, Deleter<bnci_dataset, bnci_dataset_free>>;
using Network = std::unique_ptr<bnci_network, Deleter<bnci_network, bnci_network_free>>;
using Graph = std::unique_ptr<bnci_dag, Deleter<bnci_dag, bnci_dag_free>>;

Dataset load_data(const std::string& path, const std::string& levels_path) {
  const std::string csv = slurp(path);
  std::optional<std::string> levels;
  if (!levels_path.empty()) levels = slurp(levels_path);
  bnci_dataset* d = nullptr;
  check(bnci_dataset_from_csv(csv.c_str(), levels ? levels->c_str() : nullptr, &d));
  return Dataset(d);
}

Network load_net(const std::string& path) {
  bnci_network* n = nullptr;
  check(bnci_network_from_bif(slurp(path).c_str(), &n));
  return Network(n);
}

Graph load_dag(const std::string& path) {
  bnci_dag* g = nullptr;
  check(bnci_dag_from_text(slurp(path).c_str(), &g));
  return Graph(g);
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

struct TestOptions {
  std::string method = "mi";
  double alpha = 0.05;
  long permutations = 5000;
  uint64_t seed = 0;
  std::optional<double> lambda;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--method", method, "mi, x2, mi_perm, x2_perm or mi_shrink")->capture_default_str();
    cmd->add_option("--alpha", alpha, "type I error threshold")->capture_default_str();
    cmd->add_option("--permutations,-R", permutations, "permutation replicates")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--lambda", lambda, "fixed shrinkage intensity for mi_shrink");
  }
  bnci_test_config config() const {
    bnci_test_config c;
    bnci_test_config_init(&c);
    c.method = method.c_str();
    c.alpha = alpha;
    c.permutations = permutations;
    c.seed = seed;
    c.has_lambda = lambda.has_value();
    c.lambda = lambda.value_or(0.0);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Bayesian network structure learning with permutation and shrinkage CI tests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bnci_version()));

  // sample
  std::string net_path, out_path = "-";
  std::size_t sample_n = 0;
  uint64_t sample_seed = 1;
  auto* sample = app.add_subcommand("sample", "draw a CSV sample from a BIF network");
  sample->add_option("--net", net_path, "BIF file")->required();
  sample->add_option("-n", sample_n, "rows")->required();
  sample->add_option("--seed", sample_seed, "random seed")->capture_default_str();
  sample->add_option("-o,--out", out_path, "output CSV (default stdout)");

  // info
  auto* info = app.add_subcommand("info", "print node, arc and parameter counts of a BIF network");
  info->add_option("--net", net_path, "BIF file")->required();

  // citest
  std::string data_path, levels_path, x_name, y_name;
  std::vector<std::string> z_names;
  TestOptions test_opts;
  auto* citest = app.add_subcommand("citest", "test X independent of Y given Z; prints one JSON line");
  citest->add_option("--data", data_path, "CSV data")->required();
  citest->add_option("--levels", levels_path, "level declarations");
  citest->add_option("-x", x_name, "first variable")->required();
  citest->add_option("-y", y_name, "second variable")->required();
  citest->add_option("-z", z_names, "conditioning variables")->delimiter(',');
  test_opts.add_to(citest);

  // learn
  std::string score_kind = "bde";
  double ess = 10.0;
  std::size_t max_conditioning = 3, max_parents = 0;
  auto* learn = app.add_subcommand("learn", "learn a structure with MMHC; prints an arc list");
  learn->add_option("--data", data_path, "CSV data")->required();
  learn->add_option("--levels", levels_path, "level declarations");
  learn->add_option("--score", score_kind, "bde or bic")->capture_default_str();
  learn->add_option("--ess", ess, "BDe equivalent sample size")->capture_default_str();
  learn->add_option("--max-conditioning", max_conditioning, "MMPC conditioning-set cap")->capture_default_str();
  learn->add_option("--max-parents", max_parents, "parent cap, 0 for none")->capture_default_str();
  learn->add_option("-o,--out", out_path, "output arc list (default stdout)");
  test_opts.add_to(learn);

  // score
  std::string dag_path;
  auto* score = app.add_subcommand("score", "score a structure on data; prints JSON");
  auto* dag_opt = score->add_option("--dag", dag_path, "arc-list file");
  auto* net_opt = score->add_option("--net", net_path, "BIF file (its structure is scored)");
  dag_opt->excludes(net_opt);
  score->add_option("--data", data_path, "CSV data")->required();
  score->add_option("--levels", levels_path, "level declarations");
  score->add_option("--score", score_kind, "bde or bic")->capture_default_str();
  score->add_option("--ess", ess, "BDe equivalent sample size")->capture_default_str();

  // shd
  std::string first_path, second_path;
  auto* shd = app.add_subcommand("shd", "structural Hamming distance between two arc lists");
  shd->add_option("learned", first_path, "arc-list file")->required();
  shd->add_option("truth", second_path, "arc-list file")->required();

  // bench
  std::string protocol_path, records_path = "-", summary_path;
  bool quiet = false;
  auto* bench = app.add_subcommand("bench", "run a benchmark protocol file");
  bench->add_option("protocol", protocol_path, "protocol file")->required();
  bench->add_option("--records", records_path, "records CSV (default stdout)");
  bench->add_option("--summary", summary_path, "summary CSV");
  bench->add_flag("--quiet", quiet, "no progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      auto net = load_net(net_path);
      bnci_dataset* d = nullptr;
      check(bnci_network_sample(net.get(), sample_n, sample_seed, &d));
      Dataset data(d);
      char* csv = nullptr;
      check(bnci_dataset_to_csv(data.get(), &csv));
      write_out(out_path, take(csv));
    } else if (*info) {
      auto net = load_net(net_path);
      nlohmann::json j{{"nodes", bnci_network_nodes(net.get())},
                       {"arcs", bnci_network_arcs(net.get())},
                       {"parameters", bnci_network_parameters(net.get())}};
      std::cout << j.dump() << '\n';
    } else if (*citest) {
      auto data = load_data(data_path, levels_path);
      std::vector<const char*> z;
      for (const auto& s : z_names) z.push_back(s.c_str());
      const bnci_test_config cfg = test_opts.config();
      bnci_test_outcome out;
      check(bnci_citest(data.get(), x_name.c_str(), y_name.c_str(), z.data(), z.size(), &cfg, &out));
      nlohmann::json j{{"x", x_name},
                       {"y", y_name},
                       {"z", z_names},
                       {"method", out.method},
                       {"statistic", number_or_null(out.statistic)},
                       {"df", out.df},
                       {"p_value", out.p_value}};
      j["permutations_used"] = out.has_permutations ? nlohmann::json(out.permutations_used) : nlohmann::json(nullptr);
      j["lambda"] = out.has_lambda ? nlohmann::json(out.lambda) : nlohmann::json(nullptr);
      std::cout << j.dump() << '\n';
    } else if (*learn) {
      auto data = load_data(data_path, levels_path);
      bnci_learn_config cfg;
      bnci_learn_config_init(&cfg);
      cfg.test = test_opts.config();
      cfg.score = score_kind.c_str();
      cfg.ess = ess;
      cfg.max_conditioning = max_conditioning;
      cfg.max_parents = max_parents;
      cfg.seed = test_opts.seed;
      bnci_dag* g = nullptr;
      check(bnci_learn(data.get(), &cfg, &g));
      Graph dag(g);
      char* text = nullptr;
      check(bnci_dag_to_text(dag.get(), &text));
      write_out(out_path, take(text));
    } else if (*score) {
      Graph dag;
      if (!dag_path.empty()) {
        dag = load_dag(dag_path);
      } else if (!net_path.empty()) {
        auto net = load_net(net_path);
        bnci_dag* g = nullptr;
        check(bnci_network_dag(net.get(), &g));
        dag.reset(g);
      } else {
        throw CliError("score needs --dag or --net");
      }
      auto data = load_data(data_path, levels_path);
      bnci_score_value v;
      std::vector<double> per_node(bnci_dag_nodes(dag.get()));
      check(bnci_score(dag.get(), data.get(), score_kind.c_str(), ess, &v, per_node.data()));
      char* text = nullptr;
      check(bnci_dag_to_text(dag.get(), &text));
      std::istringstream header(take(text));
      std::string line, tag;
      std::getline(header, line);
      std::istringstream names(line);
      names >> tag;
      nlohmann::json nodes = nlohmann::json::object();
      for (std::size_t i = 0; i < per_node.size(); ++i) {
        std::string name;
        names >> name;
        nodes[name] = number_or_null(per_node[i]);
      }
      nlohmann::json j{{"score", score_kind}, {"total", number_or_null(v.total)}, {"n", v.n}, {"per_node", nodes}};
      if (score_kind != "bic") j["ess"] = ess;
      j["params"] = v.has_params ? nlohmann::json(v.params) : nlohmann::json(nullptr);
      std::cout << j.dump() << '\n';
    } else if (*shd) {
      auto a = load_dag(first_path);
      auto b = load_dag(second_path);
      std::size_t d = 0;
      check(bnci_shd(a.get(), b.get(), &d));
      std::cout << d << '\n';
    } else if (*bench) {
      const std::string text = slurp(protocol_path);
      const std::string base = std::filesystem::path(protocol_path).parent_path().string();
      char* records = nullptr;
      char* summary = nullptr;
      check(bnci_bench_run(text.c_str(), base.empty() ? "." : base.c_str(), quiet ? 0 : 1, &records,
                           summary_path.empty() ? nullptr : &summary));
      write_out(records_path, take(records));
      if (!summary_path.empty()) write_out(summary_path, take(summary));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
