// extern "C" surface over the C++ core. Exceptions never cross this boundary.

#include "bnci/bnci.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>

#include "bnci/bench.hpp"
#include "bnci/citest.hpp"
#include "bnci/data.hpp"
#include "bnci/error.hpp"
#include "bnci/graph.hpp"
#include "bnci/learn.hpp"
#include "bnci/network.hpp"
#include "bnci/score.hpp"

struct bnci_dataset {
  bnci::DiscreteDataset value;
};
struct bnci_network {
  bnci::BayesNet value;
};
struct bnci_dag {
  bnci::Dag value;
};

namespace {

thread_local std::string last_error;

bnci_status status_of(bnci::ErrorKind kind) {
  switch (kind) {
    case bnci::ErrorKind::argument: return BNCI_E_ARGUMENT;
    case bnci::ErrorKind::format: return BNCI_E_FORMAT;
    case bnci::ErrorKind::parse: return BNCI_E_PARSE;
    case bnci::ErrorKind::validation: return BNCI_E_VALIDATION;
    case bnci::ErrorKind::config: return BNCI_E_CONFIG;
    case bnci::ErrorKind::io: return BNCI_E_IO;
  }
  return BNCI_E_INTERNAL;
}

template <class Fn>
bnci_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return BNCI_OK;
  } catch (const bnci::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return BNCI_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BNCI_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) bnci::fail(bnci::ErrorKind::argument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bnci::TestConfig to_config(const bnci_test_config& c) {
  bnci::TestConfig cfg;
  require(c.method, "test method");
  cfg.method = bnci::parse_method(c.method);
  cfg.alpha = c.alpha;
  cfg.permutation.replicates = c.permutations;
  cfg.permutation.seed = c.seed;
  if (c.has_lambda) cfg.shrinkage.lambda_override = c.lambda;
  return cfg;
}

}  // namespace

extern "C" {

const char* bnci_version(void) { return "0.1.0"; }
const char* bnci_last_error(void) { return last_error.c_str(); }
void bnci_string_free(char* s) { std::free(s); }

bnci_status bnci_dataset_from_csv(const char* csv_text, const char* levels_text, bnci_dataset** out) {
  return guarded([&] {
    require(csv_text, "csv_text");
    require(out, "out");
    bnci::LevelDeclarations levels;
    if (levels_text) {
      std::istringstream in(levels_text);
      levels = bnci::parse_level_declarations(in);
    }
    *out = new bnci_dataset{bnci::load_csv_text(csv_text, levels)};
  });
}

void bnci_dataset_free(bnci_dataset* data) { delete data; }
size_t bnci_dataset_rows(const bnci_dataset* data) { return data ? data->value.n() : 0; }
size_t bnci_dataset_vars(const bnci_dataset* data) { return data ? data->value.num_vars() : 0; }

const char* bnci_dataset_var_name(const bnci_dataset* data, size_t index) {
  if (!data || index >= data->value.num_vars()) return nullptr;
  return data->value.variable(index).name.c_str();
}

bnci_status bnci_dataset_to_csv(const bnci_dataset* data, char** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    std::ostringstream s;
    bnci::write_csv(data->value, s);
    *out = dup_string(s.str());
  });
}

bnci_status bnci_network_from_bif(const char* bif_text, bnci_network** out) {
  return guarded([&] {
    require(bif_text, "bif_text");
    require(out, "out");
    *out = new bnci_network{bnci::parse_bif(bif_text)};
  });
}

void bnci_network_free(bnci_network* net) { delete net; }

bnci_status bnci_network_to_bif(const bnci_network* net, char** out) {
  return guarded([&] {
    require(net, "net");
    require(out, "out");
    *out = dup_string(bnci::emit_bif(net->value));
  });
}

size_t bnci_network_nodes(const bnci_network* net) { return net ? net->value.size() : 0; }
size_t bnci_network_arcs(const bnci_network* net) { return net ? net->value.dag().num_arcs() : 0; }
size_t bnci_network_parameters(const bnci_network* net) { return net ? net->value.free_parameters() : 0; }

bnci_status bnci_network_dag(const bnci_network* net, bnci_dag** out) {
  return guarded([&] {
    require(net, "net");
    require(out, "out");
    *out = new bnci_dag{net->value.dag()};
  });
}

bnci_status bnci_network_sample(const bnci_network* net, size_t n, uint64_t seed, bnci_dataset** out) {
  return guarded([&] {
    require(net, "net");
    require(out, "out");
    *out = new bnci_dataset{bnci::forward_sample(net->value, n, seed)};
  });
}

bnci_status bnci_network_fit(const bnci_dag* dag, const bnci_dataset* data, bnci_network** out) {
  return guarded([&] {
    require(dag, "dag");
    require(data, "data");
    require(out, "out");
    *out = new bnci_network{bnci::fit_mle(dag->value, data->value)};
  });
}

bnci_status bnci_network_log_likelihood(const bnci_network* net, const bnci_dataset* data, double* out) {
  return guarded([&] {
    require(net, "net");
    require(data, "data");
    require(out, "out");
    *out = bnci::log_likelihood(net->value, data->value);
  });
}

bnci_status bnci_dag_from_text(const char* text, bnci_dag** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new bnci_dag{bnci::parse_arc_list(text)};
  });
}

void bnci_dag_free(bnci_dag* dag) { delete dag; }

bnci_status bnci_dag_to_text(const bnci_dag* dag, char** out) {
  return guarded([&] {
    require(dag, "dag");
    require(out, "out");
    *out = dup_string(bnci::format_arc_list(dag->value));
  });
}

size_t bnci_dag_nodes(const bnci_dag* dag) { return dag ? dag->value.size() : 0; }
size_t bnci_dag_arcs(const bnci_dag* dag) { return dag ? dag->value.num_arcs() : 0; }

bnci_status bnci_shd(const bnci_dag* learned, const bnci_dag* truth, size_t* out) {
  return guarded([&] {
    require(learned, "learned");
    require(truth, "truth");
    require(out, "out");
    *out = bnci::shd(learned->value, truth->value);
  });
}

void bnci_test_config_init(bnci_test_config* config) {
  if (!config) return;
  config->method = "mi";
  config->alpha = 0.05;
  config->permutations = 5000;
  config->seed = 0;
  config->has_lambda = 0;
  config->lambda = 0.0;
}

bnci_status bnci_citest(const bnci_dataset* data, const char* x, const char* y, const char* const* z, size_t z_count,
                        const bnci_test_config* config, bnci_test_outcome* out) {
  return guarded([&] {
    require(data, "data");
    require(x, "x");
    require(y, "y");
    require(config, "config");
    require(out, "out");
    if (z_count > 0) require(z, "z");
    const auto& ds = data->value;
    std::vector<std::size_t> zs;
    for (size_t i = 0; i < z_count; ++i) {
      require(z[i], "conditioning variable name");
      zs.push_back(ds.require(z[i]));
    }
    const bnci::TestOutcome t = bnci::ci_test(ds, ds.require(x), ds.require(y), zs, to_config(*config));
    out->statistic = t.statistic;
    out->df = t.df;
    out->p_value = t.p_value;
    out->method = bnci::to_string(t.method).data();
    out->has_permutations = t.permutations_used.has_value();
    out->permutations_used = t.permutations_used.value_or(0);
    out->has_lambda = t.lambda.has_value();
    out->lambda = t.lambda.value_or(0.0);
  });
}

void bnci_learn_config_init(bnci_learn_config* config) {
  if (!config) return;
  bnci_test_config_init(&config->test);
  config->score = "bde";
  config->ess = 10.0;
  config->max_conditioning = 3;
  config->max_parents = 0;
  config->seed = 0;
}

bnci_status bnci_learn(const bnci_dataset* data, const bnci_learn_config* config, bnci_dag** out) {
  return guarded([&] {
    require(data, "data");
    require(config, "config");
    require(out, "out");
    bnci::LearnConfig cfg;
    cfg.test = to_config(config->test);
    require(config->score, "score");
    cfg.score = {bnci::parse_score_kind(config->score), config->ess};
    cfg.max_conditioning = config->max_conditioning;
    if (config->max_parents > 0) cfg.max_parents = config->max_parents;
    cfg.seed = config->seed;
    *out = new bnci_dag{bnci::mmhc(data->value, cfg)};
  });
}

bnci_status bnci_score(const bnci_dag* dag, const bnci_dataset* data, const char* score, double ess,
                       bnci_score_value* out, double* per_node) {
  return guarded([&] {
    require(dag, "dag");
    require(data, "data");
    require(score, "score");
    require(out, "out");
    const bnci::ScoreValue v = bnci::network_score(dag->value, data->value, {bnci::parse_score_kind(score), ess});
    out->total = v.total;
    out->n = v.n;
    out->has_params = v.params.has_value();
    out->params = v.params.value_or(0);
    if (per_node) std::copy(v.per_node.begin(), v.per_node.end(), per_node);
  });
}

bnci_status bnci_bench_run(const char* protocol_text, const char* base_dir, int verbose, char** records_csv,
                           char** summary_csv) {
  return guarded([&] {
    require(protocol_text, "protocol_text");
    require(records_csv, "records_csv");
    const bnci::Protocol p = bnci::parse_protocol(protocol_text);
    bnci::Logger log;
    if (verbose) log = [](const std::string& line) { std::cerr << line << '\n'; };
    const auto records = bnci::run_protocol(p, base_dir ? std::filesystem::path(base_dir) : std::filesystem::path("."), log);
    std::ostringstream rec;
    bnci::write_records_csv(records, rec);
    std::string summary;
    if (summary_csv && !records.empty()) {
      std::ostringstream sum;
      // The ratio column uses the reference network's parameter count.
      std::filesystem::path path = p.true_net;
      if (path.is_relative() && base_dir) path = std::filesystem::path(base_dir) / path;
      std::ifstream in(path);
      const std::size_t params = in ? bnci::read_bif(in).free_parameters() : 0;
      bnci::write_summary_csv(bnci::summarize(records), sum, params);
      summary = sum.str();
    }
    char* r = dup_string(rec.str());
    if (summary_csv) {
      try {
        *summary_csv = dup_string(summary);
      } catch (...) {
        std::free(r);
        throw;
      }
    }
    *records_csv = r;
  });
}

}  // extern "C"
