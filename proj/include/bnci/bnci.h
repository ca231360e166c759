/*
 * C interface to the bnci library: discrete Bayesian-network structure
 * learning with asymptotic, permutation and shrinkage conditional
 * independence tests.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a bnci_status; on failure the message is
 * available from bnci_last_error() until the next call on the same thread.
 * Strings returned through char** are owned by the caller and released with
 * bnci_string_free().
 */
#ifndef BNCI_H
#define BNCI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BNCI_BUILDING_LIBRARY)
#    define BNCI_API __declspec(dllexport)
#  else
#    define BNCI_API __declspec(dllimport)
#  endif
#else
#  define BNCI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bnci_status {
  BNCI_OK = 0,
  BNCI_E_ARGUMENT = 1,
  BNCI_E_FORMAT = 2,
  BNCI_E_PARSE = 3,
  BNCI_E_VALIDATION = 4,
  BNCI_E_CONFIG = 5,
  BNCI_E_IO = 6,
  BNCI_E_INTERNAL = 7
} bnci_status;

typedef struct bnci_dataset bnci_dataset;
typedef struct bnci_network bnci_network;
typedef struct bnci_dag bnci_dag;

BNCI_API const char* bnci_version(void);
BNCI_API const char* bnci_last_error(void);
BNCI_API void bnci_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* levels_text may be NULL; otherwise "variable:level1,level2,..." lines. */
BNCI_API bnci_status bnci_dataset_from_csv(const char* csv_text, const char* levels_text, bnci_dataset** out);
BNCI_API void bnci_dataset_free(bnci_dataset* data);
BNCI_API size_t bnci_dataset_rows(const bnci_dataset* data);
BNCI_API size_t bnci_dataset_vars(const bnci_dataset* data);
BNCI_API const char* bnci_dataset_var_name(const bnci_dataset* data, size_t index);
BNCI_API bnci_status bnci_dataset_to_csv(const bnci_dataset* data, char** out);

/* ---- networks ---------------------------------------------------------- */

BNCI_API bnci_status bnci_network_from_bif(const char* bif_text, bnci_network** out);
BNCI_API void bnci_network_free(bnci_network* net);
BNCI_API bnci_status bnci_network_to_bif(const bnci_network* net, char** out);
BNCI_API size_t bnci_network_nodes(const bnci_network* net);
BNCI_API size_t bnci_network_arcs(const bnci_network* net);
BNCI_API size_t bnci_network_parameters(const bnci_network* net);
/* The network's structure as a new DAG handle. */
BNCI_API bnci_status bnci_network_dag(const bnci_network* net, bnci_dag** out);
BNCI_API bnci_status bnci_network_sample(const bnci_network* net, size_t n, uint64_t seed, bnci_dataset** out);
BNCI_API bnci_status bnci_network_fit(const bnci_dag* dag, const bnci_dataset* data, bnci_network** out);
/* May store -INFINITY when some row has probability zero. */
BNCI_API bnci_status bnci_network_log_likelihood(const bnci_network* net, const bnci_dataset* data, double* out);

/* ---- graphs ------------------------------------------------------------ */

/* "nodes: A B C" header, then one "parent -> child" per line. */
BNCI_API bnci_status bnci_dag_from_text(const char* text, bnci_dag** out);
BNCI_API void bnci_dag_free(bnci_dag* dag);
BNCI_API bnci_status bnci_dag_to_text(const bnci_dag* dag, char** out);
BNCI_API size_t bnci_dag_nodes(const bnci_dag* dag);
BNCI_API size_t bnci_dag_arcs(const bnci_dag* dag);
BNCI_API bnci_status bnci_shd(const bnci_dag* learned, const bnci_dag* truth, size_t* out);

/* ---- conditional independence tests ------------------------------------ */

typedef struct bnci_test_config {
  const char* method;    /* "mi", "x2", "mi_perm", "x2_perm" or "mi_shrink" */
  double alpha;          /* used by learners only */
  long permutations;     /* permutation replicates R */
  uint64_t seed;
  int has_lambda;        /* mi_shrink: use `lambda` instead of the estimate */
  double lambda;
} bnci_test_config;

/* mi, alpha 0.05, 5000 permutations, seed 0, estimated lambda. */
BNCI_API void bnci_test_config_init(bnci_test_config* config);

typedef struct bnci_test_outcome {
  double statistic;
  long df;
  double p_value;
  const char* method;    /* static string */
  int has_permutations;
  long permutations_used;
  int has_lambda;
  double lambda;
} bnci_test_outcome;

BNCI_API bnci_status bnci_citest(const bnci_dataset* data, const char* x, const char* y, const char* const* z,
                                 size_t z_count, const bnci_test_config* config, bnci_test_outcome* out);

/* ---- learning and scoring ---------------------------------------------- */

typedef struct bnci_learn_config {
  bnci_test_config test;
  const char* score;        /* "bde" or "bic" */
  double ess;               /* BDe equivalent sample size */
  size_t max_conditioning;  /* MMPC conditioning-set cap */
  size_t max_parents;       /* 0 means unlimited */
  uint64_t seed;
} bnci_learn_config;

/* test defaults, bde, ess 10, max_conditioning 3, unlimited parents, seed 0. */
BNCI_API void bnci_learn_config_init(bnci_learn_config* config);
BNCI_API bnci_status bnci_learn(const bnci_dataset* data, const bnci_learn_config* config, bnci_dag** out);

typedef struct bnci_score_value {
  double total;
  size_t n;
  int has_params;
  size_t params;
} bnci_score_value;

/* per_node may be NULL; otherwise it receives bnci_dag_nodes(dag) values. */
BNCI_API bnci_status bnci_score(const bnci_dag* dag, const bnci_dataset* data, const char* score, double ess,
                                bnci_score_value* out, double* per_node);

/* ---- benchmark protocol ------------------------------------------------ */

/* Runs a protocol file's contents; relative paths resolve against base_dir
 * (may be NULL for the working directory). Progress lines go to stderr when
 * verbose is non-zero. summary_csv may be NULL. */
BNCI_API bnci_status bnci_bench_run(const char* protocol_text, const char* base_dir, int verbose, char** records_csv,
                                    char** summary_csv);

#ifdef __cplusplus
}
#endif

#endif /* BNCI_H */
