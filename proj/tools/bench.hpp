#ifndef SPLITLS_BENCH_HPP
#define SPLITLS_BENCH_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "splitls/admm.hpp"
#include "splitls/drs.hpp"
#include "splitls/problems.hpp"

namespace splitls::bench {

/// One benchmark run: problem family + algorithm + engine + step policy.
/// File values come from a `key = value` document; CLI flags override.
struct RunConfig {
  // problem
  std::string problem = "sparse_lsq";  // sparse_lsq | spca | consensus_spca | mpc
  long m = 100, n = 500, k = 50;
  int agents = 3;
  int horizon = 10;
  double reg = 0.1;
  std::uint64_t seed = 0;
  // algorithm + engine
  std::string algorithm = "drs_ls";  // drs | drs_ls | admm | admm_ls
  std::string engine = "nominal";    // nominal|nesterov|lbfgs(m)|broyden(t)|anderson(m)
  // step policy: explicit gamma/beta, else from-bounds fraction; adaptive
  // starts from the from-bounds value scaled by step_init_factor.
  double gamma = 0.0;
  double beta = 0.0;
  double bound_fraction = 0.95;
  bool adaptive = false;
  double step_init_factor = 1.0;
  double lambda = 1.0;
  double c_fraction = 0.5;
  double epsilon = 1e-6;
  long max_iters = 100000;
  std::string out_dir;
};

RunConfig parse_config_file(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
EngineSpec parse_engine(const std::string& text);

struct RunResult {
  bool converged = false;
  long iterations = 0;
  long prox1 = 0;
  double res_norm = 0.0;
  double merit = 0.0;
  double objective = 0.0;  // final merit value (DRE / L_beta)
  double time_s = 0.0;
  double step_final = 0.0;
  int adjustments = 0;
  std::vector<TraceRow> trace;
  nlohmann::json summary;
};

RunResult run_once(const RunConfig& cfg);

/// Writes trace.csv + summary.json under cfg.out_dir (atomic temp+rename).
/// Exit codes: 0 success, 2 invalid configuration, 1 solver error.
int cmd_run(const RunConfig& cfg);

/// Per-engine aggregation over seeds: quartiles of the phi1-prox/x-step count
/// to reach epsilon, plus the objective relative to the nominal baseline.
/// Seeds run concurrently up to BENCH_THREADS.
struct CompareRow {
  std::string engine;
  int runs = 0;
  int converged = 0;
  double q25 = 0.0, median = 0.0, q75 = 0.0;  // prox1 counts
  double rel_objective_median = 0.0;          // vs the first (baseline) engine
};
int cmd_compare(const RunConfig& base, const std::vector<std::string>& engines,
                int seeds, const std::string& out_dir,
                std::vector<CompareRow>* rows_out = nullptr);

void write_file_atomic(const std::string& path, const std::string& content);
std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace splitls::bench

#endif
