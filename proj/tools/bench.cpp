#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace splitls::bench {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long to_long(const std::string& v, const std::string& key) {
  try {
    return std::stol(v);
  } catch (...) {
    throw ConfigError("invalid integer for '" + key + "': " + v);
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (...) {
    throw ConfigError("invalid number for '" + key + "': " + v);
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean for '" + key + "': " + v);
}

int thread_budget(int tasks) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BENCH_THREADS")) {
    try {
      n = std::max(1, std::stoi(env));
    } catch (...) {
      throw ConfigError("invalid BENCH_THREADS value");
    }
  }
  return std::max(1, std::min(n, tasks));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") cfg.problem = value;
  else if (key == "m") cfg.m = to_long(value, key);
  else if (key == "n") cfg.n = to_long(value, key);
  else if (key == "k") cfg.k = to_long(value, key);
  else if (key == "agents") cfg.agents = static_cast<int>(to_long(value, key));
  else if (key == "horizon") cfg.horizon = static_cast<int>(to_long(value, key));
  else if (key == "reg") cfg.reg = to_double(value, key);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(value, key));
  else if (key == "algorithm") cfg.algorithm = value;
  else if (key == "engine") cfg.engine = value;
  else if (key == "gamma") cfg.gamma = to_double(value, key);
  else if (key == "beta") cfg.beta = to_double(value, key);
  else if (key == "bound_fraction") cfg.bound_fraction = to_double(value, key);
  else if (key == "adaptive") cfg.adaptive = to_bool(value, key);
  else if (key == "step_init_factor") cfg.step_init_factor = to_double(value, key);
  else if (key == "lambda") cfg.lambda = to_double(value, key);
  else if (key == "c_fraction") cfg.c_fraction = to_double(value, key);
  else if (key == "epsilon") cfg.epsilon = to_double(value, key);
  else if (key == "max_iters") cfg.max_iters = to_long(value, key);
  else if (key == "out") cfg.out_dir = value;
  else throw ConfigError("unknown config key: " + key);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

EngineSpec parse_engine(const std::string& text) {
  EngineSpec spec;
  std::string name = text;
  std::string arg;
  const auto open = text.find('(');
  if (open != std::string::npos) {
    const auto close = text.find(')', open);
    if (close == std::string::npos) throw ConfigError("unbalanced engine spec: " + text);
    name = text.substr(0, open);
    arg = text.substr(open + 1, close - open - 1);
  }
  if (name == "nominal") spec.kind = EngineSpec::Kind::Nominal;
  else if (name == "nesterov") spec.kind = EngineSpec::Kind::Nesterov;
  else if (name == "lbfgs") spec.kind = EngineSpec::Kind::Lbfgs;
  else if (name == "broyden") spec.kind = EngineSpec::Kind::Broyden;
  else if (name == "anderson") spec.kind = EngineSpec::Kind::Anderson;
  else throw ConfigError("unknown engine: " + name);
  if (!arg.empty()) {
    if (spec.kind == EngineSpec::Kind::Broyden)
      spec.theta_bar = to_double(arg, "engine");
    else
      spec.memory = static_cast<int>(to_long(arg, "engine"));
  }
  return spec;
}

namespace {

struct Built {
  bool is_admm = false;
  SplitProblem drs;
  AdmmProblem admm;
  Vec s0;               // DRS start
  Vec x0, y0, z0;       // ADMM start
};

Built build_problem(const RunConfig& cfg, double step) {
  Built out;
  if (cfg.problem == "sparse_lsq") {
    out.drs = build_sparse_lsq(make_sparse_lsq_spec(cfg.m, cfg.n, cfg.k, cfg.reg, cfg.seed));
    out.s0 = Vec::Zero(out.drs.dim);
  } else if (cfg.problem == "spca") {
    out.drs = build_spca(make_spca_spec(cfg.m, cfg.n, cfg.k, cfg.seed), step);
    out.s0 = Vec::Constant(out.drs.dim, 1.0 / static_cast<double>(cfg.n));
  } else if (cfg.problem == "consensus_spca") {
    const auto spec = make_consensus_spca_spec(cfg.m, cfg.n, cfg.k, cfg.agents, cfg.seed);
    if (cfg.algorithm == "admm" || cfg.algorithm == "admm_ls") {
      out.is_admm = true;
      out.admm = build_consensus_spca(spec, step);
      out.x0 = Vec::Zero(out.admm.dim_x);
      out.y0 = Vec::Zero(out.admm.dim_y);
      out.z0 = Vec::Constant(out.admm.dim_z, 1.0 / static_cast<double>(cfg.n));
    } else {
      out.drs = build_consensus_spca_drs(spec, step);
      Vec z = Vec::Constant(cfg.n, 1.0 / static_cast<double>(cfg.n));
      out.s0 = Vec(out.drs.dim);
      for (int i = 0; i < cfg.agents; ++i) out.s0.segment(i * cfg.n, cfg.n) = z;
    }
  } else if (cfg.problem == "mpc") {
    MpcSpec spec = make_double_integrator_mpc(cfg.horizon);
    out.drs = build_mpc(spec);
    out.s0 = Vec::Zero(out.drs.dim);
  } else {
    throw ConfigError("unknown problem family: " + cfg.problem);
  }
  return out;
}

/// Lipschitz/strong-convexity constants needed to derive the step before the
/// problem itself is built (the SPCA builders take the step as a hint).
double problem_modulus(const RunConfig& cfg) {
  if (cfg.problem == "sparse_lsq") {
    const auto spec = make_sparse_lsq_spec(cfg.m, cfg.n, cfg.k, cfg.reg, cfg.seed);
    const double s = spectral_norm(spec.A);
    return s * s;
  }
  if (cfg.problem == "spca") {
    const auto spec = make_spca_spec(cfg.m, cfg.n, cfg.k, cfg.seed);
    const double s = spectral_norm(spec.W);
    return s * s / static_cast<double>(cfg.m);
  }
  if (cfg.problem == "consensus_spca") {
    const auto spec = make_consensus_spca_spec(cfg.m, cfg.n, cfg.k, cfg.agents, cfg.seed);
    const Eigen::Index m = spec.base.W.rows();
    const Eigen::Index base = m / spec.agents;
    double L = 0.0;
    Eigen::Index row = 0;
    for (int i = 0; i < spec.agents; ++i) {
      const Eigen::Index sz = base + (i < m % spec.agents ? 1 : 0);
      const double s = spectral_norm(spec.base.W.middleRows(row, sz));
      L = std::max(L, s * s / static_cast<double>(m));
      row += sz;
    }
    return L;
  }
  if (cfg.problem == "mpc") return 1.0;  // mu of the scaled problem
  throw ConfigError("unknown problem family: " + cfg.problem);
}

bool family_convex(const RunConfig& cfg) { return cfg.problem == "sparse_lsq"; }

}  // namespace

RunResult run_once(const RunConfig& cfg) {
  const bool is_admm_alg = cfg.algorithm == "admm" || cfg.algorithm == "admm_ls";
  const bool is_plain = cfg.algorithm == "drs" || cfg.algorithm == "admm";
  if (cfg.algorithm != "drs" && cfg.algorithm != "drs_ls" && cfg.algorithm != "admm" &&
      cfg.algorithm != "admm_ls")
    throw ConfigError("unknown algorithm: " + cfg.algorithm);
  if (is_admm_alg && cfg.problem != "consensus_spca")
    throw ConfigError("ADMM algorithms are wired to the consensus_spca family");
  if (cfg.problem == "mpc" && is_admm_alg)
    throw ConfigError("mpc runs use the DRS algorithms");

  const double modulus = problem_modulus(cfg);
  const bool mpc = cfg.problem == "mpc";
  const bool convex = family_convex(cfg);
  const EngineSpec espec = parse_engine(cfg.engine);

  RunResult res;
  if (!is_admm_alg) {
    DrsConfig dcfg;
    dcfg.lambda = cfg.lambda;
    dcfg.epsilon = cfg.epsilon;
    dcfg.max_iters = cfg.max_iters;
    dcfg.adaptive = cfg.adaptive;
    dcfg.pi = mpc ? -1 : +1;
    if (cfg.gamma > 0) {
      dcfg.gamma = cfg.gamma;
    } else if (mpc) {
      dcfg.gamma = 1.0 / (cfg.bound_fraction * modulus);
    } else {
      dcfg.gamma = cfg.bound_fraction * max_stepsize_gamma(modulus, cfg.lambda, convex);
    }
    if (cfg.adaptive) {
      dcfg.gamma *= cfg.step_init_factor;
      dcfg.c = 0.5 * cfg.c_fraction * (cfg.lambda * (2.0 - cfg.lambda) / 2.0);
      if (mpc) dcfg.phi_lb = std::nullopt;
    } else if (mpc) {
      dcfg.c = cfg.c_fraction * dual_decrease_constant(dcfg.gamma, modulus, cfg.lambda);
    } else {
      dcfg.c = cfg.c_fraction *
               decrease_constant(dcfg.gamma * modulus, cfg.lambda, convex);
    }

    // SPCA factorizations require the hint below 1/L even when adaptive
    // starts above it; prebuild at a compliant value.
    const double hint = std::min(dcfg.gamma, 0.5 / std::max(modulus, 1e-300));
    Built built = build_problem(cfg, mpc ? dcfg.gamma : hint);
    dcfg.validate(built.drs.regime);

    DrsSolveReport rep;
    if (is_plain) {
      rep = drs_solve_plain(built.drs, built.s0, dcfg.gamma, dcfg.lambda,
                            dcfg.epsilon, dcfg.max_iters, dcfg.pi);
    } else {
      auto engine = make_drs_engine(espec, cfg.lambda);
      rep = drs_ls_solve(built.drs, built.s0, dcfg, *engine);
    }
    res.converged = rep.status == SolveStatus::Converged;
    res.iterations = rep.iterations();
    res.prox1 = rep.counters.prox1;
    res.res_norm = rep.trace.empty() ? 0.0 : rep.trace.back().res_norm;
    res.merit = rep.final_state.dre;
    res.objective = res.merit;
    res.time_s = rep.trace.empty() ? 0.0 : rep.trace.back().time_s;
    res.step_final = rep.gamma_final;
    res.adjustments = rep.step_adjustments;
    res.trace = std::move(rep.trace);

    res.summary["certificate"] = nullptr;
    if (rep.certificate) {
      const auto& c = *rep.certificate;
      res.summary["certificate"] = {{"res_norm", c.res_norm},
                                    {"res_over_gamma", c.res_over_gamma},
                                    {"stationarity_bound", c.stationarity_bound},
                                    {"gamma", c.gamma},
                                    {"pi", c.pi}};
    }
    res.summary["counters"] = {{"prox1", rep.counters.prox1},
                               {"prox2", rep.counters.prox2},
                               {"value1", rep.counters.value1},
                               {"value2", rep.counters.value2}};
  } else {
    AdmmConfig acfg;
    acfg.lambda = cfg.lambda;
    acfg.epsilon = cfg.epsilon;
    acfg.max_iters = cfg.max_iters;
    acfg.adaptive = cfg.adaptive;
    acfg.pi = +1;
    if (cfg.beta > 0) {
      acfg.beta = cfg.beta;
    } else {
      acfg.beta = min_penalty_beta(modulus, cfg.lambda, /*f_convex=*/false) /
                  cfg.bound_fraction;
    }
    if (cfg.adaptive) {
      acfg.beta *= cfg.step_init_factor;
      acfg.c = 0.5 * cfg.c_fraction * (cfg.lambda * (2.0 - cfg.lambda) / 2.0);
    } else {
      acfg.c = cfg.c_fraction *
               decrease_constant(modulus / acfg.beta, cfg.lambda, /*f_convex=*/false);
    }

    const double build_beta = std::max(acfg.beta, 2.0 * modulus);
    Built built = build_problem(cfg, build_beta);
    acfg.validate(built.admm);

    AdmmSolveReport rep;
    if (is_plain) {
      rep = admm_solve_plain(built.admm, built.x0, built.y0, built.z0, acfg.beta,
                             acfg.lambda, acfg.epsilon, acfg.max_iters, acfg.pi);
    } else {
      auto engine = make_admm_engine(espec, cfg.lambda, acfg.beta);
      rep = admm_ls_solve(built.admm, built.x0, built.y0, built.z0, acfg, *engine);
    }
    res.converged = rep.status == SolveStatus::Converged;
    res.iterations = rep.iterations();
    res.prox1 = rep.counters.prox1;
    res.res_norm = rep.trace.empty() ? 0.0 : rep.trace.back().res_norm;
    res.merit = rep.final_state.auglag;
    res.objective = res.merit;
    res.time_s = rep.trace.empty() ? 0.0 : rep.trace.back().time_s;
    res.step_final = rep.beta_final;
    res.adjustments = rep.step_adjustments;
    res.trace = std::move(rep.trace);

    res.summary["certificate"] = nullptr;
    if (rep.certificate) {
      const auto& c = *rep.certificate;
      res.summary["certificate"] = {{"res_norm", c.res_norm},
                                    {"primal_bound", c.primal_bound},
                                    {"dual_g_surrogate", c.dual_g_surrogate},
                                    {"dual_g_bound", c.dual_g_bound},
                                    {"beta", c.beta},
                                    {"pi", c.pi}};
    }
    res.summary["counters"] = {{"prox1", rep.counters.prox1},
                               {"prox2", rep.counters.prox2},
                               {"value1", rep.counters.value1},
                               {"value2", rep.counters.value2}};
  }

  res.summary["schema"] = 1;
  res.summary["status"] = res.converged ? "converged" : "max_iters";
  res.summary["iterations"] = res.iterations;
  res.summary["res_norm"] = res.res_norm;
  res.summary["merit"] = res.merit;
  res.summary["objective"] = res.objective;
  res.summary["step_final"] = res.step_final;
  res.summary["adjustments"] = res.adjustments;
  res.summary["time_s"] = res.time_s;
  res.summary["config"] = {{"problem", cfg.problem}, {"algorithm", cfg.algorithm},
                           {"engine", cfg.engine},   {"lambda", cfg.lambda},
                           {"epsilon", cfg.epsilon}, {"seed", cfg.seed},
                           {"adaptive", cfg.adaptive}};
  return res;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "k,res_norm,merit,tau,backtracks,oracle_calls,time_s\n";
  out.precision(17);
  for (const auto& row : trace)
    out << row.k << ',' << row.res_norm << ',' << row.merit << ',' << row.tau << ','
        << row.backtracks << ',' << row.prox1_calls << ',' << row.time_s << '\n';
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

int cmd_run(const RunConfig& cfg) {
  try {
    if (cfg.out_dir.empty()) throw ConfigError("--out directory is required");
    std::filesystem::create_directories(cfg.out_dir);
    const RunResult res = run_once(cfg);
    write_file_atomic(cfg.out_dir + "/trace.csv", trace_to_csv(res.trace));
    write_file_atomic(cfg.out_dir + "/summary.json", res.summary.dump(2) + "\n");
    std::cout << (res.converged ? "converged" : "max_iters") << " in "
              << res.iterations << " iterations, " << res.prox1
              << " phi1-prox calls, residual " << res.res_norm << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_compare(const RunConfig& base, const std::vector<std::string>& engines,
                int seeds, const std::string& out_dir,
                std::vector<CompareRow>* rows_out) {
  try {
    if (engines.empty()) throw ConfigError("at least one engine is required");
    if (seeds < 1) throw ConfigError("seeds must be >= 1");
    if (out_dir.empty()) throw ConfigError("--out directory is required");
    std::filesystem::create_directories(out_dir);

    struct Task {
      std::size_t engine_idx;
      int seed_idx;
    };
    std::vector<Task> tasks;
    for (std::size_t e = 0; e < engines.size(); ++e)
      for (int s = 0; s < seeds; ++s) tasks.push_back({e, s});
    std::vector<RunResult> results(tasks.size());
    std::vector<std::string> errors(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        RunConfig cfg = base;
        cfg.engine = engines[tasks[i].engine_idx];
        cfg.seed = base.seed + static_cast<std::uint64_t>(tasks[i].seed_idx);
        try {
          results[i] = run_once(cfg);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    const int nthreads = thread_budget(static_cast<int>(tasks.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (!errors[i].empty())
        throw Error("run failed (engine " + engines[tasks[i].engine_idx] + ", seed " +
                    std::to_string(tasks[i].seed_idx) + "): " + errors[i]);

    auto result_at = [&](std::size_t e, int s) -> const RunResult& {
      return results[e * static_cast<std::size_t>(seeds) + static_cast<std::size_t>(s)];
    };

    std::vector<CompareRow> rows;
    std::ostringstream csv;
    csv << "engine,seed,converged,prox1_calls,objective\n";
    csv.precision(17);
    for (std::size_t e = 0; e < engines.size(); ++e) {
      CompareRow row;
      row.engine = engines[e];
      row.runs = seeds;
      std::vector<double> counts, rel_obj;
      for (int s = 0; s < seeds; ++s) {
        const RunResult& r = result_at(e, s);
        csv << engines[e] << ',' << (base.seed + static_cast<std::uint64_t>(s)) << ','
            << (r.converged ? 1 : 0) << ',' << r.prox1 << ',' << r.objective << '\n';
        if (r.converged) {
          ++row.converged;
          counts.push_back(static_cast<double>(r.prox1));
        }
        const RunResult& ref = result_at(0, s);
        rel_obj.push_back((r.objective - ref.objective) /
                          std::max(1.0, std::abs(ref.objective)));
      }
      row.q25 = quantile(counts, 0.25);
      row.median = quantile(counts, 0.5);
      row.q75 = quantile(counts, 0.75);
      row.rel_objective_median = quantile(rel_obj, 0.5);
      rows.push_back(row);
    }

    nlohmann::json summary;
    summary["schema"] = 1;
    summary["seeds"] = seeds;
    summary["baseline"] = engines[0];
    for (const auto& row : rows)
      summary["engines"].push_back({{"engine", row.engine},
                                    {"runs", row.runs},
                                    {"converged", row.converged},
                                    {"prox1_q25", row.q25},
                                    {"prox1_median", row.median},
                                    {"prox1_q75", row.q75},
                                    {"rel_objective_median", row.rel_objective_median}});
    write_file_atomic(out_dir + "/compare.csv", csv.str());
    write_file_atomic(out_dir + "/summary.json", summary.dump(2) + "\n");

    std::cout << "engine            runs conv  p25      median   p75      rel_obj_median\n";
    for (const auto& row : rows) {
      std::ostringstream line;
      line.setf(std::ios::left);
      line.width(18);
      line << row.engine;
      std::cout << line.str() << row.runs << "   " << row.converged << "    " << row.q25
                << "   " << row.median << "   " << row.q75 << "   "
                << row.rel_objective_median << "\n";
    }
    if (rows_out) *rows_out = rows;
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace splitls::bench
