#include <CLI11.hpp>

#include "bench.hpp"

using splitls::bench::RunConfig;

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for the linesearch DRS/ADMM solvers"};
  app.require_subcommand(1);

  std::string config_path, out_dir, engine, algorithm;
  double gamma = 0.0, beta = 0.0, epsilon = -1.0;
  long seed = -1, max_iters = -1;
  std::string engines_csv;
  int seeds = 1;

  auto* run = app.add_subcommand("run", "run one configuration, emit trace + summary");
  run->add_option("--config", config_path, "key = value config file")->required();
  run->add_option("--engine", engine, "direction engine override");
  run->add_option("--algorithm", algorithm, "algorithm override");
  run->add_option("--gamma", gamma, "stepsize override");
  run->add_option("--beta", beta, "penalty override");
  run->add_option("--seed", seed, "seed override");
  run->add_option("--epsilon", epsilon, "tolerance override");
  run->add_option("--max-iters", max_iters, "iteration cap override");
  run->add_option("--out", out_dir, "output directory")->required();

  auto* compare = app.add_subcommand("compare", "aggregate engines over seeds");
  compare->add_option("--config", config_path, "key = value config file")->required();
  compare->add_option("--engines", engines_csv, "comma-separated engine list")->required();
  compare->add_option("--seeds", seeds, "number of seeds");
  compare->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = splitls::bench::parse_config_file(config_path);
    if (!engine.empty()) cfg.engine = engine;
    if (!algorithm.empty()) cfg.algorithm = algorithm;
    if (gamma > 0) cfg.gamma = gamma;
    if (beta > 0) cfg.beta = beta;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (epsilon >= 0) cfg.epsilon = epsilon;
    if (max_iters > 0) cfg.max_iters = max_iters;
    cfg.out_dir = out_dir;

    if (app.got_subcommand(run)) return splitls::bench::cmd_run(cfg);

    std::vector<std::string> engines;
    std::stringstream ss(engines_csv);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) engines.push_back(item);
    return splitls::bench::cmd_compare(cfg, engines, seeds, out_dir);
  } catch (const splitls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
