// dtasep: run disordered-TASEP experiments from a configuration file.
//
//   dtasep <experiment> [--config FILE] [--output DIR] [--workers N] [--seed S] [--dump-config]
//   dtasep run --config FILE          (experiment taken from [run] experiment)
//   dtasep verify [--criteria 1,5,8] [--workers N] [--seed S]
//
// Exit codes: 0 success, 1 validation, 2 resource, 3 acceptance failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dtasep/cli/config.hpp"
#include "dtasep/cli/run.hpp"
#include "dtasep/errors.hpp"
#include "dtasep/parallel.hpp"
#include "dtasep/verify/criteria.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string output;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  bool dump_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "Configuration file");
  cmd->add_option("-o,--output", f.output, "Output directory (overrides [run] output)");
  cmd->add_option("-w,--workers", f.workers, "Worker threads (overrides [run] workers)")->check(CLI::PositiveNumber);
  cmd->add_option("-s,--seed", f.seed, "Master seed (overrides [run] master_seed)");
  cmd->add_flag("--dump-config", f.dump_config, "Print the canonical configuration and exit");
}

int run_experiment(const CommonFlags& f, std::optional<dtasep::cli::Experiment> requested) {
  using namespace dtasep::cli;
  const std::string text = f.config.empty() ? std::string() : read_file(f.config);
  RunConfig cfg = parse_config(text);
  if (!f.output.empty()) cfg.output = f.output;
  if (f.workers) cfg.workers = f.workers;
  if (f.seed) cfg.master_seed = *f.seed;
  const auto experiment = requested ? requested : cfg.experiment;
  if (!experiment) throw ConfigError("run.experiment", "required when no experiment subcommand is given");
  if (f.dump_config) {
    RunConfig shown = cfg;
    shown.experiment = experiment;
    std::cout << canonical_config(shown);
    return 0;
  }
  const auto res = dtasep::cli::run(cfg, *experiment, text);
  std::cout << "wrote " << res.artifacts.size() + 1 << " files to " << res.directory.string() << "\n";
  return 0;
}

int run_verify(const std::vector<int>& criteria, unsigned workers, std::optional<std::uint64_t> seed) {
  dtasep::verify::VerifyOptions opt;
  opt.workers = workers ? workers : dtasep::default_workers();
  if (seed) opt.master_seed = *seed;
  bool all = true;
  for (int id : criteria) {
    const auto res = dtasep::verify::run_criterion(id, opt);
    for (const auto& d : res.details) std::cout << "    " << d << "\n";
    std::cout << dtasep::verify::summary_line(res) << std::endl;
    all = all && res.pass;
  }
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered TASEP: flux, last-passage and plateau experiments"};
  app.require_subcommand(1);

  std::vector<CommonFlags> flags(dtasep::cli::experiment_names().size() + 1);
  std::vector<std::pair<CLI::App*, std::optional<dtasep::cli::Experiment>>> commands;
  std::size_t slot = 0;
  for (const auto& [exp, name] : dtasep::cli::experiment_names()) {
    auto* cmd = app.add_subcommand(name, "Run the " + name + " experiment");
    add_common(cmd, flags[slot++]);
    commands.emplace_back(cmd, exp);
  }
  auto* generic = app.add_subcommand("run", "Run the experiment named in the configuration");
  add_common(generic, flags[slot]);
  commands.emplace_back(generic, std::nullopt);

  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8};
  unsigned verify_workers = 0;
  std::optional<std::uint64_t> verify_seed;
  auto* verify = app.add_subcommand("verify", "Check the acceptance criteria (exit 3 on failure)");
  verify->add_option("--criteria", criteria, "Criterion numbers")->delimiter(',')->check(CLI::Range(1, 8));
  verify->add_option("-w,--workers", verify_workers, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("-s,--seed", verify_seed, "Master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (verify->parsed()) return run_verify(criteria, verify_workers, verify_seed);
    for (std::size_t k = 0; k < commands.size(); ++k)
      if (commands[k].first->parsed()) return run_experiment(flags[k], commands[k].second);
  } catch (const dtasep::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource error: out of memory\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
