// adascale_lab: train, sweep, verify and gain-compare front end.
//
// Exit codes: 0 success or PASS, 1 FAIL, 2 usage or config error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adascale/cli/commands.hpp"
#include "adascale/errors.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<unsigned> seeds;
  std::string seed_list;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "Experiment config file");
  if (needs_config) opt->required();
  cmd->add_option("--out", c.out, "Output directory (overrides run.out)");
  auto* n = cmd->add_option("--seeds", c.seeds, "Use seeds 1..N")->check(CLI::PositiveNumber);
  auto* list = cmd->add_option("--seed-list", c.seed_list, "Comma-separated seeds");
  n->excludes(list);
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

adascale::cli::ExperimentSpec load(const Common& c) {
  auto spec = adascale::cli::load_spec(c.config);
  if (!c.out.empty()) spec.out_dir = c.out;
  if (c.seeds) {
    spec.seeds.clear();
    for (unsigned s = 1; s <= *c.seeds; ++s) spec.seeds.push_back(s);
  }
  if (!c.seed_list.empty()) spec.seeds = adascale::cli::parse_seed_list(c.seed_list);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace adascale::cli;
  CLI::App app{"AdaScale SGD desk-scale lab"};
  app.require_subcommand(1);

  Common train_args, sweep_args, compare_args;
  auto* train = app.add_subcommand("train", "Train every seed; write traces and a summary");
  add_common(train, train_args, true);
  auto* sweep = app.add_subcommand("sweep", "Train along one sweep axis; write matrix.csv");
  add_common(sweep, sweep_args, true);
  auto* compare = app.add_subcommand("gain-compare", "Online vs oracle vs analytic gain");
  add_common(compare, compare_args, true);

  std::string suite = "all";
  unsigned verify_threads = 1;
  auto* verify = app.add_subcommand("verify", "Run acceptance suites");
  verify->add_option("--suite", suite, "thm1|thm2|thm3|prop1|prop2|gain|alignment|all");
  verify->add_option("--threads", verify_threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify) return cmd_verify(suite, {verify_threads});
    if (*train) return cmd_train(load(train_args), {train_args.threads});
    if (*sweep) return cmd_sweep(load(sweep_args), {sweep_args.threads});
    if (*compare) return cmd_gain_compare(load(compare_args), {compare_args.threads});
  } catch (const adascale::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
