// Command line front end. Exit codes: 0 success, 1 usage or validation
// error, 2 numerical failure (reported per row in the output when the run
// itself can continue).
#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "netmimo/experiment.hpp"
#include "netmimo/version.hpp"

namespace {

struct RunOpts {
  std::string config;
  std::string preset;
  std::uint64_t seed = 1;
  std::int64_t samples = 10000;
  std::string out;
  int workers = 1;
};

void add_run_flags(CLI::App* cmd, RunOpts& o) {
  auto* cfg = cmd->add_option("--config", o.config, "experiment config file")
                  ->check(CLI::ExistingFile);
  auto* pre = cmd->add_option("--preset", o.preset,
                              "bundled experiment (fig3, fig4, fig5, fig6)");
  cfg->excludes(pre);
  cmd->add_option("--seed", o.seed, "master seed for the Monte Carlo streams");
  cmd->add_option("--samples", o.samples, "Monte Carlo samples per point")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output file prefix");
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
}

std::vector<netmimo::ExperimentSpec> resolve_specs(const RunOpts& o, bool optimize) {
  if (!o.config.empty()) return {netmimo::load_config(o.config)};
  if (!o.preset.empty())
    return optimize ? netmimo::optimize_preset(o.preset) : netmimo::sweep_preset(o.preset);
  throw netmimo::ValidationError("either --config or --preset is required");
}

int run(const CLI::App* cmd, const RunOpts& o, bool optimize) {
  std::vector<netmimo::ExperimentSpec> specs = resolve_specs(o, optimize);
  int rc = 0;
  for (netmimo::ExperimentSpec& spec : specs) {
    if (cmd->count("--seed")) spec.mc_seed = o.seed;
    if (cmd->count("--samples")) spec.mc_samples = o.samples;
    if (cmd->count("--out")) spec.out_prefix = o.out;
    if (cmd->count("--workers")) spec.workers = o.workers;
    const int r = optimize ? netmimo::run_optimum(spec, std::cout)
                           : netmimo::run_sweep(spec, std::cout);
    rc = std::max(rc, r);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(netmimo::kToolName) +
               " - net uplink rate of a multi-cell system with compressed backhaul"};
  app.set_version_flag("--version", std::string(netmimo::kToolVersion));
  app.require_subcommand(1);

  RunOpts sweep_opts, opt_opts;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "net rate at a fixed training length over an SNR, training-length "
               "or backhaul sweep");
  add_run_flags(sweep, sweep_opts);
  CLI::App* optimize = app.add_subcommand(
      "optimize", "optimal training length and the net rate it achieves, per sweep point");
  add_run_flags(optimize, opt_opts);

  std::vector<std::string> plot_inputs;
  std::string plot_kind = "rate";
  std::string plot_out = "plot.svg";
  CLI::App* plot = app.add_subcommand("plot", "render sweep output files to an SVG");
  plot->add_option("csv", plot_inputs, "input CSV files")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--kind", plot_kind, "rate or tau")
      ->check(CLI::IsMember({"rate", "tau"}));
  plot->add_option("--out", plot_out, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sweep->parsed()) return run(sweep, sweep_opts, false);
    if (optimize->parsed()) return run(optimize, opt_opts, true);
    netmimo::emit_plot(plot_inputs, plot_kind, plot_out);
    std::cout << plot_out << "\n";
    return 0;
  } catch (const netmimo::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
