#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "netmimo/system.hpp"

namespace netmimo {

// Bad config file, bad preset name, out-of-range parameters. Exit code 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class SweepKind { Snr, Tau, Backhaul };

struct ExperimentSpec {
  // System at the sweep's base point. power is derived from snr_db except
  // when the sweep itself varies SNR.
  int cells = 3;
  int antennas_per_bs = 2;
  int users = 3;
  int subcarriers = 1;
  double coherence_length = 1000.0;
  double snr_db = 0.0;
  double backhaul_bits = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd path_loss;  // cells x users

  SweepKind sweep = SweepKind::Snr;
  double sweep_min = -10.0;
  double sweep_max = 30.0;
  double sweep_step = 2.0;
  double tau = 40.0;  // fixed training length for snr/backhaul sweeps

  bool method_det = true;
  bool method_mc = false;
  std::int64_t mc_samples = 10000;
  std::uint64_t mc_seed = 1;
  double grid_step = 1.0;  // tau grid step for the MC optimizer
  double tol_tau = 1e-3;

  std::string out_prefix = "netmimo";
  std::string label;  // appended to the output file name, e.g. "_C1"
  int workers = 1;

  SystemConfig base_config() const;
  std::vector<double> sweep_values() const;
  void validate() const;  // throws ValidationError
  // FNV-1a over the canonical serialization; recorded in output headers.
  std::uint64_t config_hash() const;
};

// Parses the sectioned key-value config format. Errors carry the line
// number. Exactly one spec per file.
ExperimentSpec load_config(const std::string& path);

// Bundled experiment presets; see README for the parameter sets. A preset
// may expand to several specs (one output file each).
std::vector<ExperimentSpec> sweep_preset(const std::string& name);
std::vector<ExperimentSpec> optimize_preset(const std::string& name);

// Fixed-tau sweep over SNR, training length or backhaul capacity; writes
// <prefix><label>.csv. Rows appear in sweep order regardless of worker
// count. Returns 0, or 2 if any row failed numerically (run continues).
int run_sweep(const ExperimentSpec& spec, std::ostream& log);

// Per sweep value, optimizes the training length: deterministic-equivalent
// bisection, plus the Monte Carlo grid search when MC is enabled. Same exit
// convention as run_sweep.
int run_optimum(const ExperimentSpec& spec, std::ostream& log);

// Renders sweep CSVs to a single SVG. kind "rate" plots the net-rate
// columns, "tau" the optimal-training-length columns. Refuses to write a
// file when no finite data points exist.
void emit_plot(const std::vector<std::string>& csv_paths, const std::string& kind,
               const std::string& out_svg);

}  // namespace netmimo
