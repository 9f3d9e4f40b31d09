#pragma once

#include <Eigen/Dense>

#include <limits>

namespace netmimo {

// Scalar parameters of the multi-cell uplink. B cooperating cells with M
// antennas each receive K single-antenna users over L parallel sub-carriers;
// a coherence block spans T channel uses; each user spends total power P
// across the sub-carriers; every cell forwards its signal to the central
// processor over a backhaul link of C bits per channel use (C may be
// infinite, meaning uncompressed forwarding).
struct SystemConfig {
  int cells = 1;
  int antennas_per_bs = 1;
  int users = 1;
  int subcarriers = 1;
  double coherence_length = 1000.0;
  double power = 1.0;
  double backhaul_bits = std::numeric_limits<double>::infinity();

  int n_antennas() const { return cells * antennas_per_bs; }
  // Per-sub-carrier transmit SNR (noise power is normalized to one).
  double snr() const { return power / subcarriers; }

  // Throws std::invalid_argument on out-of-range fields. T >= K is required
  // so that at least one feasible training length exists.
  void validate() const;
};

// B x K inverse path losses between cells and users. Strictly positive,
// finite entries.
struct PathLossMatrix {
  Eigen::MatrixXd a;

  explicit PathLossMatrix(Eigen::MatrixXd values);

  int cells() const { return static_cast<int>(a.rows()); }
  int users() const { return static_cast<int>(a.cols()); }
};

// Three-cell, three-user example scenario bundled with the experiment
// presets (config preset id "paper-3x3").
PathLossMatrix example_path_loss_3x3();

double db_to_linear(double db);

}  // namespace netmimo
