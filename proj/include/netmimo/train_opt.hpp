#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "netmimo/profile.hpp"
#include "netmimo/system.hpp"

namespace netmimo {

enum class ClampStatus { None, AtK, AtT };

struct TrainingOptimum {
  double tau_star = 0.0;       // clamped to [K, T]
  double net_rate = 0.0;       // net rate at tau_star, nats/channel use/antenna
  std::pair<double, double> bracket{0.0, 0.0};
  int iterations = 0;
  ClampStatus clamped = ClampStatus::None;
  double tau_unclamped = 0.0;  // root of the stationarity condition on (0, T]
  int tau_star_int = 0;        // better of floor/ceil of tau_star within [K, T]
};

struct OptimizeDetOptions {
  double tol_tau = 1e-3;        // bracket width target
  double residual_rel = 1e-8;   // |d/dtau net rate| <= residual_rel * rate/T
  int max_bisect = 200;
  int precheck_points = 9;      // coarse concavity diagnostic grid
};

// Maximizes (1 - tau/T) * rate_det(tau) by bisecting the stationarity
// condition (1 - tau/T) R'(tau) = R(tau)/T on (0, T], then clamping the
// root to [K, T]. A coarse grid first checks that the net-rate derivative
// is numerically decreasing (concavity diagnostic); a violation aborts
// rather than returning a false root.
TrainingOptimum optimize_det(const SystemConfig& cfg, const VarianceProfile& raw,
                             const QuantizationNoise& q, const OptimizeDetOptions& opt = {});

// Exhaustive search over a training-length grid in [K, T] using Monte Carlo
// net-rate estimates with a shared master seed (common random numbers
// across grid points). Ties pick the smallest tau.
TrainingOptimum optimize_mc(const SystemConfig& cfg, const VarianceProfile& raw,
                            const QuantizationNoise& q, const std::vector<double>& grid,
                            std::int64_t n_samples, std::uint64_t seed, int workers = 1);

struct ConvergenceRow {
  int scale = 1;
  double tau_gap = 0.0;     // |tau*_mc - tau*_det|
  double rate_gap = 0.0;    // |net rate at tau*_mc (MC) - net rate at tau*_det (det)|
  double mc_std_err = 0.0;  // std error of the MC net rate at its optimum
};

// Re-runs the det/MC optimizer pair on scaled-up copies of the system to
// show the two optima approach each other as the matrices grow. Scale s
// tiles the raw profile as an s x s block grid (users and cells both scale
// by s), multiplies L and C by s and keeps P, T, M fixed; this leaves the
// per-sub-carrier SNR sums, the quantization noise and the fixed-point
// spectral parameter unchanged, so s only grows the system. The scaled
// quantization noise is exactly the tiled input vector.
std::vector<ConvergenceRow> convergence_report(const SystemConfig& cfg,
                                               const VarianceProfile& raw,
                                               const QuantizationNoise& q,
                                               const std::vector<int>& scales,
                                               std::int64_t n_samples, std::uint64_t seed,
                                               int workers = 1, double grid_step = 1.0);

}  // namespace netmimo
