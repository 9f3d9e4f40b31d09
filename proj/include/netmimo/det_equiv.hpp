#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "netmimo/profile.hpp"
#include "netmimo/system.hpp"

namespace netmimo {

struct FixedPointOptions {
  double tol = 1e-12;   // sup-norm relative change of t between iterations
  int max_iter = 10000;
};

// Thrown when the fixed-point iteration fails to reach tolerance; carries
// the last residual so callers can report how close it got.
struct FixedPointError : std::runtime_error {
  FixedPointError(const std::string& what, double last_residual, int iters)
      : std::runtime_error(what), residual(last_residual), iterations(iters) {}
  double residual;
  int iterations;
};

// Converged solution of the large-system fixed point at z = -L/(K*P):
//   t_i = 1 / (interaction_i + L/(K*P)),
//   interaction_i = (1/K) * sum_j vbar_ij / (1 + delta_j),
//   delta_j = (1/K) * sum_i vbar_ij * t_i.
// t_i is stored as the exact reciprocal of interaction_i + z_abs.
struct DetEquivSolution {
  Eigen::VectorXd t;            // length N
  Eigen::VectorXd delta;        // length K
  Eigen::VectorXd interaction;  // length N, see above
  double z_abs = 0.0;           // L/(K*P)
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Plain fixed-point iteration from t = (KP/L) * 1, with 0.5 damping enabled
// once the residual has grown over two consecutive iterations. Throws
// FixedPointError when max_iter is exhausted.
DetEquivSolution solve_fixed_point(const VarianceProfile& effective, double power,
                                   int subcarriers, const FixedPointOptions& opt = {});

// Deterministic-equivalent ergodic rate, nats per channel use per receive
// antenna. Requires a converged solution. Zero profile gives exactly zero.
double rate_det(const DetEquivSolution& sol);

// Analytic d/d tau of rate_det, evaluated from the effective-profile
// derivative and the fixed point at the same tau:
//   (1/N) * sum_j [(1/K) sum_i dvbar_ij t_i] / (1 + delta_j).
double rate_det_derivative(const VarianceProfile& effective_derivative,
                           const DetEquivSolution& sol);

struct RegularityCheck {
  bool is_doubly_regular = false;
  double common_mean = 0.0;  // grand mean of the profile entries
};

// Doubly regular: square profile (N == K) whose row means and column means
// all agree with the grand mean within rel_tol.
RegularityCheck check_doubly_regular(const VarianceProfile& effective, double rel_tol = 1e-10);

// Closed-form scalar fixed point for a doubly regular profile with common
// mean k_mean: t = 2x / (1 + sqrt(1 + 4*x*k_mean)), x = K*P/L. Tends to
// KP/L as k_mean -> 0 (the zero-profile fixed point).
double doubly_regular_solution(double k_mean, int users, double power, int subcarriers);

// Analytic d^2/d tau^2 of the deterministic-equivalent rate for a doubly
// regular effective profile; strictly negative, which certifies concavity
// of the rate in the training length. Refuses profiles that fail the
// regularity check.
double doubly_regular_curvature(const SystemConfig& cfg, const VarianceProfile& raw,
                                const QuantizationNoise& q, double tau);

}  // namespace netmimo
