#pragma once

#include <Eigen/Dense>

#include "netmimo/system.hpp"

namespace netmimo {

// Stage of the estimation pipeline a variance matrix describes. Operations
// check the kind of their inputs so a raw profile cannot silently stand in
// for an effective one.
enum class ProfileKind { Raw, Estimated, Error, Effective, EffectiveDerivative };

// N x K matrix of per-link variances, N = cells * antennas_per_bs. Row i
// belongs to receive antenna i, column j to user j. A raw profile replicates
// the path-loss rows across each cell's antenna block, so rows within a
// block are identical.
struct VarianceProfile {
  ProfileKind kind = ProfileKind::Raw;
  Eigen::MatrixXd m;

  int n_antennas() const { return static_cast<int>(m.rows()); }
  int users() const { return static_cast<int>(m.cols()); }
};

// Per-antenna variance of the additive noise that models lossy backhaul
// compression. Zero when the backhaul is uncompressed; constant within each
// cell's antenna block because a cell compresses all its antennas jointly.
struct QuantizationNoise {
  Eigen::VectorXd sigma2;  // length N, entries >= 0
};

// Diagonal of the total effective-noise covariance: thermal noise plus
// quantization noise plus residual self-interference from channel
// estimation error. Entries are >= 1.
struct NoiseCovarianceDiag {
  Eigen::VectorXd k;  // length N
};

// Split of a raw profile into MMSE-estimate and estimation-error variances
// for a given training length. estimated.m + error.m == raw.m holds to
// machine precision (the error part is computed as the difference).
struct EstimationSplit {
  VarianceProfile estimated;
  VarianceProfile error;
};

// Variance profile of the normalized effective channel together with the
// noise covariance diagonal it was normalized by.
struct EffectiveProfile {
  VarianceProfile profile;
  NoiseCovarianceDiag kz;
};

VarianceProfile build_variance_profile(const PathLossMatrix& a, int antennas_per_bs);

// sigma2_i = (1 + snr * sum_j v_ij) / (2^(C/(M*L)) - 1); exactly zero for
// infinite backhaul capacity.
QuantizationNoise quantization_noise(const SystemConfig& cfg, const VarianceProfile& raw);

// MMSE estimation variances after tau channel uses of orthogonal training:
//   vhat_ij = tau*snr*v_ij^2 / (tau*snr*v_ij + 1 + sigma2_i)
// and vtilde = v - vhat. tau = 0 yields vhat = 0 (no training, all error).
EstimationSplit estimation_variances(const SystemConfig& cfg, const VarianceProfile& raw,
                                     const QuantizationNoise& q, double tau);

// vbar_ij = vhat_ij / k_i with k_i = 1 + sigma2_i + snr * sum_l vtilde_il.
EffectiveProfile effective_profile(const SystemConfig& cfg, const VarianceProfile& raw,
                                   const QuantizationNoise& q, double tau);

// Entrywise d vbar_ij / d tau, analytic. Nonnegative everywhere: training
// longer never degrades the effective link quality.
VarianceProfile effective_profile_derivative(const SystemConfig& cfg, const VarianceProfile& raw,
                                             const QuantizationNoise& q, double tau);

// Entrywise d^2 vbar_ij / d tau^2, analytic. Input to the concavity
// certificate for doubly regular profiles.
VarianceProfile effective_profile_second_derivative(const SystemConfig& cfg,
                                                    const VarianceProfile& raw,
                                                    const QuantizationNoise& q, double tau);

}  // namespace netmimo
