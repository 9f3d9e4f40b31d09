#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <utility>

#include "netmimo/profile.hpp"
#include "netmimo/system.hpp"

namespace netmimo {

// One draw of the channel and its MMSE decomposition. h == h_hat + h_err
// holds bitwise: the raw channel is stored as the sum of its parts.
struct ChannelSample {
  Eigen::MatrixXcd h;      // raw channel, N x K
  Eigen::MatrixXcd h_hat;  // MMSE estimate from the pilot observation
  Eigen::MatrixXcd h_err;  // estimation error
};

// Draws channels through the full pilot-observation path: h ~ CN(0, v),
// pilot noise s ~ CN(0, 1 + sigma2_i), observation r = sqrt(tau*snr)*h + s,
// scalar MMSE estimate h_hat = sqrt(tau*snr)*v/(tau*snr*v + 1 + sigma2_i) * r.
// The effective channel is Kz^{-1/2} * h_hat.
//
// Every draw consumes exactly 4*N*K normals in a fixed order, so two
// samplers for the same dimensions fed the same generator state see the
// same underlying randomness regardless of tau (common random numbers).
class EffectiveChannelSampler {
 public:
  EffectiveChannelSampler(const SystemConfig& cfg, const VarianceProfile& raw,
                          const QuantizationNoise& q, double tau);

  ChannelSample draw(std::mt19937_64& rng) const;
  // Fast path: only the normalized effective channel.
  void draw_effective(std::mt19937_64& rng, Eigen::MatrixXcd& out) const;

  const Eigen::VectorXd& kz_diag() const { return kz_; }

 private:
  Eigen::MatrixXd sqrt_half_v_;    // sqrt(v/2)
  Eigen::MatrixXd mmse_coef_;      // sqrt(tau*snr)*v / (tau*snr*v + 1 + sigma2)
  Eigen::VectorXd pilot_std_;      // sqrt((1 + sigma2)/2)
  Eigen::VectorXd inv_sqrt_kz_;
  Eigen::VectorXd kz_;
  double sqrt_tau_snr_ = 0.0;
};

// Convenience wrapper for one-off draws: (decomposition, effective channel).
std::pair<ChannelSample, Eigen::MatrixXcd> sample_effective_channel(
    const SystemConfig& cfg, const VarianceProfile& raw, const QuantizationNoise& q,
    double tau, std::mt19937_64& rng);

struct MonteCarloEstimate {
  double mean = 0.0;     // nats per channel use per receive antenna
  double std_err = 0.0;
  std::int64_t n_samples = 0;  // samples contributing (rejections excluded)
  std::uint64_t seed = 0;
};

// Deterministic per-sample substream seed: SplitMix64 of the master seed
// keyed by the sample index. Sample i is reproducible in isolation.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

// Sample mean of (1/N) log det(I + snr * Heff Heff^H) over n_samples draws.
// The log-det is evaluated on the smaller Gram form via complex Cholesky.
// Non-finite samples are rejected; more than 0.1% rejections is an error.
// Results are bit-identical for a given (seed, n_samples, config), for any
// worker count: per-sample values land in an indexed buffer and are reduced
// in order.
MonteCarloEstimate estimate_rate(const SystemConfig& cfg, const VarianceProfile& raw,
                                 const QuantizationNoise& q, double tau,
                                 std::int64_t n_samples, std::uint64_t seed, int workers = 1);

// (1 - tau/T) * estimate_rate; tau == T gives exactly zero.
MonteCarloEstimate estimate_net_rate(const SystemConfig& cfg, const VarianceProfile& raw,
                                     const QuantizationNoise& q, double tau,
                                     std::int64_t n_samples, std::uint64_t seed,
                                     int workers = 1);

}  // namespace netmimo
