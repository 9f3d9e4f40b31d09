#include "netmimo/monte_carlo.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netmimo/parallel.hpp"

namespace netmimo {

namespace {

void require_inputs(const SystemConfig& cfg, const VarianceProfile& raw,
                    const QuantizationNoise& q, double tau, const char* what) {
  cfg.validate();
  if (raw.kind != ProfileKind::Raw)
    throw std::invalid_argument(std::string(what) + ": raw profile required");
  if (raw.n_antennas() != cfg.n_antennas() || raw.users() != cfg.users)
    throw std::invalid_argument(std::string(what) + ": profile/config dimension mismatch");
  if (q.sigma2.size() != raw.m.rows())
    throw std::invalid_argument(std::string(what) + ": sigma2 length mismatch");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::domain_error(std::string(what) + ": tau must be positive");
}

}  // namespace

EffectiveChannelSampler::EffectiveChannelSampler(const SystemConfig& cfg,
                                                 const VarianceProfile& raw,
                                                 const QuantizationNoise& q, double tau) {
  require_inputs(cfg, raw, q, tau, "EffectiveChannelSampler");
  const double rho = cfg.snr();
  sqrt_tau_snr_ = std::sqrt(tau * rho);
  sqrt_half_v_ = (raw.m / 2.0).cwiseSqrt();
  pilot_std_ = ((q.sigma2.array() + 1.0) / 2.0).sqrt();
  mmse_coef_.resizeLike(raw.m);
  for (Eigen::Index i = 0; i < raw.m.rows(); ++i)
    for (Eigen::Index j = 0; j < raw.m.cols(); ++j)
      mmse_coef_(i, j) = sqrt_tau_snr_ * raw.m(i, j) /
                         (tau * rho * raw.m(i, j) + 1.0 + q.sigma2(i));
  EffectiveProfile eff = effective_profile(cfg, raw, q, tau);
  kz_ = eff.kz.k;
  inv_sqrt_kz_ = kz_.cwiseSqrt().cwiseInverse();
}

ChannelSample EffectiveChannelSampler::draw(std::mt19937_64& rng) const {
  const Eigen::Index n = sqrt_half_v_.rows();
  const Eigen::Index k = sqrt_half_v_.cols();
  std::normal_distribution<double> gauss(0.0, 1.0);
  ChannelSample s;
  s.h.resize(n, k);
  s.h_hat.resize(n, k);
  s.h_err.resize(n, k);
  // Channel first, pilot noise second; column-major within each block.
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      s.h(i, j) = sqrt_half_v_(i, j) * std::complex<double>(gauss(rng), gauss(rng));
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> noise =
          pilot_std_(i) * std::complex<double>(gauss(rng), gauss(rng));
      const std::complex<double> obs = sqrt_tau_snr_ * s.h(i, j) + noise;
      s.h_hat(i, j) = mmse_coef_(i, j) * obs;
      s.h_err(i, j) = s.h(i, j) - s.h_hat(i, j);
    }
  // Re-store the raw channel as the sum of its parts so the decomposition
  // holds bitwise (differs from the draw by at most one rounding).
  s.h = s.h_hat + s.h_err;
  return s;
}

void EffectiveChannelSampler::draw_effective(std::mt19937_64& rng, Eigen::MatrixXcd& out) const {
  const Eigen::Index n = sqrt_half_v_.rows();
  const Eigen::Index k = sqrt_half_v_.cols();
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.resize(n, k);
  // Same consumption order as draw().
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, j) = sqrt_half_v_(i, j) * std::complex<double>(gauss(rng), gauss(rng));
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> noise =
          pilot_std_(i) * std::complex<double>(gauss(rng), gauss(rng));
      const std::complex<double> obs = sqrt_tau_snr_ * out(i, j) + noise;
      out(i, j) = inv_sqrt_kz_(i) * mmse_coef_(i, j) * obs;
    }
}

std::pair<ChannelSample, Eigen::MatrixXcd> sample_effective_channel(
    const SystemConfig& cfg, const VarianceProfile& raw, const QuantizationNoise& q,
    double tau, std::mt19937_64& rng) {
  EffectiveChannelSampler sampler(cfg, raw, q, tau);
  ChannelSample s = sampler.draw(rng);
  Eigen::MatrixXcd heff = s.h_hat;
  for (Eigen::Index i = 0; i < heff.rows(); ++i)
    heff.row(i) /= std::sqrt(sampler.kz_diag()(i));
  return {std::move(s), std::move(heff)};
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MonteCarloEstimate estimate_rate(const SystemConfig& cfg, const VarianceProfile& raw,
                                 const QuantizationNoise& q, double tau,
                                 std::int64_t n_samples, std::uint64_t seed, int workers) {
  require_inputs(cfg, raw, q, tau, "estimate_rate");
  if (n_samples < 1) throw std::invalid_argument("estimate_rate: n_samples must be >= 1");
  const EffectiveChannelSampler sampler(cfg, raw, q, tau);
  const double rho = cfg.snr();
  const Eigen::Index n = cfg.n_antennas();
  const Eigen::Index k = cfg.users;
  const bool gram_on_users = k <= n;  // log det over the smaller Gram matrix
  const Eigen::Index dim = gram_on_users ? k : n;

  std::vector<double> vals(static_cast<std::size_t>(n_samples));
  detail::parallel_for(n_samples, workers, [&](std::int64_t idx) {
    thread_local Eigen::MatrixXcd heff, gram;
    std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(idx)));
    sampler.draw_effective(rng, heff);
    gram.resize(dim, dim);
    if (gram_on_users)
      gram.noalias() = heff.adjoint() * heff;
    else
      gram.noalias() = heff * heff.adjoint();
    gram *= rho;
    gram.diagonal().array() += std::complex<double>(1.0, 0.0);
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    double logdet = std::numeric_limits<double>::quiet_NaN();
    if (llt.info() == Eigen::Success) {
      logdet = 0.0;
      for (Eigen::Index d = 0; d < dim; ++d)
        logdet += 2.0 * std::log(std::real(llt.matrixL()(d, d)));
    }
    vals[static_cast<std::size_t>(idx)] = logdet / static_cast<double>(n);
  });

  // Ordered reduction; rejected samples are skipped deterministically.
  std::int64_t rejected = 0;
  double sum = 0.0;
  for (double v : vals) {
    if (std::isfinite(v))
      sum += v;
    else
      ++rejected;
  }
  if (rejected * 1000 > n_samples)
    throw std::runtime_error("estimate_rate: more than 0.1% of samples rejected");
  const std::int64_t n_acc = n_samples - rejected;
  const double mean = sum / static_cast<double>(n_acc);
  double ss = 0.0;
  for (double v : vals)
    if (std::isfinite(v)) ss += (v - mean) * (v - mean);
  const double std_err =
      n_acc > 1 ? std::sqrt(ss / (static_cast<double>(n_acc) * (n_acc - 1.0))) : 0.0;
  return {mean, std_err, n_acc, seed};
}

MonteCarloEstimate estimate_net_rate(const SystemConfig& cfg, const VarianceProfile& raw,
                                     const QuantizationNoise& q, double tau,
                                     std::int64_t n_samples, std::uint64_t seed, int workers) {
  if (!(tau <= cfg.coherence_length))
    throw std::domain_error("estimate_net_rate: tau must not exceed the coherence length");
  MonteCarloEstimate est = estimate_rate(cfg, raw, q, tau, n_samples, seed, workers);
  const double factor = 1.0 - tau / cfg.coherence_length;
  est.mean *= factor;
  est.std_err *= factor;
  return est;
}

}  // namespace netmimo
