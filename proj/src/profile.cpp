#include "netmimo/profile.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace netmimo {

namespace {

void require_kind(const VarianceProfile& p, ProfileKind k, const char* what) {
  if (p.kind != k) throw std::invalid_argument(std::string(what) + ": wrong profile kind");
}

void require_dims(const SystemConfig& cfg, const VarianceProfile& p, const char* what) {
  if (p.n_antennas() != cfg.n_antennas() || p.users() != cfg.users)
    throw std::invalid_argument(std::string(what) + ": profile does not match config dimensions");
}

void require_sigma(const Eigen::VectorXd& s, int n, const char* what) {
  if (static_cast<int>(s.size()) != n)
    throw std::invalid_argument(std::string(what) + ": sigma2 length mismatch");
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (!(s(i) >= 0.0) || !std::isfinite(s(i)))
      throw std::invalid_argument(std::string(what) + ": sigma2 entries must be >= 0 and finite");
}

void require_tau(double tau, const char* what) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::domain_error(std::string(what) + ": tau must be >= 0 and finite");
}

}  // namespace

VarianceProfile build_variance_profile(const PathLossMatrix& a, int antennas_per_bs) {
  if (antennas_per_bs < 1) throw std::invalid_argument("antennas_per_bs must be >= 1");
  const int b = a.cells();
  const int k = a.users();
  VarianceProfile p;
  p.kind = ProfileKind::Raw;
  p.m.resize(static_cast<Eigen::Index>(b) * antennas_per_bs, k);
  for (int i = 0; i < b * antennas_per_bs; ++i) p.m.row(i) = a.a.row(i / antennas_per_bs);
  return p;
}

QuantizationNoise quantization_noise(const SystemConfig& cfg, const VarianceProfile& raw) {
  require_kind(raw, ProfileKind::Raw, "quantization_noise");
  require_dims(cfg, raw, "quantization_noise");
  const int n = cfg.n_antennas();
  QuantizationNoise q;
  q.sigma2 = Eigen::VectorXd::Zero(n);
  if (std::isinf(cfg.backhaul_bits)) return q;  // uncompressed backhaul
  if (!(cfg.backhaul_bits > 0.0) || std::isnan(cfg.backhaul_bits))
    throw std::domain_error("backhaul capacity must be positive");
  const double bits_per_sample =
      cfg.backhaul_bits / (static_cast<double>(cfg.antennas_per_bs) * cfg.subcarriers);
  const double denom = std::expm1(bits_per_sample * std::numbers::ln2);  // 2^b - 1
  const double rho = cfg.snr();
  for (int i = 0; i < n; ++i) q.sigma2(i) = (1.0 + rho * raw.m.row(i).sum()) / denom;
  return q;
}

EstimationSplit estimation_variances(const SystemConfig& cfg, const VarianceProfile& raw,
                                     const QuantizationNoise& q, double tau) {
  require_kind(raw, ProfileKind::Raw, "estimation_variances");
  require_dims(cfg, raw, "estimation_variances");
  require_sigma(q.sigma2, cfg.n_antennas(), "estimation_variances");
  require_tau(tau, "estimation_variances");
  const double rho = cfg.snr();
  EstimationSplit out;
  out.estimated.kind = ProfileKind::Estimated;
  out.error.kind = ProfileKind::Error;
  out.estimated.m.resizeLike(raw.m);
  out.error.m.resizeLike(raw.m);
  for (Eigen::Index i = 0; i < raw.m.rows(); ++i) {
    const double s2 = q.sigma2(i);
    for (Eigen::Index j = 0; j < raw.m.cols(); ++j) {
      const double v = raw.m(i, j);
      const double est = tau * rho * v * v / (tau * rho * v + 1.0 + s2);
      out.estimated.m(i, j) = est;
      out.error.m(i, j) = v - est;  // conservative split by construction
    }
  }
  return out;
}

EffectiveProfile effective_profile(const SystemConfig& cfg, const VarianceProfile& raw,
                                   const QuantizationNoise& q, double tau) {
  EstimationSplit split = estimation_variances(cfg, raw, q, tau);
  const double rho = cfg.snr();
  EffectiveProfile out;
  out.profile.kind = ProfileKind::Effective;
  out.profile.m.resizeLike(raw.m);
  out.kz.k.resize(raw.m.rows());
  for (Eigen::Index i = 0; i < raw.m.rows(); ++i) {
    const double k_i = 1.0 + q.sigma2(i) + rho * split.error.m.row(i).sum();
    out.kz.k(i) = k_i;
    out.profile.m.row(i) = split.estimated.m.row(i) / k_i;
  }
  return out;
}

VarianceProfile effective_profile_derivative(const SystemConfig& cfg, const VarianceProfile& raw,
                                             const QuantizationNoise& q, double tau) {
  require_kind(raw, ProfileKind::Raw, "effective_profile_derivative");
  require_dims(cfg, raw, "effective_profile_derivative");
  require_sigma(q.sigma2, cfg.n_antennas(), "effective_profile_derivative");
  require_tau(tau, "effective_profile_derivative");
  const double rho = cfg.snr();
  VarianceProfile out;
  out.kind = ProfileKind::EffectiveDerivative;
  out.m.resizeLike(raw.m);
  for (Eigen::Index i = 0; i < raw.m.rows(); ++i) {
    const double s2 = q.sigma2(i);
    double vhat_row = 0.0, g_row = 0.0;
    for (Eigen::Index j = 0; j < raw.m.cols(); ++j) {
      const double v = raw.m(i, j);
      const double d = 1.0 + s2 + tau * rho * v;
      vhat_row += tau * rho * v * v / d;
      g_row += rho * v * v * (1.0 + s2) / (d * d);  // dvhat/dtau = -dvtilde/dtau
    }
    const double w = 1.0 + s2 + rho * (raw.m.row(i).sum() - vhat_row);  // k_i
    for (Eigen::Index j = 0; j < raw.m.cols(); ++j) {
      const double v = raw.m(i, j);
      const double d = 1.0 + s2 + tau * rho * v;
      const double vhat = tau * rho * v * v / d;
      const double g = rho * v * v * (1.0 + s2) / (d * d);
      // quotient rule with w' = -rho * g_row
      out.m(i, j) = (g * w + vhat * rho * g_row) / (w * w);
    }
  }
  return out;
}

VarianceProfile effective_profile_second_derivative(const SystemConfig& cfg,
                                                    const VarianceProfile& raw,
                                                    const QuantizationNoise& q, double tau) {
  require_kind(raw, ProfileKind::Raw, "effective_profile_second_derivative");
  require_dims(cfg, raw, "effective_profile_second_derivative");
  require_sigma(q.sigma2, cfg.n_antennas(), "effective_profile_second_derivative");
  require_tau(tau, "effective_profile_second_derivative");
  const double rho = cfg.snr();
  VarianceProfile out;
  out.kind = ProfileKind::EffectiveDerivative;
  out.m.resizeLike(raw.m);
  for (Eigen::Index i = 0; i < raw.m.rows(); ++i) {
    const double s2 = q.sigma2(i);
    double vhat_row = 0.0, g_row = 0.0, gp_row = 0.0;
    for (Eigen::Index j = 0; j < raw.m.cols(); ++j) {
      const double v = raw.m(i, j);
      const double d = 1.0 + s2 + tau * rho * v;
      vhat_row += tau * rho * v * v / d;
      g_row += rho * v * v * (1.0 + s2) / (d * d);
      gp_row += -2.0 * rho * rho * v * v * v * (1.0 + s2) / (d * d * d);
    }
    const double w = 1.0 + s2 + rho * (raw.m.row(i).sum() - vhat_row);
    const double wp = -rho * g_row;
    const double wpp = -rho * gp_row;
    for (Eigen::Index j = 0; j < raw.m.cols(); ++j) {
      const double v = raw.m(i, j);
      const double d = 1.0 + s2 + tau * rho * v;
      const double u = tau * rho * v * v / d;                       // vhat
      const double up = rho * v * v * (1.0 + s2) / (d * d);         // vhat'
      const double upp = -2.0 * rho * rho * v * v * v * (1.0 + s2) / (d * d * d);
      out.m(i, j) = (upp * w - u * wpp) / (w * w) - 2.0 * wp * (up * w - u * wp) / (w * w * w);
    }
  }
  return out;
}

}  // namespace netmimo
