#include "netmimo/det_equiv.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace netmimo {

namespace {

void require_effective(const VarianceProfile& p, const char* what) {
  if (p.kind != ProfileKind::Effective)
    throw std::invalid_argument(std::string(what) + ": effective profile required");
  for (Eigen::Index i = 0; i < p.m.rows(); ++i)
    for (Eigen::Index j = 0; j < p.m.cols(); ++j)
      if (!(p.m(i, j) >= 0.0) || !std::isfinite(p.m(i, j)))
        throw std::invalid_argument(std::string(what) + ": profile entries must be >= 0 and finite");
}

}  // namespace

DetEquivSolution solve_fixed_point(const VarianceProfile& effective, double power,
                                   int subcarriers, const FixedPointOptions& opt) {
  require_effective(effective, "solve_fixed_point");
  if (!(power > 0.0) || !std::isfinite(power))
    throw std::domain_error("solve_fixed_point: power must be positive");
  if (subcarriers < 1) throw std::domain_error("solve_fixed_point: subcarriers must be >= 1");
  if (!(opt.tol > 0.0) || opt.max_iter < 1)
    throw std::invalid_argument("solve_fixed_point: bad options");

  const Eigen::MatrixXd& v = effective.m;
  const Eigen::Index n = v.rows();
  const Eigen::Index k = v.cols();
  const double z_abs = static_cast<double>(subcarriers) / (static_cast<double>(k) * power);

  DetEquivSolution sol;
  sol.z_abs = z_abs;
  Eigen::VectorXd t = Eigen::VectorXd::Constant(n, 1.0 / z_abs);
  Eigen::VectorXd delta(k), u(k), denom(n), t_next(n);

  bool damped = false;
  double res = std::numeric_limits<double>::infinity();
  double res_prev = res, res_prev2 = res;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    delta = (v.transpose() * t) / static_cast<double>(k);
    u = (delta.array() + 1.0).inverse();
    denom = (v * u) / static_cast<double>(k);
    denom.array() += z_abs;
    t_next = denom.cwiseInverse();
    if (damped) t_next = 0.5 * (t + t_next);

    res = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      res = std::max(res, std::abs(t_next(i) - t(i)) / t_next(i));
    t = t_next;

    if (res <= opt.tol) {
      // Final pass keeps t the exact reciprocal of its own interaction term.
      sol.delta = (v.transpose() * t) / static_cast<double>(k);
      u = (sol.delta.array() + 1.0).inverse();
      sol.interaction = (v * u) / static_cast<double>(k);
      sol.t = (sol.interaction.array() + z_abs).inverse();
      sol.residual = res;
      sol.iterations = iter;
      sol.converged = true;
      return sol;
    }
    // Oscillation: residual grew over two consecutive iterations.
    if (res > res_prev && res_prev > res_prev2) damped = true;
    res_prev2 = res_prev;
    res_prev = res;
  }
  throw FixedPointError("fixed point did not converge within max_iter", res, opt.max_iter);
}

double rate_det(const DetEquivSolution& sol) {
  if (!sol.converged) throw std::invalid_argument("rate_det: unconverged solution");
  const Eigen::Index n = sol.t.size();
  const Eigen::Index k = sol.delta.size();
  if (n < 1 || k < 1 || sol.interaction.size() != n)
    throw std::invalid_argument("rate_det: malformed solution");
  double users_term = 0.0, penalty = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    users_term += std::log1p(sol.delta(j));
    penalty += sol.delta(j) / (1.0 + sol.delta(j));
  }
  // -log(z_abs * t_i) written via the fixed point as log1p(interaction/z_abs):
  // exact zero for a zero profile.
  double antennas_term = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) antennas_term += std::log1p(sol.interaction(i) / sol.z_abs);
  return (users_term + antennas_term - penalty) / static_cast<double>(n);
}

double rate_det_derivative(const VarianceProfile& effective_derivative,
                           const DetEquivSolution& sol) {
  if (effective_derivative.kind != ProfileKind::EffectiveDerivative)
    throw std::invalid_argument("rate_det_derivative: derivative profile required");
  if (!sol.converged) throw std::invalid_argument("rate_det_derivative: unconverged solution");
  const Eigen::MatrixXd& dv = effective_derivative.m;
  if (dv.rows() != sol.t.size() || dv.cols() != sol.delta.size())
    throw std::invalid_argument("rate_det_derivative: dimension mismatch with solution");
  const Eigen::Index n = dv.rows();
  const Eigen::Index k = dv.cols();
  Eigen::VectorXd num = (dv.transpose() * sol.t) / static_cast<double>(k);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) acc += num(j) / (1.0 + sol.delta(j));
  return acc / static_cast<double>(n);
}

RegularityCheck check_doubly_regular(const VarianceProfile& effective, double rel_tol) {
  if (effective.kind != ProfileKind::Effective && effective.kind != ProfileKind::Raw)
    throw std::invalid_argument("check_doubly_regular: variance profile required");
  RegularityCheck out;
  const Eigen::MatrixXd& v = effective.m;
  out.common_mean = v.mean();
  if (v.rows() != v.cols()) return out;
  const double scale = std::max(std::abs(out.common_mean),
                                std::numeric_limits<double>::min());
  double dev = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) dev = std::max(dev, std::abs(v.row(i).mean() - out.common_mean));
  for (Eigen::Index j = 0; j < v.cols(); ++j) dev = std::max(dev, std::abs(v.col(j).mean() - out.common_mean));
  out.is_doubly_regular = dev <= rel_tol * scale;
  return out;
}

double doubly_regular_solution(double k_mean, int users, double power, int subcarriers) {
  if (!(k_mean >= 0.0) || !std::isfinite(k_mean))
    throw std::domain_error("doubly_regular_solution: common mean must be >= 0");
  if (users < 1 || subcarriers < 1 || !(power > 0.0) || !std::isfinite(power))
    throw std::domain_error("doubly_regular_solution: bad system parameters");
  const double x = static_cast<double>(users) * power / subcarriers;  // KP/L
  return 2.0 * x / (1.0 + std::sqrt(1.0 + 4.0 * x * k_mean));
}

namespace {

// Grand mean of a profile whose column means must agree within rel_tol
// (scaled by the magnitude of the reference mean).
double regular_mean(const Eigen::MatrixXd& m, double scale, double rel_tol, const char* what) {
  const double mean = m.mean();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (std::abs(m.col(j).mean() - mean) > rel_tol * scale)
      throw std::invalid_argument(std::string(what) + ": profile is not doubly regular");
  return mean;
}

}  // namespace

double doubly_regular_curvature(const SystemConfig& cfg, const VarianceProfile& raw,
                                const QuantizationNoise& q, double tau) {
  EffectiveProfile eff = effective_profile(cfg, raw, q, tau);
  RegularityCheck reg = check_doubly_regular(eff.profile);
  if (!reg.is_doubly_regular)
    throw std::invalid_argument("doubly_regular_curvature: profile is not doubly regular");
  const double k_mean = reg.common_mean;
  if (!(k_mean > 0.0))
    throw std::domain_error("doubly_regular_curvature: zero profile has no curvature");

  VarianceProfile d1 = effective_profile_derivative(cfg, raw, q, tau);
  VarianceProfile d2 = effective_profile_second_derivative(cfg, raw, q, tau);
  const double scale = std::max({k_mean, d1.m.cwiseAbs().maxCoeff(), d2.m.cwiseAbs().maxCoeff()});
  const double k1 = regular_mean(d1.m, scale, 1e-8, "doubly_regular_curvature");
  const double k2 = regular_mean(d2.m, scale, 1e-8, "doubly_regular_curvature");

  const double x = static_cast<double>(cfg.users) * cfg.power / cfg.subcarriers;
  const double s = std::sqrt(1.0 + 4.0 * x * k_mean);
  const double t_p = 2.0 * x / (1.0 + s);
  // dt/dK = -2x^2 / (s (s + 1 + 2xK)): exact rearrangement, no cancellation.
  const double dt_dk = -2.0 * x * x / (s * (s + 1.0 + 2.0 * x * k_mean));
  const double t_prime = dt_dk * k1;
  const double denom = 1.0 + t_p * k_mean;
  const double num = t_prime * k1 + t_p * k2 * denom - (t_p * k1) * (t_p * k1);
  return num / (denom * denom);
}

}  // namespace netmimo
