#include "netmimo/train_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "netmimo/det_equiv.hpp"
#include "netmimo/monte_carlo.hpp"
#include "netmimo/parallel.hpp"

namespace netmimo {

namespace {

struct DetPoint {
  double rate = 0.0;      // nats/channel use/antenna
  double net = 0.0;       // (1 - tau/T) * rate
  double net_slope = 0.0; // d net / d tau
};

DetPoint eval_det(const SystemConfig& cfg, const VarianceProfile& raw,
                  const QuantizationNoise& q, double tau) {
  EffectiveProfile eff = effective_profile(cfg, raw, q, tau);
  DetEquivSolution sol = solve_fixed_point(eff.profile, cfg.power, cfg.subcarriers);
  VarianceProfile d1 = effective_profile_derivative(cfg, raw, q, tau);
  DetPoint p;
  p.rate = rate_det(sol);
  const double t_coh = cfg.coherence_length;
  p.net = (1.0 - tau / t_coh) * p.rate;
  p.net_slope = (1.0 - tau / t_coh) * rate_det_derivative(d1, sol) - p.rate / t_coh;
  return p;
}

double det_net_rate(const SystemConfig& cfg, const VarianceProfile& raw,
                    const QuantizationNoise& q, double tau) {
  EffectiveProfile eff = effective_profile(cfg, raw, q, tau);
  DetEquivSolution sol = solve_fixed_point(eff.profile, cfg.power, cfg.subcarriers);
  return (1.0 - tau / cfg.coherence_length) * rate_det(sol);
}

// Better integer training length around tau_star; ties pick the smaller.
int best_integer_tau(const SystemConfig& cfg, const VarianceProfile& raw,
                     const QuantizationNoise& q, double tau_star) {
  const double k = static_cast<double>(cfg.users);
  const double t_coh = cfg.coherence_length;
  double lo = std::clamp(std::floor(tau_star), std::ceil(k), std::floor(t_coh));
  double hi = std::clamp(std::ceil(tau_star), std::ceil(k), std::floor(t_coh));
  if (lo == hi) return static_cast<int>(lo);
  const double net_lo = det_net_rate(cfg, raw, q, lo);
  const double net_hi = det_net_rate(cfg, raw, q, hi);
  return static_cast<int>(net_hi > net_lo ? hi : lo);
}

}  // namespace

TrainingOptimum optimize_det(const SystemConfig& cfg, const VarianceProfile& raw,
                             const QuantizationNoise& q, const OptimizeDetOptions& opt) {
  cfg.validate();
  const double t_coh = cfg.coherence_length;
  const double k = static_cast<double>(cfg.users);
  if (!(t_coh > k))
    throw std::invalid_argument("optimize_det: coherence length must exceed the user count");
  if (!(opt.tol_tau > 0.0)) throw std::invalid_argument("optimize_det: tol_tau must be positive");

  // Concavity diagnostic: the net-rate slope must be numerically decreasing
  // on a coarse grid, otherwise bisection could return a false root.
  {
    double prev = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= opt.precheck_points - 1; ++g) {
      const double tau = t_coh * static_cast<double>(g) / (opt.precheck_points - 1);
      const double slope = eval_det(cfg, raw, q, tau).net_slope;
      if (slope > prev + 1e-9 * std::max(1.0, std::abs(prev)))
        throw std::runtime_error(
            "optimize_det: net-rate slope is not decreasing in tau (concavity diagnostic "
            "failed at tau=" + std::to_string(tau) + ")");
      prev = slope;
    }
  }

  TrainingOptimum out;
  double lo = 0.0, hi = t_coh;
  const double slope_lo = eval_det(cfg, raw, q, lo).net_slope;
  const double slope_hi = eval_det(cfg, raw, q, hi).net_slope;
  int iters = 0;
  if (slope_lo <= 0.0) {
    // No interior gain from training at all: optimum pinned at the shortest
    // feasible training length.
    out.tau_unclamped = 0.0;
  } else if (slope_hi >= 0.0) {
    // Slope positive everywhere: no bracket, training helps up to T.
    out.tau_unclamped = t_coh;
  } else {
    out.tau_unclamped = 0.5 * (lo + hi);
    for (; iters < opt.max_bisect; ++iters) {
      const double mid = 0.5 * (lo + hi);
      const DetPoint p = eval_det(cfg, raw, q, mid);
      if (p.net_slope > 0.0)
        lo = mid;
      else
        hi = mid;
      // The returned root is the last evaluated midpoint, so the residual
      // condition is met at the reported point, not just inside the bracket.
      const bool width_ok = (hi - lo) <= opt.tol_tau;
      const bool residual_ok =
          std::abs(p.net_slope) <= opt.residual_rel * std::max(p.rate, 0.0) / t_coh;
      if (width_ok && residual_ok) {
        out.tau_unclamped = mid;
        ++iters;
        break;
      }
      if ((hi - lo) <= 8.0 * std::numeric_limits<double>::epsilon() * t_coh) {
        out.tau_unclamped = 0.5 * (lo + hi);
        ++iters;
        break;
      }
      out.tau_unclamped = 0.5 * (lo + hi);
    }
  }

  out.iterations = iters;
  out.tau_star = std::clamp(out.tau_unclamped, k, t_coh);
  if (out.tau_unclamped < k)
    out.clamped = ClampStatus::AtK;
  else if (out.tau_unclamped > t_coh)
    out.clamped = ClampStatus::AtT;
  out.bracket = out.clamped == ClampStatus::None ? std::make_pair(lo, hi)
                                                 : std::make_pair(out.tau_star, out.tau_star);
  out.net_rate = det_net_rate(cfg, raw, q, out.tau_star);
  out.tau_star_int = best_integer_tau(cfg, raw, q, out.tau_star);
  return out;
}

TrainingOptimum optimize_mc(const SystemConfig& cfg, const VarianceProfile& raw,
                            const QuantizationNoise& q, const std::vector<double>& grid,
                            std::int64_t n_samples, std::uint64_t seed, int workers) {
  cfg.validate();
  if (grid.empty()) throw std::domain_error("optimize_mc: empty grid");
  const double k = static_cast<double>(cfg.users);
  const double t_coh = cfg.coherence_length;
  for (double tau : grid)
    if (!(tau >= k && tau <= t_coh))
      throw std::domain_error("optimize_mc: grid point " + std::to_string(tau) +
                              " outside [K, T]");

  std::vector<MonteCarloEstimate> est(grid.size());
  // Common random numbers: every grid point reuses the same master seed, so
  // the estimates differ only through tau.
  detail::parallel_for(static_cast<std::int64_t>(grid.size()), workers, [&](std::int64_t i) {
    est[static_cast<std::size_t>(i)] =
        estimate_net_rate(cfg, raw, q, grid[static_cast<std::size_t>(i)], n_samples, seed, 1);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (est[i].mean > est[best].mean) best = i;  // ties keep the smallest tau

  TrainingOptimum out;
  out.tau_star = grid[best];
  out.tau_unclamped = grid[best];
  out.net_rate = est[best].mean;
  out.iterations = static_cast<int>(grid.size());
  out.clamped = ClampStatus::None;
  out.bracket = {grid[best > 0 ? best - 1 : 0],
                 grid[best + 1 < grid.size() ? best + 1 : best]};
  const double fl = std::floor(out.tau_star);
  if (fl == out.tau_star) {
    out.tau_star_int = static_cast<int>(fl);
  } else {
    // Non-integer grid point: compare the two integer neighbours with the
    // same randomness.
    const double lo = std::clamp(fl, std::ceil(k), std::floor(t_coh));
    const double hi = std::clamp(std::ceil(out.tau_star), std::ceil(k), std::floor(t_coh));
    if (lo == hi) {
      out.tau_star_int = static_cast<int>(lo);
    } else {
      const double net_lo = estimate_net_rate(cfg, raw, q, lo, n_samples, seed, workers).mean;
      const double net_hi = estimate_net_rate(cfg, raw, q, hi, n_samples, seed, workers).mean;
      out.tau_star_int = static_cast<int>(net_hi > net_lo ? hi : lo);
    }
  }
  return out;
}

std::vector<ConvergenceRow> convergence_report(const SystemConfig& cfg,
                                               const VarianceProfile& raw,
                                               const QuantizationNoise& q,
                                               const std::vector<int>& scales,
                                               std::int64_t n_samples, std::uint64_t seed,
                                               int workers, double grid_step) {
  cfg.validate();
  if (scales.empty()) throw std::invalid_argument("convergence_report: no scales");
  if (!(grid_step > 0.0)) throw std::invalid_argument("convergence_report: bad grid step");
  std::vector<ConvergenceRow> rows;
  rows.reserve(scales.size());
  for (int s : scales) {
    if (s < 1) throw std::invalid_argument("convergence_report: scales must be >= 1");
    SystemConfig scfg = cfg;
    scfg.cells = cfg.cells * s;
    scfg.users = cfg.users * s;
    scfg.subcarriers = cfg.subcarriers * s;
    scfg.backhaul_bits = cfg.backhaul_bits * s;  // +inf stays +inf
    if (scfg.coherence_length < static_cast<double>(scfg.users))
      throw std::invalid_argument("convergence_report: scaled user count exceeds T at s=" +
                                  std::to_string(s));

    VarianceProfile sraw;
    sraw.kind = ProfileKind::Raw;
    const Eigen::Index n0 = raw.m.rows(), k0 = raw.m.cols();
    sraw.m.resize(n0 * s, k0 * s);
    for (int bi = 0; bi < s; ++bi)
      for (int bj = 0; bj < s; ++bj) sraw.m.block(bi * n0, bj * k0, n0, k0) = raw.m;
    if (!sraw.m.allFinite())
      throw std::runtime_error("convergence_report: scaled profile is not finite");
    QuantizationNoise sq;
    sq.sigma2.resize(n0 * s);
    for (int bi = 0; bi < s; ++bi) sq.sigma2.segment(bi * n0, n0) = q.sigma2;

    TrainingOptimum det = optimize_det(scfg, sraw, sq);
    std::vector<double> grid;
    for (double tau = static_cast<double>(scfg.users); tau <= scfg.coherence_length;
         tau += grid_step)
      grid.push_back(tau);
    TrainingOptimum mc = optimize_mc(scfg, sraw, sq, grid, n_samples, seed, workers);
    MonteCarloEstimate at_opt =
        estimate_net_rate(scfg, sraw, sq, mc.tau_star, n_samples, seed, workers);

    ConvergenceRow row;
    row.scale = s;
    row.tau_gap = std::abs(mc.tau_star - det.tau_star);
    row.rate_gap = std::abs(at_opt.mean - det.net_rate);
    row.mc_std_err = at_opt.std_err;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace netmimo
