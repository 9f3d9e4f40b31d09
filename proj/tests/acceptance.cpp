// Acceptance gate: every release-blocking behavior in one binary, one line
// of output per criterion, exit status = number of failures. Tolerances are
// pinned here on purpose; loosening them is a release decision, not a test
// edit.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "netmimo/csv.hpp"
#include "netmimo/det_equiv.hpp"
#include "netmimo/experiment.hpp"
#include "netmimo/monte_carlo.hpp"
#include "netmimo/profile.hpp"
#include "netmimo/system.hpp"
#include "netmimo/train_opt.hpp"
#include "test_util.hpp"

using namespace netmimo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

SystemConfig reference_config(double snr_db, double backhaul, double coherence) {
  SystemConfig cfg;
  cfg.cells = 3;
  cfg.antennas_per_bs = 2;
  cfg.users = 3;
  cfg.subcarriers = 1;
  cfg.coherence_length = coherence;
  cfg.power = db_to_linear(snr_db);
  cfg.backhaul_bits = backhaul;
  return cfg;
}

VarianceProfile reference_profile() {
  return build_variance_profile(example_path_loss_3x3(), 2);
}

// 1. Monte Carlo rates track the deterministic equivalent across the
//    backhaul/SNR grid at tau = 40, T = 1000, within max(2%, 3 standard
//    errors) per point, in under two minutes.
Outcome mc_matches_det() {
  const auto start = std::chrono::steady_clock::now();
  const std::int64_t samples = 10000;
  double worst_rel = 0.0, worst_se_mult = 0.0;
  bool ok = true;
  for (double c : {1.0, 5.0, 10.0}) {
    for (double snr_db : {-10.0, 0.0, 10.0, 20.0, 30.0}) {
      SystemConfig cfg = reference_config(snr_db, c, 1000.0);
      VarianceProfile raw = reference_profile();
      QuantizationNoise q = quantization_noise(cfg, raw);
      const double det = testutil::net_rate_at(cfg, raw, q, 40.0);
      MonteCarloEstimate mc = estimate_net_rate(cfg, raw, q, 40.0, samples, 8123, 1);
      const double gap = std::abs(mc.mean - det);
      const double rel = gap / det;
      const double se_mult = mc.std_err > 0.0 ? gap / mc.std_err : 0.0;
      worst_rel = std::max(worst_rel, rel);
      if (rel > 0.02) worst_se_mult = std::max(worst_se_mult, se_mult);
      if (gap > std::max(0.02 * det, 3.0 * mc.std_err)) ok = false;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 120.0) ok = false;
  return {ok, "worst rel gap " + fmt(100.0 * worst_rel) + "% (limit 2% or 3 se), " +
                  fmt(secs, "%.1f") + " s (limit 120)"};
}

// 2. Net throughput benchmark: per-cell optimized net rate at 10 dB with a
//    20 bit backhaul lands at 5.2 +- 0.3 bits per channel use.
Outcome optimized_throughput_benchmark() {
  SystemConfig cfg = reference_config(10.0, 20.0, 1000.0);
  VarianceProfile raw = reference_profile();
  QuantizationNoise q = quantization_noise(cfg, raw);
  TrainingOptimum det = optimize_det(cfg, raw, q);
  MonteCarloEstimate mc = estimate_net_rate(cfg, raw, q, det.tau_star, 10000, 424242, 1);
  const double per_cell_bits = cfg.antennas_per_bs * mc.mean / std::numbers::ln2;
  const bool ok = per_cell_bits >= 4.9 && per_cell_bits <= 5.5;
  return {ok, "M * net rate = " + fmt(per_cell_bits, "%.4f") + " bits at tau* = " +
                  fmt(det.tau_star, "%.2f") + " (window 5.2 +- 0.3)"};
}

// 3. The analytic rate derivative matches central differences (h = 1e-3)
//    to 1e-6 relative error and stays positive, over 50 random systems and
//    the reference scenario.
Outcome derivative_matches_finite_differences() {
  std::mt19937_64 rng(9001);
  std::uniform_real_distribution<double> tau_u(2.0, 200.0);
  std::uniform_real_distribution<double> db_u(-5.0, 10.0);
  double worst = 0.0;
  bool all_positive = true;
  const double h = 1e-3;
  auto check_one = [&](const SystemConfig& cfg, const VarianceProfile& raw, double tau) {
    QuantizationNoise q = quantization_noise(cfg, raw);
    EffectiveProfile eff = effective_profile(cfg, raw, q, tau);
    DetEquivSolution sol = solve_fixed_point(eff.profile, cfg.power, cfg.subcarriers);
    const double analytic =
        rate_det_derivative(effective_profile_derivative(cfg, raw, q, tau), sol);
    if (!(analytic > 0.0)) all_positive = false;
    const double fd = testutil::central_diff(
        [&](double t) { return testutil::rate_at(cfg, raw, q, t); }, tau, h);
    worst = std::max(worst, std::abs(analytic - fd) / std::abs(analytic));
  };
  for (int trial = 0; trial < 50; ++trial) {
    testutil::RandomSystem s = testutil::random_system(rng);
    s.cfg.power = db_to_linear(db_u(rng));  // keep tau*snr*v where h = 1e-3 resolves
    check_one(s.cfg, s.raw, tau_u(rng));
  }
  check_one(reference_config(0.0, 1.0, 1000.0), reference_profile(), 40.0);
  const bool ok = worst <= 1e-6 && all_positive;
  return {ok, "worst rel error " + fmt(worst) + " (limit 1e-6), derivative " +
                  (all_positive ? "positive everywhere" : "NOT positive")};
}

// 4. Uniform profiles: iterative solver, closed form and hand-derived
//    values agree to 1e-10.
Outcome closed_form_agreement() {
  bool ok = true;
  std::string detail;

  VarianceProfile ones{ProfileKind::Effective, Eigen::MatrixXd::Ones(3, 3)};
  const double power = 8.0 / 3.0;  // K*P/L = 8
  DetEquivSolution sol = solve_fixed_point(ones, power, 1);
  const double closed = doubly_regular_solution(1.0, 3, power, 1);
  double worst_t = 0.0;
  for (int i = 0; i < 3; ++i) worst_t = std::max(worst_t, std::abs(sol.t(i) - closed));
  const double t_ref = 2.3722813232690143;  // solves t(1+t) = 8
  const double rate_ref = 1.7277140971317233;
  const double rate = rate_det(sol);
  if (worst_t > 1e-10 * closed) ok = false;
  if (std::abs(closed - t_ref) > 1e-10) ok = false;
  if (std::abs(rate - rate_ref) > 1e-10) ok = false;

  // Single link at unit snr: t = 1/phi, rate = 2 ln phi + phi - 2.
  VarianceProfile one{ProfileKind::Effective, Eigen::MatrixXd::Ones(1, 1)};
  DetEquivSolution scalar = solve_fixed_point(one, 1.0, 1);
  const double scalar_ref = 0.5804576388691016;
  if (std::abs(rate_det(scalar) - scalar_ref) > 1e-10) ok = false;

  detail = "solver-closed gap " + fmt(worst_t) + ", rate gaps " +
           fmt(std::abs(rate - rate_ref)) + " / " +
           fmt(std::abs(rate_det(scalar) - scalar_ref)) + " (limit 1e-10)";
  return {ok, detail};
}

// 5. Concavity: the analytic curvature is negative on 20 random circulant
//    systems, and the net rate has nonpositive second differences along
//    integer training lengths for the reference scenario.
Outcome concavity_certificate() {
  std::mt19937_64 rng(3177);
  std::uniform_int_distribution<int> dim(2, 6);
  std::uniform_real_distribution<double> tau_u(2.0, 120.0);
  double worst_curv = -1e300;
  for (int trial = 0; trial < 20; ++trial) {
    testutil::RandomSystem s = testutil::random_circulant_system(rng, dim(rng));
    QuantizationNoise q = quantization_noise(s.cfg, s.raw);
    worst_curv = std::max(worst_curv, doubly_regular_curvature(s.cfg, s.raw, q, tau_u(rng)));
  }

  SystemConfig cfg = reference_config(0.0, 1.0, 1000.0);
  VarianceProfile raw = reference_profile();
  QuantizationNoise q = quantization_noise(cfg, raw);
  std::vector<double> net;
  for (int tau = 3; tau <= 300; ++tau)
    net.push_back(testutil::net_rate_at(cfg, raw, q, tau));
  double worst_dd = -1e300;
  for (std::size_t i = 1; i + 1 < net.size(); ++i)
    worst_dd = std::max(worst_dd, net[i + 1] - 2.0 * net[i] + net[i - 1]);

  const bool ok = worst_curv < 0.0 && worst_dd <= 1e-10;
  return {ok, "max curvature " + fmt(worst_curv) + " (limit < 0), max second difference " +
                  fmt(worst_dd) + " (limit 1e-10)"};
}

// 6. The Monte Carlo grid search and the bisection optimizer choose the
//    same training length within 2 channel uses across the SNR sweep, and
//    the det-MC gaps shrink as the system is scaled up.
Outcome optimizer_agreement() {
  SystemConfig base = reference_config(0.0, 1.0, 100.0);
  VarianceProfile raw = reference_profile();
  double worst_gap = 0.0;
  bool ok = true;
  for (double snr_db = -10.0; snr_db <= 30.0; snr_db += 2.0) {
    SystemConfig cfg = base;
    cfg.power = db_to_linear(snr_db);
    QuantizationNoise q = quantization_noise(cfg, raw);
    TrainingOptimum det = optimize_det(cfg, raw, q);
    std::vector<double> grid;
    for (double t = 3.0; t <= 100.0; t += 1.0) grid.push_back(t);
    TrainingOptimum mc = optimize_mc(cfg, raw, q, grid, 10000, 61803, 1);
    const double gap = std::abs(mc.tau_star - det.tau_star);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 2.0) ok = false;
  }

  QuantizationNoise q = quantization_noise(base, raw);
  std::vector<ConvergenceRow> rows = convergence_report(base, raw, q, {1, 2, 4}, 4000, 5150, 1);
  std::string trend;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double rate_slack = 3.0 * std::hypot(rows[i].mc_std_err, rows[i + 1].mc_std_err);
    if (rows[i + 1].rate_gap > rows[i].rate_gap + rate_slack) ok = false;
    if (rows[i + 1].tau_gap > rows[i].tau_gap + 1.0) ok = false;
  }
  for (const ConvergenceRow& r : rows)
    trend += " s" + std::to_string(r.scale) + ":|dtau|=" + fmt(r.tau_gap, "%.1f") +
             ",|drate|=" + fmt(r.rate_gap);
  return {ok, "worst tau gap " + fmt(worst_gap, "%.2f") + " (limit 2);" + trend};
}

// 7. More backhaul never asks for more training: tau*(C) is nonincreasing
//    over C = 1..30 and ends within one channel use of the uncompressed
//    optimum.
Outcome training_monotone_in_backhaul() {
  VarianceProfile raw = reference_profile();
  double prev = 1e300, last = 0.0, worst_increase = 0.0;
  for (int c = 1; c <= 30; ++c) {
    SystemConfig cfg = reference_config(10.0, static_cast<double>(c), 1000.0);
    QuantizationNoise q = quantization_noise(cfg, raw);
    TrainingOptimum opt = optimize_det(cfg, raw, q);
    worst_increase = std::max(worst_increase, opt.tau_star - prev);
    prev = opt.tau_star;
    last = opt.tau_star;
  }
  SystemConfig cfg = reference_config(10.0, std::numeric_limits<double>::infinity(), 1000.0);
  QuantizationNoise q = quantization_noise(cfg, raw);
  TrainingOptimum clean = optimize_det(cfg, raw, q);
  const double end_gap = std::abs(last - clean.tau_star);
  const bool ok = worst_increase <= 0.01 && end_gap <= 1.0;
  return {ok, "max increase " + fmt(worst_increase) + " (limit 0.01), gap to uncompressed " +
                  fmt(end_gap, "%.3f") + " (limit 1)"};
}

// 8. Structural invariants over 100 random systems: variance conservation
//    to 2 ulp, unit-floor noise covariance, profile orderings, solver
//    bracketing and exact zero rate for a zero profile.
Outcome structural_invariants() {
  std::mt19937_64 rng(77001);
  std::uniform_real_distribution<double> tau_u(1.0, 300.0);
  bool ok = true;
  std::string fail;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    testutil::RandomSystem s = testutil::random_system(rng);
    QuantizationNoise q = quantization_noise(s.cfg, s.raw);
    const double tau = tau_u(rng);
    if (std::isinf(s.cfg.backhaul_bits) && q.sigma2.cwiseAbs().maxCoeff() != 0.0) {
      ok = false;
      fail = "nonzero quantization noise at infinite backhaul";
      break;
    }
    EstimationSplit split = estimation_variances(s.cfg, s.raw, q, tau);
    EffectiveProfile eff = effective_profile(s.cfg, s.raw, q, tau);
    VarianceProfile deriv = effective_profile_derivative(s.cfg, s.raw, q, tau);
    for (int i = 0; i < s.raw.n_antennas() && ok; ++i) {
      if (eff.kz.k(i) < 1.0) { ok = false; fail = "covariance below thermal floor"; }
      for (int j = 0; j < s.raw.users() && ok; ++j) {
        const double v = s.raw.m(i, j);
        const double vhat = split.estimated.m(i, j);
        const double ulp2 = 2.0 * std::ldexp(1.0, std::ilogb(v) - 52);
        if (std::abs(vhat + split.error.m(i, j) - v) > ulp2) { ok = false; fail = "conservation"; }
        if (vhat < 0.0 || vhat > v) { ok = false; fail = "estimate variance range"; }
        if (eff.profile.m(i, j) > vhat) { ok = false; fail = "normalization grew a variance"; }
        if (deriv.m(i, j) < 0.0) { ok = false; fail = "negative profile derivative"; }
      }
    }
    if (!ok) break;
    DetEquivSolution sol = solve_fixed_point(eff.profile, s.cfg.power, s.cfg.subcarriers);
    const double x = s.cfg.users * s.cfg.snr();
    for (int i = 0; i < sol.t.size() && ok; ++i)
      if (!(sol.t(i) > 0.0) || sol.t(i) > x * (1.0 + 1e-12)) { ok = false; fail = "t range"; }
    if (ok && sol.delta.minCoeff() < 0.0) { ok = false; fail = "negative delta"; }
    if (ok && rate_det(sol) < 0.0) { ok = false; fail = "negative rate"; }
  }
  if (ok) {
    VarianceProfile zero{ProfileKind::Effective, Eigen::MatrixXd::Zero(4, 2)};
    if (rate_det(solve_fixed_point(zero, 1.5, 1)) != 0.0) {
      ok = false;
      fail = "zero profile rate not exactly zero";
    }
  }
  return {ok, ok ? "100 random systems clean" : ("violated: " + fail)};
}

// 9. Scalar ground truth: a single perfectly-estimated Rayleigh link hits
//    the quadrature value of E[ln(1 + |h|^2)] within 3 standard errors, and
//    the deterministic equivalent reproduces its closed form through the
//    full estimation pipeline.
Outcome scalar_ground_truth() {
  SystemConfig cfg;
  cfg.cells = 1;
  cfg.antennas_per_bs = 1;
  cfg.users = 1;
  cfg.subcarriers = 1;
  cfg.power = 1.0;
  cfg.coherence_length = 1e13;
  VarianceProfile raw = build_variance_profile(PathLossMatrix(Eigen::MatrixXd::Ones(1, 1)), 1);
  QuantizationNoise q = quantization_noise(cfg, raw);

  const double oracle = testutil::scalar_rayleigh_rate();
  MonteCarloEstimate mc = estimate_rate(cfg, raw, q, 1e12, 100000, 271828, 1);
  const double se_mult = std::abs(mc.mean - oracle) / mc.std_err;

  const double det = testutil::rate_at(cfg, raw, q, 1e8);
  const double det_gap = std::abs(det - 0.5804576388691016);

  const bool ok = se_mult <= 3.0 && det_gap <= 1e-6;
  return {ok, "mc gap " + fmt(se_mult, "%.2f") + " se (limit 3), det gap " + fmt(det_gap) +
                  " (limit 1e-6)"};
}

// 10. Reruns and worker counts leave the output bytes unchanged.
Outcome deterministic_output() {
  ExperimentSpec spec;
  spec.path_loss = example_path_loss_3x3().a;
  spec.sweep = SweepKind::Snr;
  spec.sweep_min = 0.0;
  spec.sweep_max = 10.0;
  spec.sweep_step = 5.0;
  spec.tau = 25.0;
  spec.coherence_length = 500.0;
  spec.backhaul_bits = 5.0;
  spec.method_mc = true;
  spec.mc_samples = 500;
  std::ostringstream log;
  auto bytes = [](const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  spec.out_prefix = "acc_det_a";
  run_sweep(spec, log);
  spec.out_prefix = "acc_det_b";
  run_sweep(spec, log);
  spec.out_prefix = "acc_det_c";
  spec.workers = 3;
  run_sweep(spec, log);
  const std::string a = bytes("acc_det_a.csv");
  const bool ok = !a.empty() && a == bytes("acc_det_b.csv") && a == bytes("acc_det_c.csv");
  std::remove("acc_det_a.csv");
  std::remove("acc_det_b.csv");
  std::remove("acc_det_c.csv");
  return {ok, ok ? "rerun and 3-worker bytes identical" : "outputs differ"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"monte carlo matches deterministic equivalent", mc_matches_det},
      {"optimized throughput benchmark", optimized_throughput_benchmark},
      {"analytic rate derivative", derivative_matches_finite_differences},
      {"closed-form fixed point", closed_form_agreement},
      {"concavity certificate", concavity_certificate},
      {"optimizer agreement and scaling", optimizer_agreement},
      {"training monotone in backhaul", training_monotone_in_backhaul},
      {"structural invariants", structural_invariants},
      {"scalar ground truth", scalar_ground_truth},
      {"deterministic output", deterministic_output},
  };
  int failures = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("[%s] %02d %s: %s\n", out.pass ? "PASS" : "FAIL", index, c.name,
                out.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
