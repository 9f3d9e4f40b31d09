#include "netmimo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "netmimo/csv.hpp"
#include "netmimo/det_equiv.hpp"
#include "netmimo/monte_carlo.hpp"
#include "netmimo/parallel.hpp"
#include "netmimo/profile.hpp"
#include "netmimo/train_opt.hpp"
#include "netmimo/version.hpp"

namespace netmimo {

namespace {

constexpr const char* kSchema =
    "sweep_value,r_net_det_bits,r_net_mc_bits,mc_std_err_bits,tau_used,tau_star_det,"
    "tau_star_mc,seed";

double nats_to_bits(double nats) { return nats / std::numbers::ln2; }  // the one conversion

const char* sweep_name(SweepKind k) {
  switch (k) {
    case SweepKind::Snr: return "snr";
    case SweepKind::Tau: return "tau";
    case SweepKind::Backhaul: return "backhaul";
  }
  return "?";
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

SystemConfig ExperimentSpec::base_config() const {
  SystemConfig cfg;
  cfg.cells = cells;
  cfg.antennas_per_bs = antennas_per_bs;
  cfg.users = users;
  cfg.subcarriers = subcarriers;
  cfg.coherence_length = coherence_length;
  cfg.power = db_to_linear(snr_db) * subcarriers;
  cfg.backhaul_bits = backhaul_bits;
  return cfg;
}

std::vector<double> ExperimentSpec::sweep_values() const {
  std::vector<double> out;
  const auto n = static_cast<std::int64_t>(std::floor((sweep_max - sweep_min) / sweep_step + 1e-9));
  for (std::int64_t i = 0; i <= n; ++i) out.push_back(sweep_min + static_cast<double>(i) * sweep_step);
  return out;
}

void ExperimentSpec::validate() const {
  base_config().validate();
  if (path_loss.rows() != cells || path_loss.cols() != users)
    throw ValidationError("path_loss must be cells x users (" + std::to_string(cells) + "x" +
                          std::to_string(users) + "), got " + std::to_string(path_loss.rows()) +
                          "x" + std::to_string(path_loss.cols()));
  for (Eigen::Index i = 0; i < path_loss.rows(); ++i)
    for (Eigen::Index j = 0; j < path_loss.cols(); ++j)
      if (!(path_loss(i, j) > 0.0) || !std::isfinite(path_loss(i, j)))
        throw ValidationError("path_loss entries must be positive and finite");
  if (!(sweep_step > 0.0)) throw ValidationError("sweep step must be positive");
  if (sweep_min > sweep_max) throw ValidationError("sweep min exceeds max");
  if (!method_det && !method_mc) throw ValidationError("no method enabled");
  if (mc_samples < 1) throw ValidationError("mc samples must be >= 1");
  if (!(grid_step > 0.0)) throw ValidationError("grid step must be positive");
  if (!(tol_tau > 0.0)) throw ValidationError("tol_tau must be positive");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (sweep == SweepKind::Tau) {
    if (!(sweep_min >= 0.0) || sweep_max > coherence_length)
      throw ValidationError("tau sweep must lie within (0, T]");
  } else {
    if (!(tau > 0.0) || tau > coherence_length)
      throw ValidationError("fixed tau must lie within (0, T]");
  }
  if (sweep == SweepKind::Backhaul && !(sweep_min > 0.0))
    throw ValidationError("backhaul sweep values must be positive");
  if (out_prefix.empty()) throw ValidationError("output prefix is empty");
}

std::uint64_t ExperimentSpec::config_hash() const {
  std::ostringstream s;
  s << cells << '|' << antennas_per_bs << '|' << users << '|' << subcarriers << '|'
    << format_double(coherence_length) << '|' << format_double(snr_db) << '|'
    << format_double(backhaul_bits) << '|';
  for (Eigen::Index i = 0; i < path_loss.rows(); ++i)
    for (Eigen::Index j = 0; j < path_loss.cols(); ++j) s << format_double(path_loss(i, j)) << ',';
  s << '|' << sweep_name(sweep) << '|' << format_double(sweep_min) << '|'
    << format_double(sweep_max) << '|' << format_double(sweep_step) << '|' << format_double(tau)
    << '|' << method_det << method_mc << '|' << mc_samples << '|' << mc_seed << '|'
    << format_double(grid_step) << '|' << format_double(tol_tau);
  return fnv1a(s.str());
}

// ---------------------------------------------------------------------------
// Config file parsing

namespace {

struct Line {
  int number;
  std::string section;
  std::string key;
  std::string value;
};

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& msg) {
  throw ValidationError(path + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_num(const std::string& path, int line, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) parse_fail(path, line, "trailing characters in number '" + v + "'");
    return d;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    parse_fail(path, line, "expected a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& path, int line, const std::string& v) {
  const double d = parse_num(path, line, v);
  if (std::floor(d) != d || std::abs(d) > 9e15)
    parse_fail(path, line, "expected an integer, got '" + v + "'");
  return static_cast<std::int64_t>(d);
}

bool parse_bool(const std::string& path, int line, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  parse_fail(path, line, "expected on/off, got '" + v + "'");
}

}  // namespace

ExperimentSpec load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config file '" + path + "'");
  ExperimentSpec spec;
  spec.path_loss.resize(0, 0);
  std::vector<Eigen::RowVectorXd> rows;
  bool used_preset_matrix = false;

  std::string raw_line, section;
  int lineno = 0;
  while (std::getline(f, raw_line)) {
    ++lineno;
    std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(path, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) parse_fail(path, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(path, lineno, "empty key");
    if (value.empty()) parse_fail(path, lineno, "empty value for '" + key + "'");

    if (section == "system") {
      if (key == "cells") spec.cells = static_cast<int>(parse_int(path, lineno, value));
      else if (key == "antennas") spec.antennas_per_bs = static_cast<int>(parse_int(path, lineno, value));
      else if (key == "users") spec.users = static_cast<int>(parse_int(path, lineno, value));
      else if (key == "subcarriers") spec.subcarriers = static_cast<int>(parse_int(path, lineno, value));
      else if (key == "coherence") spec.coherence_length = parse_num(path, lineno, value);
      else if (key == "snr_db") spec.snr_db = parse_num(path, lineno, value);
      else if (key == "backhaul") spec.backhaul_bits = parse_num(path, lineno, value);
      else parse_fail(path, lineno, "unknown key '" + key + "' in [system]");
    } else if (section == "path_loss") {
      if (key == "preset") {
        if (value == "paper-3x3") {
          spec.path_loss = example_path_loss_3x3().a;
          used_preset_matrix = true;
        } else {
          parse_fail(path, lineno, "unknown path_loss preset '" + value + "'");
        }
      } else if (key == "row") {
        std::istringstream rs(value);
        std::vector<double> entries;
        std::string tok;
        while (rs >> tok) entries.push_back(parse_num(path, lineno, tok));
        if (entries.empty()) parse_fail(path, lineno, "empty path_loss row");
        Eigen::RowVectorXd r(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) r(static_cast<Eigen::Index>(i)) = entries[i];
        if (!rows.empty() && rows.front().size() != r.size())
          parse_fail(path, lineno, "path_loss rows have different lengths");
        rows.push_back(std::move(r));
      } else {
        parse_fail(path, lineno, "unknown key '" + key + "' in [path_loss]");
      }
    } else if (section == "sweep") {
      if (key == "kind") {
        if (value == "snr") spec.sweep = SweepKind::Snr;
        else if (value == "tau") spec.sweep = SweepKind::Tau;
        else if (value == "backhaul") spec.sweep = SweepKind::Backhaul;
        else parse_fail(path, lineno, "unknown sweep kind '" + value + "'");
      } else if (key == "min") spec.sweep_min = parse_num(path, lineno, value);
      else if (key == "max") spec.sweep_max = parse_num(path, lineno, value);
      else if (key == "step") spec.sweep_step = parse_num(path, lineno, value);
      else if (key == "tau") spec.tau = parse_num(path, lineno, value);
      else parse_fail(path, lineno, "unknown key '" + key + "' in [sweep]");
    } else if (section == "methods") {
      if (key == "det") spec.method_det = parse_bool(path, lineno, value);
      else if (key == "mc") spec.method_mc = parse_bool(path, lineno, value);
      else parse_fail(path, lineno, "unknown key '" + key + "' in [methods]");
    } else if (section == "mc") {
      if (key == "samples") spec.mc_samples = parse_int(path, lineno, value);
      else if (key == "seed") {
        try {
          spec.mc_seed = std::stoull(value);
        } catch (const std::exception&) {
          parse_fail(path, lineno, "expected an unsigned seed, got '" + value + "'");
        }
      } else parse_fail(path, lineno, "unknown key '" + key + "' in [mc]");
    } else if (section == "optimize") {
      if (key == "grid_step") spec.grid_step = parse_num(path, lineno, value);
      else if (key == "tol_tau") spec.tol_tau = parse_num(path, lineno, value);
      else parse_fail(path, lineno, "unknown key '" + key + "' in [optimize]");
    } else if (section == "output") {
      if (key == "prefix") spec.out_prefix = value;
      else parse_fail(path, lineno, "unknown key '" + key + "' in [output]");
    } else if (section.empty()) {
      parse_fail(path, lineno, "key outside any [section]");
    } else {
      parse_fail(path, lineno, "unknown section [" + section + "]");
    }
  }

  if (!rows.empty()) {
    if (used_preset_matrix) throw ValidationError(path + ": both preset and row given in [path_loss]");
    spec.path_loss.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) spec.path_loss.row(static_cast<Eigen::Index>(i)) = rows[i];
  }
  if (spec.path_loss.size() == 0)
    throw ValidationError(path + ": [path_loss] section is required (preset or rows)");
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

ExperimentSpec preset_base() {
  ExperimentSpec s;
  s.cells = 3;
  s.antennas_per_bs = 2;
  s.users = 3;
  s.subcarriers = 1;
  s.path_loss = example_path_loss_3x3().a;
  return s;
}

}  // namespace

std::vector<ExperimentSpec> sweep_preset(const std::string& name) {
  std::vector<ExperimentSpec> out;
  if (name == "fig3" || name == "fig4") {
    for (double c : {1.0, 5.0, 10.0}) {
      ExperimentSpec s = preset_base();
      s.backhaul_bits = c;
      s.coherence_length = 1000.0;
      s.method_det = true;
      s.method_mc = true;
      if (name == "fig3") {
        s.sweep = SweepKind::Snr;
        s.sweep_min = -10.0;
        s.sweep_max = 30.0;
        s.sweep_step = 2.0;
        s.tau = 40.0;
      } else {
        s.sweep = SweepKind::Tau;
        s.snr_db = 0.0;
        s.sweep_min = s.users;
        s.sweep_max = 300.0;
        s.sweep_step = 5.0;
      }
      s.label = "_C" + std::to_string(static_cast<int>(c));
      out.push_back(std::move(s));
    }
    return out;
  }
  throw ValidationError("unknown sweep preset '" + name +
                        "' (fig5/fig6 are optimize presets; available here: fig3, fig4)");
}

std::vector<ExperimentSpec> optimize_preset(const std::string& name) {
  if (name == "fig4") {
    ExperimentSpec s = preset_base();
    s.sweep = SweepKind::Snr;
    s.sweep_min = -10.0;
    s.sweep_max = 30.0;
    s.sweep_step = 2.0;
    s.backhaul_bits = 1.0;
    s.coherence_length = 100.0;
    s.method_det = true;
    s.method_mc = true;
    s.grid_step = 1.0;
    return {s};
  }
  if (name == "fig5" || name == "fig6") {
    ExperimentSpec s = preset_base();
    s.sweep = SweepKind::Backhaul;
    s.sweep_min = 1.0;
    s.sweep_max = 30.0;
    s.sweep_step = 1.0;
    s.snr_db = 10.0;
    s.coherence_length = 1000.0;
    s.method_det = true;
    if (name == "fig6") {
      s.method_mc = true;
      s.grid_step = 5.0;  // keeps the MC grid search tractable over T=1000
    }
    return {s};
  }
  throw ValidationError("unknown optimize preset '" + name +
                        "' (fig3 is a sweep preset; available here: fig4, fig5, fig6)");
}

// ---------------------------------------------------------------------------
// Runs

namespace {

struct RowResult {
  double sweep_value = 0.0;
  double det_net = std::numeric_limits<double>::quiet_NaN();  // nats
  double mc_net = std::numeric_limits<double>::quiet_NaN();
  double mc_se = std::numeric_limits<double>::quiet_NaN();
  double tau_used = std::numeric_limits<double>::quiet_NaN();
  double tau_det = std::numeric_limits<double>::quiet_NaN();
  double tau_mc = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

// System at one sweep point.
SystemConfig point_config(const ExperimentSpec& spec, double value) {
  SystemConfig cfg = spec.base_config();
  if (spec.sweep == SweepKind::Snr) cfg.power = db_to_linear(value) * cfg.subcarriers;
  if (spec.sweep == SweepKind::Backhaul) cfg.backhaul_bits = value;
  return cfg;
}

std::vector<std::string> provenance(const ExperimentSpec& spec, const char* mode) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(spec.config_hash()));
  return {
      std::string(kToolName) + " " + kToolVersion,
      std::string("mode: ") + mode,
      std::string("sweep: ") + sweep_name(spec.sweep),
      std::string("schema: sweep-v1 (") + kSchema + ")",
      std::string("config_hash: ") + hash,
      std::string("seed: ") + std::to_string(spec.mc_seed),
  };
}

std::vector<std::string> to_cells(const RowResult& r, std::uint64_t seed, bool mc_enabled) {
  std::vector<std::string> cells(8);
  cells[0] = format_double(r.sweep_value);
  cells[1] = format_double(nats_to_bits(r.det_net));
  cells[2] = format_double(nats_to_bits(r.mc_net));
  cells[3] = format_double(nats_to_bits(r.mc_se));
  cells[4] = format_double(r.tau_used);
  cells[5] = format_double(r.tau_det);
  cells[6] = format_double(r.tau_mc);
  cells[7] = mc_enabled ? std::to_string(seed) : "";
  return cells;
}

int write_rows(const ExperimentSpec& spec, const char* mode,
               const std::vector<RowResult>& rows, std::ostream& log) {
  CsvTable t;
  t.comments = provenance(spec, mode);
  {
    std::istringstream cols(kSchema);
    std::string c;
    while (std::getline(cols, c, ',')) t.columns.push_back(c);
  }
  int failures = 0;
  for (const auto& r : rows) {
    t.rows.push_back(to_cells(r, spec.mc_seed, spec.method_mc));
    if (!r.error.empty()) ++failures;
  }
  const std::string path = spec.out_prefix + spec.label + ".csv";
  // Failure notes go after the data as comment lines appended to the file.
  write_csv(path, t);
  if (failures > 0) {
    std::ofstream f(path, std::ios::binary | std::ios::app);
    for (const auto& r : rows)
      if (!r.error.empty())
        f << "# failed: sweep_value=" << format_double(r.sweep_value) << " " << r.error << "\n";
  }
  log << path << ": " << rows.size() << " rows";
  if (failures > 0) log << ", " << failures << " failed";
  log << "\n";
  return failures > 0 ? 2 : 0;
}

}  // namespace

int run_sweep(const ExperimentSpec& spec, std::ostream& log) {
  spec.validate();
  const std::vector<double> values = spec.sweep_values();
  std::vector<RowResult> rows(values.size());
  detail::parallel_for(static_cast<std::int64_t>(values.size()), spec.workers,
                       [&](std::int64_t i) {
    RowResult& r = rows[static_cast<std::size_t>(i)];
    r.sweep_value = values[static_cast<std::size_t>(i)];
    const SystemConfig cfg = point_config(spec, r.sweep_value);
    const double tau = spec.sweep == SweepKind::Tau ? r.sweep_value : spec.tau;
    r.tau_used = tau;
    VarianceProfile raw = build_variance_profile(PathLossMatrix(spec.path_loss),
                                                 cfg.antennas_per_bs);
    QuantizationNoise q = quantization_noise(cfg, raw);
    if (spec.method_det) {
      try {
        EffectiveProfile eff = effective_profile(cfg, raw, q, tau);
        DetEquivSolution sol = solve_fixed_point(eff.profile, cfg.power, cfg.subcarriers);
        r.det_net = (1.0 - tau / cfg.coherence_length) * rate_det(sol);
      } catch (const std::runtime_error& e) {
        r.error = e.what();
      }
    }
    if (spec.method_mc) {
      try {
        MonteCarloEstimate est =
            estimate_net_rate(cfg, raw, q, tau, spec.mc_samples, spec.mc_seed, 1);
        r.mc_net = est.mean;
        r.mc_se = est.std_err;
      } catch (const std::runtime_error& e) {
        if (!r.error.empty()) r.error += "; ";
        r.error += e.what();
      }
    }
  });
  return write_rows(spec, "sweep", rows, log);
}

int run_optimum(const ExperimentSpec& spec, std::ostream& log) {
  spec.validate();
  if (spec.sweep == SweepKind::Tau)
    throw ValidationError("optimize sweeps over snr or backhaul, not tau");
  const std::vector<double> values = spec.sweep_values();
  std::vector<RowResult> rows(values.size());
  // MC grid search already fans out inside a point; parallelize across
  // points only for det-only runs.
  const int outer_workers = spec.method_mc ? 1 : spec.workers;
  detail::parallel_for(static_cast<std::int64_t>(values.size()), outer_workers,
                       [&](std::int64_t i) {
    RowResult& r = rows[static_cast<std::size_t>(i)];
    r.sweep_value = values[static_cast<std::size_t>(i)];
    const SystemConfig cfg = point_config(spec, r.sweep_value);
    VarianceProfile raw = build_variance_profile(PathLossMatrix(spec.path_loss),
                                                 cfg.antennas_per_bs);
    QuantizationNoise q = quantization_noise(cfg, raw);
    try {
      OptimizeDetOptions opt;
      opt.tol_tau = spec.tol_tau;
      TrainingOptimum det = optimize_det(cfg, raw, q, opt);
      r.tau_det = det.tau_star;
      r.det_net = det.net_rate;
      if (spec.method_mc) {
        std::vector<double> grid;
        for (double tau = static_cast<double>(cfg.users); tau <= cfg.coherence_length;
             tau += spec.grid_step)
          grid.push_back(tau);
        TrainingOptimum mc = optimize_mc(cfg, raw, q, grid, spec.mc_samples, spec.mc_seed,
                                         spec.workers);
        r.tau_mc = mc.tau_star;
        r.mc_net = mc.net_rate;
        r.mc_se = estimate_net_rate(cfg, raw, q, mc.tau_star, spec.mc_samples, spec.mc_seed,
                                    spec.workers)
                      .std_err;
      }
    } catch (const std::runtime_error& e) {
      r.error = e.what();
    }
  });
  return write_rows(spec, "optimize", rows, log);
}

// ---------------------------------------------------------------------------
// Plot

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> pts;
};

const char* kPalette[] = {"#1f6feb", "#d1242f", "#1a7f37", "#9a6700", "#8250df", "#bf3989"};

std::string axis_label(bool rate_kind) {
  if (rate_kind) return "net rate (bits/channel use)";
  return "optimal training length (channel uses)";
}

std::string x_label(const std::string& sweep) {
  if (sweep == "snr") return "SNR (dB)";
  if (sweep == "tau") return "training length (channel uses)";
  if (sweep == "backhaul") return "backhaul capacity (bits/channel use)";
  return "sweep value";
}

std::string stem_of(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

void emit_plot(const std::vector<std::string>& csv_paths, const std::string& kind,
               const std::string& out_svg) {
  if (csv_paths.empty()) throw ValidationError("emit_plot: no input files");
  const bool rate_kind = kind == "rate";
  if (!rate_kind && kind != "tau")
    throw ValidationError("emit_plot: kind must be 'rate' or 'tau'");

  std::vector<Series> series;
  std::string sweep = "?";
  std::vector<std::string> sources;
  for (const auto& path : csv_paths) {
    CsvTable t = read_csv(path);
    for (const auto& c : t.comments) {
      if (c.rfind("sweep: ", 0) == 0) sweep = c.substr(7);
      if (c.rfind("config_hash: ", 0) == 0)
        sources.push_back(stem_of(path) + " " + c);
    }
    const auto x = t.numeric_column("sweep_value");
    const std::vector<std::pair<std::string, std::string>> wanted =
        rate_kind ? std::vector<std::pair<std::string, std::string>>{
                        {"r_net_det_bits", "det"}, {"r_net_mc_bits", "mc"}}
                  : std::vector<std::pair<std::string, std::string>>{
                        {"tau_star_det", "det"}, {"tau_star_mc", "mc"}};
    for (const auto& [col, tag] : wanted) {
      if (t.column_index(col) < 0) continue;
      const auto y = t.numeric_column(col);
      Series s;
      s.name = stem_of(path) + " (" + tag + ")";
      for (std::size_t i = 0; i < x.size(); ++i)
        if (std::isfinite(x[i]) && std::isfinite(y[i])) s.pts.emplace_back(x[i], y[i]);
      if (!s.pts.empty()) series.push_back(std::move(s));
    }
  }
  std::size_t total = 0;
  for (const auto& s : series) total += s.pts.size();
  if (total == 0) throw ValidationError("emit_plot: no finite data points in input");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (auto [px, py] : s.pts) {
      xmin = std::min(xmin, px); xmax = std::max(xmax, px);
      ymin = std::min(ymin, py); ymax = std::max(ymax, py);
    }
  if (xmax == xmin) { xmax += 1.0; xmin -= 1.0; }
  if (ymax == ymin) { ymax += 1.0; ymin -= 1.0; }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad; ymax += ypad;

  const double w = 760, h = 500, ml = 70, mr = 20, mt = 20, mb = 55;
  auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto sy = [&](double v) { return h - mb - (v - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<!-- " << kToolName << " " << kToolVersion;
  for (const auto& s : sources) svg << " | " << s;
  svg << " -->\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    svg << "<line x1=\"" << sx(xv) << "\" y1=\"" << h - mb << "\" x2=\"" << sx(xv) << "\" y2=\""
        << h - mb + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << h - mb + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">" << format_double(std::round(xv * 100) / 100)
        << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml << "\" y2=\""
        << sy(yv) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << format_double(std::round(yv * 100) / 100)
        << "</text>\n";
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 15
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label(sweep) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (mt + h - mb) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (mt + h - mb) / 2 << ")\">" << axis_label(rate_kind) << "</text>\n";

  int color = 0;
  double legend_y = mt + 14;
  for (const auto& s : series) {
    const char* c = kPalette[color % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (auto [px, py] : s.pts) svg << sx(px) << "," << sy(py) << " ";
    svg << "\"/>\n";
    svg << "<line x1=\"" << w - mr - 170 << "\" y1=\"" << legend_y - 4 << "\" x2=\""
        << w - mr - 150 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << c
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << w - mr - 144 << "\" y=\"" << legend_y
        << "\" font-size=\"11\">" << s.name << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "</svg>\n";

  std::ofstream f(out_svg, std::ios::binary);
  if (!f) throw std::runtime_error("emit_plot: cannot open '" + out_svg + "'");
  f << svg.str();
  if (!f) throw std::runtime_error("emit_plot: write failed");
}

}  // namespace netmimo
