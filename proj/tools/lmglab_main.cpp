// lmglab: command-line laboratory for the driven Lipkin-Meshkov-Glick model.
// Every subcommand emits a CSV (or JSON) table with an embedded run manifest;
// see README.md for the column reference.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "lmglab/classical.hpp"
#include "lmglab/constants.hpp"
#include "lmglab/core.hpp"
#include "lmglab/io.hpp"
#include "lmglab/open_system.hpp"
#include "lmglab/semiclassics.hpp"

namespace {

using lmg::core::ModelParams;
using nlohmann::json;

// The ten dephasing rates of the main correlator figure (s^-1).
const std::vector<double> kFigureGammas = {0.005, 0.01, 0.02, 0.05, 0.1,
                                           0.2,   0.3,  0.5,  1.0, 2.0};

// Scan fan-out: runs body(i) for i in [0, count) on a bounded worker pool.
// Callers store results by index, so output order follows input order no
// matter which worker finishes first.
template <typename Body>
void parallel_for(std::size_t count, const Body& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct CommonOpts {
  int n = 370;
  double gamma_ratio = 0.95;
  double temp_nk = 10.0;
  double bias_h = 0.0;
  double j_phys = lmg::J_PHYS_DEFAULT;
  std::string format = "csv";
  std::string output;
};

ModelParams to_params(const CommonOpts& opts) {
  ModelParams p;
  p.n_spins = opts.n;
  p.gamma_ratio = opts.gamma_ratio;
  p.temp_nk = opts.temp_nk;
  p.bias_h = opts.bias_h;
  p.j_phys = opts.j_phys;
  p.validate();
  return p;
}

// Shared flags; each subcommand picks up the ones it documents.
void add_model_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--n", opts.n, "Number of spins");
  cmd->add_option("--gamma-ratio", opts.gamma_ratio, "Transverse field Gamma/J");
  cmd->add_option("--temp-nk", opts.temp_nk, "Temperature in nK");
  cmd->add_option("--bias-h", opts.bias_h, "Longitudinal bias h/J");
  cmd->add_option("--j-phys", opts.j_phys, "Coupling J in rad/s");
}

void add_output_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--format", opts.format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("-o,--output", opts.output,
                  "Output file ('-' or empty for stdout; relative paths use "
                  "$LMGLAB_OUTDIR)");
}

lmg::io::Manifest make_manifest(const std::string& command_line,
                                const CommonOpts& opts) {
  auto manifest = lmg::io::Manifest::create(command_line);
  manifest.add("n", opts.n);
  manifest.add("gamma_ratio", opts.gamma_ratio);
  manifest.add("temp_nk", opts.temp_nk);
  manifest.add("bias_h", opts.bias_h);
  manifest.add("j_phys", opts.j_phys);
  return manifest;
}

void emit(const CommonOpts& opts, const lmg::io::Table& table,
          const lmg::io::Manifest& manifest) {
  lmg::io::write_artifact(opts.output, table, manifest, opts.format);
}

// ---------------------------------------------------------------------------
// spectrum

void run_spectrum(const std::string& cmdline, const CommonOpts& opts, int levels) {
  const ModelParams params = to_params(opts);
  const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(params));
  const auto q_diag = lmg::core::sign_observable(params.n_spins);
  auto manifest = make_manifest(cmdline, opts);

  if (levels > 0) {
    const int k_max = std::min<int>(levels, spec.dim());
    lmg::io::Table table({"level", "energy", "energy_rad_s", "gap_ratio",
                          "q_k0_sq", "jz2"});
    const double de = spec.eigenvalues(1) - spec.eigenvalues(0);
    for (int k = 0; k < k_max; ++k) {
      const double qk0 = lmg::core::eigenbasis_element(spec, q_diag, k, 0);
      table.add_row({k, spec.eigenvalues(k), spec.eigenvalues(k) * params.j_phys,
                     (spec.eigenvalues(k) - spec.eigenvalues(0)) / de,
                     qk0 * qk0, lmg::core::jz2_expectation(spec, k)});
    }
    emit(opts, table, manifest);
    return;
  }

  const double q01 = lmg::core::eigenbasis_element(spec, q_diag, 0, 1);
  const double de = spec.delta_e();
  const double gap21 = (spec.eigenvalues(2) - spec.eigenvalues(1)) / de;
  lmg::io::Table table(
      {"n", "gamma_ratio", "delta_e_rad_s", "q01_sq", "m0_weight_pct",
       "gap_ratio_21", "jz2_e0", "jz2_e1", "chi_exact", "chi_two_level",
       "e0", "e1", "e2"});
  table.add_row({params.n_spins, params.gamma_ratio, de * params.j_phys,
                 q01 * q01, 100.0 * lmg::core::m0_weight(spec),
                 gap21, lmg::core::jz2_expectation(spec, 0),
                 lmg::core::jz2_expectation(spec, 1),
                 lmg::core::susceptibility(params, lmg::core::ChiMode::exact),
                 lmg::core::susceptibility(params, lmg::core::ChiMode::two_level),
                 spec.eigenvalues(0), spec.eigenvalues(1), spec.eigenvalues(2)});
  emit(opts, table, manifest);
}

// ---------------------------------------------------------------------------
// k3 and k3-scan

struct K3Row {
  double c12 = 0.0, c23 = 0.0, c13 = 0.0, k3 = 0.0;
};

K3Row compute_k3_row(const lmg::open_system::LevelSystem& sys, double gamma_phi_s,
                     const std::string& protocol) {
  if (protocol == "stationary") {
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(sys.n_levels, sys.n_levels);
    rho0(0, 0) = 1.0;
    const auto rep = lmg::open_system::k3_stationary_report(sys, gamma_phi_s, rho0);
    // Stationary protocol assumes C23 = C12.
    return {rep.c12, rep.c12, rep.c13, rep.k3};
  }
  const auto rep = lmg::open_system::k3_sequential(sys, gamma_phi_s);
  return {rep.c12, rep.c23, rep.c13, rep.k3};
}

void append_k3_row(lmg::io::Table& table, const lmg::open_system::LevelSystem& sys,
                   double gamma_phi_s, const std::string& protocol) {
  const K3Row row = compute_k3_row(sys, gamma_phi_s, protocol);
  table.add_row({gamma_phi_s, sys.n_levels, protocol, row.c12, row.c23, row.c13,
                 row.k3});
}

void run_k3(const std::string& cmdline, const CommonOpts& opts, double gamma_phi,
            int levels, const std::string& protocol) {
  const ModelParams params = to_params(opts);
  const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(params));
  const auto sys = lmg::open_system::truncate(
      spec, lmg::core::sign_observable(params.n_spins), levels, params.j_phys);

  auto manifest = make_manifest(cmdline, opts);
  manifest.add("gamma_phi_s", gamma_phi);
  manifest.add("levels", levels);
  manifest.add("protocol", protocol);

  lmg::io::Table table(
      {"gamma_phi_s", "levels", "protocol", "c12", "c23", "c13", "k3"});
  append_k3_row(table, sys, gamma_phi, protocol);
  emit(opts, table, manifest);
}

void run_k3_scan(const std::string& cmdline, const CommonOpts& opts,
                 std::vector<double> gammas, std::vector<int> levels_list,
                 const std::string& protocol, bool two_level_curve) {
  const ModelParams params = to_params(opts);
  const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(params));
  const auto q_diag = lmg::core::sign_observable(params.n_spins);
  if (gammas.empty()) gammas = kFigureGammas;
  if (levels_list.empty()) levels_list = {5, 10};

  auto manifest = make_manifest(cmdline, opts);
  manifest.add("protocol", protocol);

  if (two_level_curve) {
    // Analytic two-level decay curve K3 = Q01^2 (x + x^2/2), x = exp(-dt/T2),
    // with 1/T2 = gamma * Gamma_01.  "Published" uses the fixed benchmark
    // reference constants; "recomputed" uses this spectrum.
    const double q01 = lmg::core::eigenbasis_element(spec, q_diag, 0, 1);
    const double de_rad_s = spec.delta_e() * params.j_phys;
    const double gamma01 = 0.5 * (lmg::core::jz2_expectation(spec, 0) +
                                  lmg::core::jz2_expectation(spec, 1));
    lmg::io::Table table({"gamma_phi_s", "k3_two_level_published",
                          "k3_two_level_recomputed"});
    for (double g : gammas) {
      const double pub =
          lmg::semiclassics::k3_two_level(1000.0 / (g * 2839.0), 1310.0, 0.9436);
      const double rec = lmg::semiclassics::k3_two_level(1000.0 / (g * gamma01),
                                                         de_rad_s, q01 * q01);
      table.add_row({g, pub, rec});
    }
    emit(opts, table, manifest);
    return;
  }

  // Fan the (levels x gammas) grid out over workers; rows land in input order.
  std::vector<lmg::open_system::LevelSystem> systems;
  systems.reserve(levels_list.size());
  for (int n_levels : levels_list) {
    systems.push_back(
        lmg::open_system::truncate(spec, q_diag, n_levels, params.j_phys));
  }
  std::vector<K3Row> results(systems.size() * gammas.size());
  parallel_for(results.size(), [&](std::size_t i) {
    const auto& sys = systems[i / gammas.size()];
    results[i] = compute_k3_row(sys, gammas[i % gammas.size()], protocol);
  });

  lmg::io::Table table(
      {"gamma_phi_s", "levels", "protocol", "c12", "c23", "c13", "k3"});
  for (std::size_t i = 0; i < results.size(); ++i) {
    table.add_row({gammas[i % gammas.size()], levels_list[i / gammas.size()],
                   protocol, results[i].c12, results[i].c23, results[i].c13,
                   results[i].k3});
  }
  emit(opts, table, manifest);
}

// ---------------------------------------------------------------------------
// threshold

void run_threshold(const std::string& cmdline, const CommonOpts& opts,
                   std::vector<int> levels_list) {
  const ModelParams params = to_params(opts);
  const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(params));
  const auto q_diag = lmg::core::sign_observable(params.n_spins);
  if (levels_list.empty()) levels_list = {2, 3, 4, 5, 10};

  auto manifest = make_manifest(cmdline, opts);
  std::vector<double> thresholds(levels_list.size());
  parallel_for(levels_list.size(), [&](std::size_t i) {
    const auto sys =
        lmg::open_system::truncate(spec, q_diag, levels_list[i], params.j_phys);
    thresholds[i] = lmg::open_system::threshold_gamma(sys);
  });

  lmg::io::Table table({"levels", "gamma_thresh_s", "t2_phys_ms"});
  for (std::size_t i = 0; i < levels_list.size(); ++i) {
    table.add_row({levels_list[i], thresholds[i],
                   lmg::open_system::t2_phys_ms(spec, thresholds[i])});
  }
  emit(opts, table, manifest);
}

// ---------------------------------------------------------------------------
// hierarchy

void run_hierarchy(const std::string& cmdline, const CommonOpts& opts,
                   double gamma_ref) {
  const ModelParams params = to_params(opts);
  const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(params));
  const auto sys = lmg::open_system::truncate(
      spec, lmg::core::sign_observable(params.n_spins), 5, params.j_phys);
  const double gamma_c = lmg::open_system::threshold_gamma(sys);
  const auto rep = lmg::semiclassics::hierarchy(params, spec, gamma_c, gamma_ref);

  auto manifest = make_manifest(cmdline, opts);
  manifest.add("gamma_ref_s", gamma_ref);
  lmg::io::Table table({"gamma_a_s", "gamma_b_s", "gamma_c_s", "b_over_a",
                        "c_over_b", "xi", "t2_coll_ms", "t2_local_ms",
                        "t2_phys_ms"});
  table.add_row({rep.gamma_a, rep.gamma_b, rep.gamma_c, rep.gamma_b / rep.gamma_a,
                 rep.gamma_c / rep.gamma_b, rep.xi_root, rep.t2_coll_ms,
                 rep.t2_local_ms, rep.t2_phys_ms});
  emit(opts, table, manifest);
}

// ---------------------------------------------------------------------------
// goldilocks

void run_goldilocks(const std::string& cmdline, const CommonOpts& opts, int n_min,
                    int n_max, int step, std::vector<int> includes, bool derivative,
                    bool table1, bool fit_c0) {
  auto manifest = make_manifest(cmdline, opts);

  if (fit_c0) {
    // Convenience fit of DeltaE(N) = C0 sqrt(N) exp(-N S) over N in [50, 500]:
    // regress ln(DeltaE) - ln(sqrt(N)) linearly on N.
    double sum_n = 0.0, sum_y = 0.0, sum_nn = 0.0, sum_ny = 0.0;
    int count = 0;
    for (int n = 50; n <= 500; n += 10) {
      CommonOpts o = opts;
      o.n = n;
      const ModelParams p = to_params(o);
      const double de =
          lmg::core::diagonalize(lmg::core::build_hamiltonian(p)).delta_e();
      const double y = std::log(de) - 0.5 * std::log(static_cast<double>(n));
      sum_n += n;
      sum_y += y;
      sum_nn += static_cast<double>(n) * n;
      sum_ny += n * y;
      ++count;
    }
    const double slope = (count * sum_ny - sum_n * sum_y) /
                         (count * sum_nn - sum_n * sum_n);
    const double intercept = (sum_y - slope * sum_n) / count;
    const double c0_rad_s = std::exp(intercept) * opts.j_phys;
    lmg::io::Table table({"gamma_ratio", "s_fit", "s_inst", "c0_rad_s",
                          "c0_over_kbt"});
    table.add_row({opts.gamma_ratio, -slope,
                   lmg::semiclassics::instanton_action(opts.gamma_ratio), c0_rad_s,
                   c0_rad_s / (lmg::KBT_PER_NK * opts.temp_nk)});
    emit(opts, table, manifest);
    return;
  }

  if (table1) {
    lmg::io::Table table({"gamma_ratio", "c0_over_kbt", "s_inst", "nc_analytic",
                          "nc_root", "nc_root_lo", "nc_root_hi"});
    for (const auto& fit : lmg::semiclassics::GOLDILOCKS_FITS) {
      const auto row = lmg::semiclassics::goldilocks(fit.gamma_ratio, fit.c0_over_kbt);
      table.add_row({row.gamma_ratio, row.c0_over_kbt, row.s_inst, row.nc_analytic,
                     row.nc_root, row.nc_root_lo, row.nc_root_hi});
    }
    emit(opts, table, manifest);
    return;
  }

  if (n_min < 2 || n_max < n_min || step < 1) {
    throw std::invalid_argument("goldilocks: need 2 <= n-min <= n-max and step >= 1");
  }
  std::vector<int> ns;
  for (int n = n_min; n <= n_max; n += step) ns.push_back(n);
  for (int n : includes) {
    if (std::find(ns.begin(), ns.end(), n) == ns.end()) ns.push_back(n);
  }

  const auto delta_e_at = [&](int n) {
    CommonOpts o = opts;
    o.n = n;
    const ModelParams p = to_params(o);
    return lmg::core::diagonalize(lmg::core::build_hamiltonian(p)).delta_e() *
           p.j_phys;
  };

  struct ScanPoint {
    double de = 0.0;
    double deriv = 0.0;
  };
  std::vector<ScanPoint> points(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    points[i].de = delta_e_at(ns[i]);
    if (derivative) {
      points[i].deriv = (delta_e_at(ns[i] + 2) - delta_e_at(ns[i] - 2)) / 4.0;
    }
  });

  std::vector<std::string> columns = {"n", "delta_e_rad_s", "kbt_rad_s",
                                      "delta_e_over_kbt"};
  if (derivative) columns.push_back("d_delta_e_dn");
  lmg::io::Table table(columns);
  const double kbt = lmg::KBT_PER_NK * opts.temp_nk;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<json> row = {ns[i], points[i].de, kbt, points[i].de / kbt};
    if (derivative) row.push_back(points[i].deriv);
    table.add_row(std::move(row));
  }
  emit(opts, table, manifest);
}

// ---------------------------------------------------------------------------
// lz

void run_lz(const std::string& cmdline, const CommonOpts& opts,
            std::vector<double> tau_qs, double delta_h) {
  const ModelParams params = to_params(opts);
  const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(params));
  const double de_rad_s = spec.delta_e() * params.j_phys;
  const double mstar = lmg::semiclassics::order_parameter(params.gamma_ratio);
  const auto window = lmg::semiclassics::sweep_window(params, de_rad_s);
  if (delta_h <= 0.0) delta_h = std::sqrt(window.lo_rad_s * window.hi_rad_s);
  if (tau_qs.empty()) {
    tau_qs = {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0};
  }

  auto manifest = make_manifest(cmdline, opts);
  manifest.add("delta_h_rad_s", delta_h);
  manifest.add("window_lo_rad_s", window.lo_rad_s);
  manifest.add("window_hi_rad_s", window.hi_rad_s);

  // x is the sweep-time variable of the error plot: P_LZ = exp(-pi x) with
  // x = DeltaE^2 tau_Q / (4 alpha); the crossover column is the schematic
  // thermal interpolation exp(-pi x) e^{-x^2} + (1 - e^{-x^2}).
  const double alpha_per_tau = params.n_spins * mstar * delta_h;
  lmg::io::Table table({"tau_q_s", "x", "p_lz", "p_crossover"});
  for (double tau : tau_qs) {
    const double p =
        lmg::semiclassics::lz_error(de_rad_s, params.n_spins, mstar, delta_h, tau);
    const double x = de_rad_s * de_rad_s * tau / (4.0 * alpha_per_tau);
    const double env = std::exp(-x * x);
    table.add_row({tau, x, p, p * env + (1.0 - env)});
  }
  emit(opts, table, manifest);
}

// ---------------------------------------------------------------------------
// foil

struct FoilOpts {
  std::string mode = "bloch";
  double gamma_eff = 1.0;
  double dt = 0.0;  // 0 = per-mode default
  int n_paths = 0;  // 0 = per-mode default
  std::uint64_t seed = 20260814;
  double t_final = 0.0;
  double t_max = 0.0;
  int stride = 0;
  int bins = 20;
  double mx = -1.0, my = 0.0, mz = -1.0;  // sentinel: fixed point when unset
  std::vector<double> tau_qs;
};

void run_foil_bloch(const CommonOpts& opts, const FoilOpts& foil,
                    lmg::io::Table& table) {
  const ModelParams params = to_params(opts);
  const double mstar = lmg::semiclassics::order_parameter(params.gamma_ratio);
  lmg::classical::BlochState s{foil.mx, foil.my, foil.mz};
  if (foil.mx < -0.999 && foil.mz < -0.999) {
    s = {params.gamma_ratio, 0.0, mstar};  // ordered fixed point
  }
  const double dt = (foil.dt > 0.0) ? foil.dt : 1e-3;
  const double t_final = (foil.t_final > 0.0) ? foil.t_final : 100.0;
  const int stride = (foil.stride > 0) ? foil.stride : 100;
  const auto traj = lmg::classical::integrate_bloch(s, params, t_final, dt, stride);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& b = traj[i];
    table.add_row({static_cast<double>(i) * stride * dt, b.mx, b.my, b.mz,
                   b.norm()});
  }
}

void run_foil_mfpt(const CommonOpts& opts, const FoilOpts& foil,
                   lmg::io::Table& table) {
  lmg::classical::LangevinConfig cfg;
  cfg.params = to_params(opts);
  cfg.gamma_eff = foil.gamma_eff;
  cfg.dt = (foil.dt > 0.0) ? foil.dt : 0.02;
  cfg.n_paths = (foil.n_paths > 0) ? foil.n_paths : 100;
  cfg.seed = foil.seed;
  const double exponent = lmg::semiclassics::barrier(cfg.params).exponent;
  const double tau_full = lmg::semiclassics::kramers_time_s(
      cfg.params, foil.gamma_eff, lmg::semiclassics::KramersMode::full);
  const double t_max =
      (foil.t_max > 0.0) ? foil.t_max : 10.0 * tau_full * cfg.params.j_phys;
  const auto r = lmg::classical::mfpt_estimate(cfg, t_max);
  table.add_row({cfg.params.n_spins, cfg.params.gamma_ratio, cfg.params.temp_nk,
                 exponent, r.mean_s, r.stderr_s, r.n_passages,
                 lmg::semiclassics::kramers_time_s(
                     cfg.params, foil.gamma_eff,
                     lmg::semiclassics::KramersMode::attempt_period),
                 tau_full});
}

void run_foil_equilibrium(const CommonOpts& opts, const FoilOpts& foil,
                          lmg::io::Table& table) {
  lmg::classical::LangevinConfig cfg;
  cfg.params = to_params(opts);
  cfg.gamma_eff = foil.gamma_eff;
  cfg.dt = (foil.dt > 0.0) ? foil.dt : 0.01;
  cfg.n_paths = (foil.n_paths > 0) ? foil.n_paths : 30;
  cfg.seed = foil.seed;
  const double t_final = (foil.t_final > 0.0) ? foil.t_final : 200.0;
  const int stride = (foil.stride > 0) ? foil.stride : 200;
  const auto paths = lmg::classical::simulate_langevin(cfg, t_final, stride);

  // Histogram the post-burn-in samples against the Boltzmann weight.
  const int burn_in = static_cast<int>(paths.front().size() / 5);
  std::vector<int> counts(foil.bins, 0);
  long n_samples = 0;
  for (const auto& path : paths) {
    for (std::size_t i = burn_in; i < path.size(); ++i) {
      int b = static_cast<int>((path[i] + 1.0) / 2.0 * foil.bins);
      b = std::clamp(b, 0, foil.bins - 1);
      ++counts[b];
      ++n_samples;
    }
  }
  const double t_dim = cfg.params.kbt_dimensionless();
  std::vector<double> weights(foil.bins);
  double z = 0.0;
  const double f_ref = lmg::semiclassics::free_energy(0.0, cfg.params);
  for (int b = 0; b < foil.bins; ++b) {
    const double center = -1.0 + (b + 0.5) * 2.0 / foil.bins;
    const double f = lmg::semiclassics::free_energy(center, cfg.params) - f_ref;
    weights[b] = std::exp(-cfg.params.n_spins * f / t_dim);
    z += weights[b];
  }
  for (int b = 0; b < foil.bins; ++b) {
    const double center = -1.0 + (b + 0.5) * 2.0 / foil.bins;
    table.add_row({center, counts[b], n_samples * weights[b] / z});
  }
}

void run_foil_sweep(const CommonOpts& opts, const FoilOpts& foil,
                    lmg::io::Table& table) {
  const ModelParams params = to_params(opts);
  if (foil.tau_qs.empty()) {
    throw std::invalid_argument("foil sweep: provide --tau-q values (seconds)");
  }
  const double tau_k = lmg::semiclassics::kramers_time_s(
      params, foil.gamma_eff, lmg::semiclassics::KramersMode::attempt_period);
  const int n_paths = (foil.n_paths > 0) ? foil.n_paths : 400;
  for (double tau : foil.tau_qs) {
    table.add_row({tau,
                   lmg::classical::classical_p_error(tau, params, foil.gamma_eff,
                                                     n_paths, foil.seed),
                   tau_k});
  }
}

void run_foil(const std::string& cmdline, const CommonOpts& opts,
              const FoilOpts& foil) {
  auto manifest = make_manifest(cmdline, opts);
  manifest.add("mode", foil.mode);
  manifest.add("gamma_eff", foil.gamma_eff);

  if (foil.mode == "bloch") {
    lmg::io::Table table({"t", "mx", "my", "mz", "norm"});
    run_foil_bloch(opts, foil, table);
    emit(opts, table, manifest);
  } else if (foil.mode == "mfpt") {
    manifest.seed = foil.seed;
    lmg::io::Table table({"n", "gamma_ratio", "temp_nk", "exponent", "mfpt_s",
                          "stderr_s", "n_passages", "kramers_attempt_s",
                          "kramers_full_s"});
    run_foil_mfpt(opts, foil, table);
    emit(opts, table, manifest);
  } else if (foil.mode == "equilibrium") {
    manifest.seed = foil.seed;
    lmg::io::Table table({"bin_center", "observed", "expected"});
    run_foil_equilibrium(opts, foil, table);
    emit(opts, table, manifest);
  } else if (foil.mode == "sweep") {
    manifest.seed = foil.seed;
    lmg::io::Table table({"tau_q_s", "p_error_class", "tau_k_s"});
    run_foil_sweep(opts, foil, table);
    emit(opts, table, manifest);
  } else {
    throw std::invalid_argument("foil: unknown mode " + foil.mode);
  }
}

// ---------------------------------------------------------------------------
// selftest

int run_selftest() {
  int failures = 0;
  const auto check = [&failures](bool ok, const std::string& name) {
    std::cout << (ok ? "PASS: " : "FAIL: ") << name << '\n';
    if (!ok) ++failures;
  };

  // N=2 exact spectrum at Gamma/J = 0.5.
  {
    ModelParams p;
    p.n_spins = 2;
    p.gamma_ratio = 0.5;
    const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(p));
    const double r5 = std::sqrt(5.0);
    const bool ok = std::abs(spec.eigenvalues(0) - (-1.0 - r5) / 2.0) < 1e-10 &&
                    std::abs(spec.eigenvalues(1) - (-1.0)) < 1e-10 &&
                    std::abs(spec.eigenvalues(2) - (-1.0 + r5) / 2.0) < 1e-10;
    check(ok, "N=2 eigenvalues");
  }

  // Pure-dephasing coherence decay: H = 0, Jz = diag(-1,0,1), gamma = 0.1.
  lmg::open_system::LevelSystem toy;
  toy.n_levels = 3;
  toy.h_diag = Eigen::Vector3d::Zero();
  toy.jz = Eigen::Vector3d(-1.0, 0.0, 1.0).asDiagonal();
  toy.q = toy.jz;
  toy.delta_e = 1.0;
  toy.j_phys = 1.0;
  {
    const auto gen = lmg::open_system::build_superoperator(toy, 0.1);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
    rho(0, 2) = 1.0;
    const auto out = lmg::open_system::propagate(gen, rho, 2.0);
    check(std::abs(out(0, 2).real() - std::exp(-0.4)) < 1e-8, "dephasing decay");
  }
  {
    const auto gen = lmg::open_system::build_superoperator(toy, 0.1);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
    rho.diagonal() << 0.2, 0.3, 0.5;
    const auto out = lmg::open_system::propagate(gen, rho, 2.0);
    check(std::abs(out.trace().real() - 1.0) < 1e-10, "trace preservation");
  }

  // Parity: energy eigenstates carry no Jz diagonal.
  {
    ModelParams p;
    p.n_spins = 12;
    p.gamma_ratio = 0.7;
    const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(p));
    double worst = 0.0;
    for (int k = 0; k < spec.dim(); ++k) {
      worst = std::max(worst,
                       std::abs(lmg::core::eigenbasis_element(spec, spec.m_grid, k, k)));
    }
    check(worst < 1e-9, "parity zeros");
  }

  // Unitary limit: purity conserved at gamma = 0.
  {
    ModelParams p;
    p.n_spins = 370;
    p.gamma_ratio = 0.95;
    const auto spec = lmg::core::diagonalize(lmg::core::build_hamiltonian(p));
    const auto sys = lmg::open_system::truncate(
        spec, lmg::core::sign_observable(p.n_spins), 5, p.j_phys);
    const auto gen = lmg::open_system::build_superoperator(sys, 0.0);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(5, 5);
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.5;
    rho(0, 1) = rho(1, 0) = 0.5;
    const auto out =
        lmg::open_system::propagate(gen, rho, lmg::open_system::default_dt(sys));
    const double purity = (out * out).trace().real();
    check(std::abs(purity - 1.0) < 1e-9, "unitary purity");

    // Thermal doublet mixtures leave K3 unchanged (two-level instrument).
    const auto sys2 = lmg::open_system::truncate(
        spec, lmg::core::sign_observable(p.n_spins), 2, p.j_phys);
    const auto pure = lmg::open_system::k3_stationary(sys2, 0.05);
    Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Zero(2, 2);
    mixed(0, 0) = 1.0 - 0.731;
    mixed(1, 1) = 0.731;
    const auto rep = lmg::open_system::k3_stationary_report(sys2, 0.05, mixed);
    check(std::abs(rep.k3 - pure) < 1e-6, "thermal mixture invariance");

    // Macrorealist enumeration bound.
    const auto bound = lmg::semiclassics::macrorealist_bound();
    check(bound.max_k3 == 1 && bound.min_k3 == -3, "macrorealist bound");
  }

  // Instanton closed form agrees with the quadrature (checked internally).
  {
    bool ok = true;
    try {
      lmg::semiclassics::instanton_action(0.95);
    } catch (const std::exception&) {
      ok = false;
    }
    check(ok, "instanton quadrature");
  }

  // Bloch norm conservation over t = 100.
  {
    ModelParams p;
    p.n_spins = 370;
    p.gamma_ratio = 0.5;
    lmg::classical::BlochState s{0.5, 0.0,
                                 lmg::semiclassics::order_parameter(0.5) + 0.05};
    const double norm0 = s.norm();
    const auto traj = lmg::classical::integrate_bloch(s, p, 100.0, 1e-3, 1000);
    check(std::abs(traj.back().norm() - norm0) < 1e-6, "Bloch norm conservation");
  }

  // Langevin seed determinism.
  {
    lmg::classical::LangevinConfig cfg;
    cfg.params.n_spins = 20;
    cfg.params.gamma_ratio = 0.9;
    cfg.params.temp_nk = 20.0;
    cfg.dt = 0.01;
    cfg.n_paths = 3;
    cfg.seed = 42;
    const auto a = lmg::classical::simulate_langevin(cfg, 5.0, 10);
    const auto b = lmg::classical::simulate_langevin(cfg, 5.0, 10);
    check(a == b, "seed determinism");
  }

  if (failures == 0) {
    std::cout << "All self-tests passed.\n";
  } else {
    std::cout << failures << " self-test(s) failed.\n";
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::ostringstream cmdline;
  for (int i = 0; i < argc; ++i) cmdline << (i ? " " : "") << argv[i];

  CLI::App app{"lmglab: numerical laboratory for the driven LMG model"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* spectrum = app.add_subcommand(
      "spectrum", "Exact spectrum and benchmark spectral quantities");
  int spectrum_levels = 0;
  add_model_options(spectrum, opts);
  add_output_options(spectrum, opts);
  spectrum->add_option("--levels", spectrum_levels,
                       "Emit one row per level instead of the summary row");

  auto* k3 = app.add_subcommand("k3", "Leggett-Garg K3 at one dephasing rate");
  double k3_gamma = 0.05;
  int k3_levels = 5;
  std::string k3_protocol = "stationary";
  add_model_options(k3, opts);
  add_output_options(k3, opts);
  k3->add_option("--gamma-phi", k3_gamma, "Dephasing rate (s^-1)")->required();
  k3->add_option("--levels", k3_levels, "Truncation size");
  k3->add_option("--protocol", k3_protocol, "stationary or sequential")
      ->check(CLI::IsMember({"stationary", "sequential"}));

  auto* scan = app.add_subcommand("k3-scan", "K3 over a dephasing-rate grid");
  std::vector<double> scan_gammas;
  std::vector<int> scan_levels;
  std::string scan_protocol = "stationary";
  bool scan_two_level = false;
  add_model_options(scan, opts);
  add_output_options(scan, opts);
  scan->add_option("--gammas", scan_gammas,
                   "Dephasing rates (s^-1); default: the figure grid");
  scan->add_option("--levels", scan_levels, "Truncation sizes; default 5,10");
  scan->add_option("--protocol", scan_protocol, "stationary or sequential")
      ->check(CLI::IsMember({"stationary", "sequential"}));
  scan->add_flag("--two-level-curve", scan_two_level,
                 "Emit the analytic two-level decay curve instead");

  auto* threshold =
      app.add_subcommand("threshold", "Dephasing thresholds K3 = 1 per truncation");
  std::vector<int> thr_levels;
  add_model_options(threshold, opts);
  add_output_options(threshold, opts);
  threshold->add_option("--levels", thr_levels,
                        "Truncation sizes; default 2,3,4,5,10");

  auto* hierarchy =
      app.add_subcommand("hierarchy", "Critical dephasing rates gamma_A/B/C");
  double hier_ref = 0.05;
  add_model_options(hierarchy, opts);
  add_output_options(hierarchy, opts);
  hierarchy->add_option("--gamma-ref", hier_ref,
                        "Reference rate (s^-1) for the T2 columns");

  auto* goldilocks =
      app.add_subcommand("goldilocks", "Tunnel splitting vs N and crossover table");
  int g_nmin = 200, g_nmax = 400, g_step = 50;
  std::vector<int> g_includes;
  bool g_derivative = false, g_table1 = false, g_fit_c0 = false;
  add_model_options(goldilocks, opts);
  add_output_options(goldilocks, opts);
  goldilocks->add_option("--n-min", g_nmin, "Scan start");
  goldilocks->add_option("--n-max", g_nmax, "Scan end (inclusive)");
  goldilocks->add_option("--step", g_step, "Scan step");
  goldilocks->add_option("--include", g_includes, "Extra N values to append");
  goldilocks->add_flag("--derivative", g_derivative,
                       "Add d(DeltaE)/dN (central difference over N +- 2)");
  goldilocks->add_flag("--table1", g_table1,
                       "Emit the instanton crossover table instead of the scan");
  goldilocks->add_flag("--fit-c0", g_fit_c0,
                       "Fit the splitting prefactor C0 over N in [50, 500]");

  auto* lz = app.add_subcommand("lz", "Landau-Zener sweep error curve");
  std::vector<double> lz_taus;
  double lz_delta_h = 0.0;
  add_model_options(lz, opts);
  add_output_options(lz, opts);
  lz->add_option("--tau-q", lz_taus, "Sweep times (s)");
  lz->add_option("--delta-h", lz_delta_h,
                 "Sweep amplitude (rad/s); default: geometric mean of the window");

  auto* foil = app.add_subcommand("foil", "Classical comparison dynamics");
  FoilOpts foil_opts;
  add_model_options(foil, opts);
  add_output_options(foil, opts);
  foil->add_option("--mode", foil_opts.mode, "bloch|mfpt|equilibrium|sweep")
      ->check(CLI::IsMember({"bloch", "mfpt", "equilibrium", "sweep"}));
  foil->add_option("--gamma-eff", foil_opts.gamma_eff, "Mobility in units of J");
  foil->add_option("--dt", foil_opts.dt, "Time step (dimensionless)");
  foil->add_option("--n-paths", foil_opts.n_paths, "Ensemble size");
  foil->add_option("--seed", foil_opts.seed, "Master PRNG seed");
  foil->add_option("--t-final", foil_opts.t_final, "Run length (dimensionless)");
  foil->add_option("--t-max", foil_opts.t_max, "Passage budget (dimensionless)");
  foil->add_option("--stride", foil_opts.stride, "Sample stride (steps)");
  foil->add_option("--bins", foil_opts.bins, "Histogram bins (equilibrium)");
  foil->add_option("--mx", foil_opts.mx, "Initial mx (bloch)");
  foil->add_option("--my", foil_opts.my, "Initial my (bloch)");
  foil->add_option("--mz", foil_opts.mz, "Initial mz (bloch)");
  foil->add_option("--tau-q", foil_opts.tau_qs, "Sweep times (s, sweep mode)");

  auto* selftest =
      app.add_subcommand("selftest", "Run the built-in assertion suite");

  try {
    app.parse(argc, argv);
    if (spectrum->parsed()) {
      run_spectrum(cmdline.str(), opts, spectrum_levels);
    } else if (k3->parsed()) {
      run_k3(cmdline.str(), opts, k3_gamma, k3_levels, k3_protocol);
    } else if (scan->parsed()) {
      run_k3_scan(cmdline.str(), opts, scan_gammas, scan_levels, scan_protocol,
                  scan_two_level);
    } else if (threshold->parsed()) {
      run_threshold(cmdline.str(), opts, thr_levels);
    } else if (hierarchy->parsed()) {
      run_hierarchy(cmdline.str(), opts, hier_ref);
    } else if (goldilocks->parsed()) {
      run_goldilocks(cmdline.str(), opts, g_nmin, g_nmax, g_step, g_includes,
                     g_derivative, g_table1, g_fit_c0);
    } else if (lz->parsed()) {
      run_lz(cmdline.str(), opts, lz_taus, lz_delta_h);
    } else if (foil->parsed()) {
      run_foil(cmdline.str(), opts, foil_opts);
    } else if (selftest->parsed()) {
      return run_selftest();
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
