#include "lmglab/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace lmg::semiclassics {

namespace {

// ln(2 cosh x) without overflow for large |x|.
double ln2cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

double free_energy_raw(double m, double gamma, double t, double h) {
  const double u = std::hypot(m + h, gamma);
  return 0.5 * m * m - t * ln2cosh(u / t);
}

double curvature(const core::ModelParams& params, double m, double step = 1e-5) {
  return (free_energy(m + step, params) - 2.0 * free_energy(m, params) +
          free_energy(m - step, params)) /
         (step * step);
}

// Large-N crossing of g(N) = ln c0 + 0.5 ln N - N s, i.e. the N beyond the
// peak of sqrt(N) e^{-N s} where the splitting drops through kBT.
double solve_nc(double c0, double s) {
  const auto g = [=](double n) { return std::log(c0) + 0.5 * std::log(n) - n * s; };
  constexpr double kNMax = 1e5;

  double lo = std::max(1.0, 0.5 / s);  // stationary point of g
  if (g(lo) <= 0.0) {
    throw std::runtime_error(
        "goldilocks: splitting never exceeds kBT (no crossing; C0/kBT too small)");
  }
  double hi = lo;
  while (g(hi) > 0.0) {
    hi *= 1.5;
    if (hi > kNMax) {
      throw std::runtime_error("goldilocks: no crossing below N = 1e5");
    }
  }
  auto within_tol = [](double a, double b) { return std::abs(b - a) <= 1e-6 * b; };
  std::uintmax_t max_iter = 200;
  const auto r =
      boost::math::tools::toms748_solve(g, hi / 1.5, hi, within_tol, max_iter);
  return 0.5 * (r.first + r.second);
}

}  // namespace

double order_parameter(double gamma_ratio) {
  if (!(gamma_ratio > 0.0)) {
    throw std::invalid_argument("order_parameter: gamma_ratio must be > 0");
  }
  if (gamma_ratio >= 1.0) return 0.0;  // disordered phase
  return std::sqrt(1.0 - gamma_ratio * gamma_ratio);
}

double coherent_overlap(int n_spins, double gamma_ratio) {
  if (n_spins < 2 || !(gamma_ratio > 0.0)) {
    throw std::invalid_argument("coherent_overlap: bad arguments");
  }
  return std::exp(n_spins * std::log(gamma_ratio));
}

double free_energy(double m, const core::ModelParams& params) {
  if (std::abs(m) > 1.0) throw std::invalid_argument("free_energy: |m| must be <= 1");
  return free_energy_raw(m, params.gamma_ratio, params.kbt_dimensionless(),
                         params.bias_h);
}

double free_energy_grad(double m, double gamma_ratio, double t_dimensionless, double h) {
  const double u = std::hypot(m + h, gamma_ratio);
  return m - std::tanh(u / t_dimensionless) * (m + h) / u;
}

Barrier barrier(const core::ModelParams& params) {
  params.validate();
  core::ModelParams p0 = params;
  p0.bias_h = 0.0;
  const double mstar = order_parameter(p0.gamma_ratio);
  const double df0 = free_energy(0.0, p0) - free_energy(mstar, p0);
  Barrier b;
  b.delta_f0_rad_s = df0 * params.j_phys;
  b.exponent = params.n_spins * df0 / params.kbt_dimensionless();
  return b;
}

double instanton_action(double gamma_ratio) {
  if (!(gamma_ratio > 0.0 && gamma_ratio < 1.0)) {
    throw std::invalid_argument("instanton_action: need 0 < gamma_ratio < 1");
  }
  const double mstar = order_parameter(gamma_ratio);
  const double closed = std::atanh(mstar) - mstar;

  const auto integrand = [gamma_ratio](double z) {
    return std::log(std::sqrt(1.0 - z * z) / gamma_ratio);
  };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, mstar, 10, 1e-12);
  if (std::abs(closed - integral) > 1e-8) {
    throw std::runtime_error(
        "instanton_action: closed form and numerical integral disagree");
  }
  return closed;
}

GoldilocksRow goldilocks(double gamma_ratio, double c0_over_kbt) {
  if (!(c0_over_kbt > 0.0)) {
    throw std::invalid_argument("goldilocks: c0_over_kbt must be > 0");
  }
  GoldilocksRow row;
  row.gamma_ratio = gamma_ratio;
  row.c0_over_kbt = c0_over_kbt;
  row.s_inst = instanton_action(gamma_ratio);
  row.nc_analytic = std::log(c0_over_kbt) / row.s_inst;
  row.nc_root = solve_nc(c0_over_kbt, row.s_inst);
  row.nc_root_lo = solve_nc(0.95 * c0_over_kbt, row.s_inst);
  row.nc_root_hi = solve_nc(1.05 * c0_over_kbt, row.s_inst);
  return row;
}

double kramers_time_s(const core::ModelParams& params, double gamma_eff,
                      KramersMode mode) {
  const Barrier b = barrier(params);
  const double mstar = order_parameter(params.gamma_ratio);
  if (mstar == 0.0) {
    throw std::runtime_error("kramers_time_s: disordered phase has no barrier");
  }

  if (mode == KramersMode::attempt_period) {
    const double omega0 = 2.0 * params.j_phys * mstar;
    return 2.0 * M_PI / omega0 * std::exp(b.exponent);
  }

  if (!(gamma_eff > 0.0)) {
    throw std::invalid_argument("kramers_time_s: full mode needs gamma_eff > 0");
  }
  core::ModelParams p0 = params;
  p0.bias_h = 0.0;
  const double f_min = curvature(p0, mstar);
  const double f_top = curvature(p0, 0.0);
  if (f_min <= 0.0) {
    throw std::runtime_error("kramers_time_s: non-positive curvature at the minimum");
  }
  if (f_top >= 0.0) {
    throw std::runtime_error("kramers_time_s: no barrier at m = 0");
  }
  return 2.0 * M_PI /
         (gamma_eff * std::sqrt(f_min * std::abs(f_top)) * params.j_phys) *
         std::exp(b.exponent);
}

Spinodal spinodal_field(double gamma_ratio) {
  if (!is_ordered(gamma_ratio) || !(gamma_ratio > 0.0)) {
    throw std::runtime_error("spinodal_field: ordered phase (0 < Gamma/J < 1) required");
  }
  Spinodal sp;
  sp.e_sp = std::cbrt(gamma_ratio * gamma_ratio);
  sp.y_sp = std::sqrt(sp.e_sp * sp.e_sp - gamma_ratio * gamma_ratio);
  sp.m_sp = -sp.y_sp / sp.e_sp;
  sp.h_sp = sp.y_sp * (std::pow(1.0 / gamma_ratio, 2.0 / 3.0) - 1.0);
  return sp;
}

SweepWindow sweep_window(const core::ModelParams& params, double delta_e_rad_s) {
  params.validate();
  if (delta_e_rad_s <= 0.0) {
    core::ModelParams p0 = params;
    p0.bias_h = 0.0;
    delta_e_rad_s = core::diagonalize(core::build_hamiltonian(p0)).delta_e() * params.j_phys;
  }
  const double mstar = order_parameter(params.gamma_ratio);
  if (mstar == 0.0) {
    throw std::runtime_error("sweep_window: ordered phase required");
  }
  SweepWindow w;
  w.lo_rad_s = delta_e_rad_s / (params.n_spins * mstar);
  w.hi_rad_s = spinodal_field(params.gamma_ratio).h_sp * params.j_phys;
  return w;
}

double lz_error(double delta_e_rad_s, int n_spins, double m_star, double delta_h_rad_s,
                double tau_q_s) {
  if (!(delta_e_rad_s > 0.0) || n_spins < 2 || !(m_star > 0.0) ||
      !(delta_h_rad_s > 0.0) || tau_q_s < 0.0) {
    throw std::invalid_argument("lz_error: bad arguments");
  }
  const double lo = delta_e_rad_s / (n_spins * m_star);
  if (delta_h_rad_s < lo) {
    std::cerr << "lz_error: sweep amplitude " << delta_h_rad_s
              << " rad/s is below the LZ window floor " << lo << " rad/s\n";
  }
  const double alpha = n_spins * m_star * delta_h_rad_s;
  return std::exp(-M_PI * delta_e_rad_s * delta_e_rad_s * tau_q_s / (4.0 * alpha));
}

DephasingRates dephasing_rates(const core::ModelParams& params, double gamma_phi_per_s) {
  if (!(gamma_phi_per_s > 0.0)) {
    throw std::invalid_argument("dephasing_rates: gamma must be > 0");
  }
  const double mstar = order_parameter(params.gamma_ratio);
  const double n = params.n_spins;
  DephasingRates r;
  r.t2_coll_ms = 1000.0 / (0.5 * mstar * mstar * n * n * gamma_phi_per_s);
  r.t2_local_ms = 1000.0 / (n * gamma_phi_per_s * (1.0 + mstar * mstar));
  return r;
}

double k3_two_level(double t2_ms, double delta_e_rad_s, double q01_sq) {
  if (!(t2_ms > 0.0)) throw std::invalid_argument("k3_two_level: t2 must be > 0");
  const double dt_s = M_PI / (3.0 * delta_e_rad_s);
  const double x = std::exp(-dt_s / (t2_ms / 1000.0));
  return q01_sq * (x + 0.5 * x * x);
}

TwoLevelThreshold two_level_threshold(double delta_e_rad_s, double q01_sq) {
  TwoLevelThreshold t;
  t.xi = -1.0 + std::sqrt(1.0 + 2.0 / q01_sq);
  if (t.xi >= 1.0) {
    throw std::runtime_error(
        "two_level_threshold: Q01^2 <= 2/3, the two-level bound is never violated");
  }
  const double dt_s = M_PI / (3.0 * delta_e_rad_s);
  t.t2_threshold_ms = 1000.0 * dt_s / (-std::log(t.xi));
  return t;
}

HierarchyReport hierarchy(const core::ModelParams& params, const core::Spectrum& spec,
                          double gamma_c, double gamma_ref) {
  const double q01 =
      core::eigenbasis_element(spec, core::sign_observable(params.n_spins), 0, 1);
  const double q01_sq = q01 * q01;
  const double delta_e_rad_s = spec.delta_e() * params.j_phys;
  const TwoLevelThreshold thr = two_level_threshold(delta_e_rad_s, q01_sq);
  const double t2_thr_s = thr.t2_threshold_ms / 1000.0;

  const double mstar = order_parameter(params.gamma_ratio);
  const double n = params.n_spins;
  const double gamma_01 =
      0.5 * (core::jz2_expectation(spec, 0) + core::jz2_expectation(spec, 1));

  HierarchyReport rep;
  rep.xi_root = thr.xi;
  rep.gamma_a = 2.0 / (t2_thr_s * mstar * mstar * n * n);
  rep.gamma_b = 1.0 / (t2_thr_s * gamma_01);
  rep.gamma_c = gamma_c;
  rep.gamma_ref = gamma_ref;
  const DephasingRates rates = dephasing_rates(params, gamma_ref);
  rep.t2_coll_ms = rates.t2_coll_ms;
  rep.t2_local_ms = rates.t2_local_ms;
  rep.t2_phys_ms = 1000.0 / (gamma_ref * gamma_01);
  return rep;
}

MultilevelK3 k3_coherent_multilevel(const std::vector<double>& q_k0_sq,
                                    const std::vector<double>& gap_ratios,
                                    double tau_over_tau_star) {
  if (q_k0_sq.size() != gap_ratios.size()) {
    throw std::invalid_argument("k3_coherent_multilevel: list length mismatch");
  }
  MultilevelK3 out;
  out.contributions.reserve(q_k0_sq.size());
  for (std::size_t i = 0; i < q_k0_sq.size(); ++i) {
    const double theta = gap_ratios[i] * M_PI / 3.0 * tau_over_tau_star;
    const double c = q_k0_sq[i] * (2.0 * std::cos(theta) - std::cos(2.0 * theta));
    out.contributions.push_back(c);
    out.k3 += c;
  }
  return out;
}

AcfModes acf_linearization(double j, double gamma, double gamma1, double gamma2) {
  if (!(j > 0.0) || !(gamma > 0.0) || gamma >= j) {
    throw std::runtime_error("acf_linearization: ordered phase (Gamma < J) required");
  }
  const double mstar = order_parameter(gamma / j);
  Eigen::Matrix3d m;
  // Basis (dmx, dmy, dmz), damping toward the tilted fixed point.
  m << -gamma2, 2.0 * j * mstar, 0.0,
      -2.0 * j * mstar, -gamma2, 0.0,
      0.0, -2.0 * gamma, -gamma1;

  const Eigen::EigenSolver<Eigen::Matrix3d> solver(m);
  std::array<std::complex<double>, 3> ev{solver.eigenvalues()(0),
                                         solver.eigenvalues()(1),
                                         solver.eigenvalues()(2)};
  // The longitudinal mode is the (numerically) real one.
  std::sort(ev.begin(), ev.end(),
            [](const auto& a, const auto& b) { return std::abs(a.imag()) < std::abs(b.imag()); });

  AcfModes modes;
  modes.lambda_long = ev[0];
  modes.lambda_plus = (ev[1].imag() > 0.0) ? ev[1] : ev[2];
  modes.lambda_minus = (ev[1].imag() > 0.0) ? ev[2] : ev[1];
  modes.omega0 = 2.0 * j * mstar;
  return modes;
}

Rational freezeout_exponent(Protocol protocol) {
  switch (protocol) {
    case Protocol::j_quench:
      return {1, 3};
    case Protocol::h_quench:
    case Protocol::classical_overdamped:
      return {1, 2};
  }
  throw std::invalid_argument("freezeout_exponent: unknown protocol");
}

MacrorealistBound macrorealist_bound() {
  MacrorealistBound b;
  b.max_k3 = -4;
  b.min_k3 = 4;
  int idx = 0;
  for (int q1 : {-1, 1}) {
    for (int q2 : {-1, 1}) {
      for (int q3 : {-1, 1}) {
        const int k3 = q1 * q2 + q2 * q3 - q1 * q3;
        b.per_assignment[idx++] = k3;
        b.max_k3 = std::max(b.max_k3, k3);
        b.min_k3 = std::min(b.min_k3, k3);
      }
    }
  }
  return b;
}

}  // namespace lmg::semiclassics
