#include "lmglab/classical.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lmglab/semiclassics.hpp"

namespace lmg::classical {

namespace {

struct Derivative {
  double dx, dy, dz;
};

// Mean-field precession, J = 1 (dimensionless time).
Derivative bloch_rhs(const BlochState& s, double gamma, double h) {
  Derivative d;
  d.dz = -2.0 * gamma * s.my;
  d.dy = -2.0 * (s.mz + h) * s.mx + 2.0 * gamma * s.mz;
  d.dx = 2.0 * (s.mz + h) * s.my;
  return d;
}

BlochState advance(const BlochState& s, const Derivative& d, double dt) {
  return {s.mx + dt * d.dx, s.my + dt * d.dy, s.mz + dt * d.dz};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double reflect(double m) {
  while (std::abs(m) > 1.0) {
    m = (m > 1.0) ? 2.0 - m : -2.0 - m;
  }
  return m;
}

double max_abs_grad(double gamma_ratio, double t_dim, double h) {
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double m = -1.0 + 0.01 * i;
    worst = std::max(worst,
                     std::abs(semiclassics::free_energy_grad(m, gamma_ratio, t_dim, h)));
  }
  return worst;
}

}  // namespace

double BlochState::norm() const { return std::sqrt(mx * mx + my * my + mz * mz); }

std::vector<BlochState> integrate_bloch(const BlochState& initial,
                                        const core::ModelParams& params,
                                        double t_final, double dt,
                                        int sample_stride) {
  params.validate();
  if (!(dt > 0.0) || dt > 1e-3) {
    throw std::invalid_argument("integrate_bloch: need 0 < dt <= 1e-3");
  }
  if (t_final < 0.0 || sample_stride < 1) {
    throw std::invalid_argument("integrate_bloch: bad t_final or sample_stride");
  }
  const double gamma = params.gamma_ratio;
  const double h = params.bias_h;
  const long n_steps = std::lround(t_final / dt);

  std::vector<BlochState> trajectory;
  trajectory.reserve(static_cast<std::size_t>(n_steps / sample_stride) + 2);
  BlochState s = initial;
  trajectory.push_back(s);
  for (long step = 1; step <= n_steps; ++step) {
    const Derivative k1 = bloch_rhs(s, gamma, h);
    const Derivative k2 = bloch_rhs(advance(s, k1, 0.5 * dt), gamma, h);
    const Derivative k3 = bloch_rhs(advance(s, k2, 0.5 * dt), gamma, h);
    const Derivative k4 = bloch_rhs(advance(s, k3, dt), gamma, h);
    s.mx += dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    s.my += dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    s.mz += dt / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
    if (step % sample_stride == 0) trajectory.push_back(s);
  }
  return trajectory;
}

void LangevinConfig::validate() const {
  params.validate();
  if (!(gamma_eff > 0.0)) {
    throw std::invalid_argument("LangevinConfig: gamma_eff must be > 0");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("LangevinConfig: dt must be > 0");
  if (n_paths < 1) throw std::invalid_argument("LangevinConfig: n_paths must be >= 1");
  if (std::abs(m0) > 1.0) {
    throw std::invalid_argument("LangevinConfig: |m0| must be <= 1");
  }
  const double mstar = semiclassics::order_parameter(params.gamma_ratio);
  const double width = (mstar > 0.0) ? mstar : 1.0;
  const double drift_step =
      gamma_eff * dt *
      max_abs_grad(params.gamma_ratio, params.kbt_dimensionless(), params.bias_h);
  if (drift_step >= 0.1 * width) {
    throw std::invalid_argument(
        "LangevinConfig: dt too large, drift step exceeds 10% of the well width");
  }
}

double LangevinConfig::diffusion() const {
  return gamma_eff * params.kbt_dimensionless() / params.n_spins;
}

std::vector<std::vector<double>> simulate_langevin(const LangevinConfig& config,
                                                   double t_final,
                                                   int sample_stride) {
  config.validate();
  if (t_final < 0.0 || sample_stride < 1) {
    throw std::invalid_argument("simulate_langevin: bad t_final or sample_stride");
  }
  const double gamma_ratio = config.params.gamma_ratio;
  const double t_dim = config.params.kbt_dimensionless();
  const double h = config.params.bias_h;
  const double sigma = std::sqrt(2.0 * config.diffusion() * config.dt);
  const long n_steps = std::lround(t_final / config.dt);

  std::vector<std::vector<double>> paths(config.n_paths);
  for (int p = 0; p < config.n_paths; ++p) {
    std::mt19937_64 rng(splitmix64(config.seed + 1 + static_cast<std::uint64_t>(p)));
    std::normal_distribution<double> noise(0.0, 1.0);
    auto& samples = paths[p];
    samples.reserve(static_cast<std::size_t>(n_steps / sample_stride) + 1);
    double m = config.m0;
    for (long step = 1; step <= n_steps; ++step) {
      const double drift =
          -config.gamma_eff *
          semiclassics::free_energy_grad(m, gamma_ratio, t_dim, h);
      m = reflect(m + drift * config.dt + sigma * noise(rng));
      if (step % sample_stride == 0) samples.push_back(m);
    }
  }
  return paths;
}

MfptResult mfpt_estimate(const LangevinConfig& config, double t_max_dimensionless) {
  config.validate();
  if (!(t_max_dimensionless > 0.0)) {
    throw std::invalid_argument("mfpt_estimate: t_max must be > 0");
  }
  const double gamma_ratio = config.params.gamma_ratio;
  const double mstar = semiclassics::order_parameter(gamma_ratio);
  if (mstar == 0.0) {
    throw std::runtime_error("mfpt_estimate: ordered phase required");
  }
  // Enforce the desk-scale regime only when a barrier actually exists along
  // the path (bias below the spinodal).
  const bool barrier_present =
      config.params.bias_h < semiclassics::spinodal_field(gamma_ratio).h_sp;
  if (barrier_present && semiclassics::barrier(config.params).exponent > 8.0) {
    throw std::invalid_argument(
        "mfpt_estimate: barrier exponent > 8; reduce N or raise the temperature");
  }

  const double t_dim = config.params.kbt_dimensionless();
  const double h = config.params.bias_h;
  const double sigma = std::sqrt(2.0 * config.diffusion() * config.dt);
  const long n_steps = std::lround(t_max_dimensionless / config.dt);

  double sum = 0.0;
  double sum_sq = 0.0;
  int passages = 0;
  for (int p = 0; p < config.n_paths; ++p) {
    std::mt19937_64 rng(splitmix64(config.seed + 1 + static_cast<std::uint64_t>(p)));
    std::normal_distribution<double> noise(0.0, 1.0);
    double m = -mstar;
    for (long step = 1; step <= n_steps; ++step) {
      const double drift =
          -config.gamma_eff *
          semiclassics::free_energy_grad(m, gamma_ratio, t_dim, h);
      m = reflect(m + drift * config.dt + sigma * noise(rng));
      if (m >= 0.0) {
        const double t_pass = step * config.dt / config.params.j_phys;
        sum += t_pass;
        sum_sq += t_pass * t_pass;
        ++passages;
        break;
      }
    }
  }
  if (passages < 50) {
    throw std::runtime_error(
        "mfpt_estimate: fewer than 50 passages; lower the barrier (smaller N or "
        "higher T) or extend t_max");
  }
  MfptResult r;
  r.n_passages = passages;
  r.mean_s = sum / passages;
  const double var = (sum_sq - sum * sum / passages) / (passages - 1);
  r.stderr_s = std::sqrt(std::max(var, 0.0) / passages);
  return r;
}

double classical_p_error(double tau_q_s, const core::ModelParams& params,
                         double gamma_eff, int n_paths, std::uint64_t seed) {
  params.validate();
  if (tau_q_s < 0.0) throw std::invalid_argument("classical_p_error: tau_q must be >= 0");
  if (!(gamma_eff > 0.0)) {
    throw std::invalid_argument("classical_p_error: gamma_eff must be > 0");
  }
  const double h0 = params.bias_h;
  if (!(h0 > 0.0)) {
    throw std::invalid_argument(
        "classical_p_error: params.bias_h sets the sweep amplitude and must be > 0");
  }
  const double tau_k_s =
      semiclassics::kramers_time_s(params, gamma_eff,
                                   semiclassics::KramersMode::attempt_period);
  if (tau_q_s < 0.01 * tau_k_s) return 1.0;  // frozen regime

  const double gamma_ratio = params.gamma_ratio;
  const double mstar = semiclassics::order_parameter(gamma_ratio);
  const double t_dim = params.kbt_dimensionless();
  const double t_total = tau_q_s * params.j_phys;

  // Step small enough for drift stability and to resolve the sweep.
  double dt = std::min(0.02, t_total / 1000.0);
  const double worst = max_abs_grad(gamma_ratio, t_dim, h0);
  if (gamma_eff * worst * dt >= 0.1 * mstar) {
    dt = 0.05 * mstar / (gamma_eff * worst);
  }
  const long n_steps = std::lround(t_total / dt);
  const double sigma =
      std::sqrt(2.0 * gamma_eff * t_dim / params.n_spins * dt);

  int wrong = 0;
  for (int p = 0; p < n_paths; ++p) {
    std::mt19937_64 rng(splitmix64(seed + 1 + static_cast<std::uint64_t>(p)));
    std::normal_distribution<double> noise(0.0, 1.0);
    double m = -mstar;
    for (long step = 1; step <= n_steps; ++step) {
      const double h = h0 * (2.0 * step * dt / t_total - 1.0);
      const double drift =
          -gamma_eff * semiclassics::free_energy_grad(m, gamma_ratio, t_dim, h);
      m = reflect(m + drift * dt + sigma * noise(rng));
    }
    if (m < 0.0) ++wrong;
  }
  return static_cast<double>(wrong) / n_paths;
}

double gamma_eff_heuristic(double gamma_ratio, double gamma2_per_s, double j_phys) {
  if (!(gamma_ratio > 0.0) || !(gamma2_per_s > 0.0) || !(j_phys > 0.0)) {
    throw std::invalid_argument("gamma_eff_heuristic: all arguments must be > 0");
  }
  const double gamma_rad_s = gamma_ratio * j_phys;
  return 4.0 * gamma_rad_s * gamma_rad_s / (gamma2_per_s * j_phys * j_phys);
}

}  // namespace lmg::classical
