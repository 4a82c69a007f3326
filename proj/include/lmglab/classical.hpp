#pragma once
// Classical comparison dynamics: conservative mean-field Bloch precession and
// overdamped Langevin motion of the magnetization on the free-energy
// landscape (Model A), including ensemble first-passage estimation.

#include <cstdint>
#include <vector>

#include "lmglab/core.hpp"

namespace lmg::classical {

// Mean-field Bloch vector; reactive dynamics conserve the norm.
struct BlochState {
  double mx = 0.0;
  double my = 0.0;
  double mz = 0.0;

  double norm() const;
};

// Fixed-step RK4 integration of the mean-field precession equations
// (dimensionless time, J = 1).  Samples every `sample_stride` steps,
// starting with the initial state.  Requires dt <= 1e-3 so the norm
// drift stays below 1e-8 per unit time.
std::vector<BlochState> integrate_bloch(const BlochState& initial,
                                        const core::ModelParams& params,
                                        double t_final, double dt,
                                        int sample_stride = 1);

struct LangevinConfig {
  core::ModelParams params;
  double gamma_eff = 1.0;  // mobility in units of J (dimensionless time)
  double dt = 1e-2;        // dimensionless step
  int n_paths = 1;
  std::uint64_t seed = 0;
  double m0 = 0.0;  // common initial magnetization

  // Checks the fields and the drift-step bound
  // gamma_eff * max|f'| * dt < 0.1 * (well half-width).
  void validate() const;

  // Einstein relation: D = gamma_eff * kBT / (N J).
  double diffusion() const;
};

// Euler-Maruyama paths of  dm = -gamma_eff f'(m) dt + sqrt(2 D dt) xi,
// reflecting boundaries at m = +-1, per-path PRNG streams split from the
// master seed (path order does not affect the statistics).  Returns one row
// per path holding m_z after every `sample_stride`-th step.
std::vector<std::vector<double>> simulate_langevin(const LangevinConfig& config,
                                                   double t_final,
                                                   int sample_stride = 1);

struct MfptResult {
  double mean_s = 0.0;    // physical seconds
  double stderr_s = 0.0;  // standard error of the mean
  int n_passages = 0;
};

// Mean first-passage time from m = -m_* to the crossing m_z >= 0, averaged
// over the ensemble.  Requires the barrier exponent N*dF0/kBT <= 8 when a
// barrier is present (desk-scale regime); paths that do not cross within
// t_max_dimensionless are dropped, and fewer than 50 passages is an error.
MfptResult mfpt_estimate(const LangevinConfig& config, double t_max_dimensionless);

// Classical counterpart of the Landau-Zener error: sweep the bias
// h(t) = h0 (2 t / tau_Q - 1) with h0 = params.bias_h, starting from the
// initially favored well at -m_*, and report the fraction of paths ending in
// the wrong well (m_z < 0).  Returns 1 in the frozen regime
// tau_Q < 0.01 tau_K without simulating.
double classical_p_error(double tau_q_s, const core::ModelParams& params,
                         double gamma_eff, int n_paths = 400,
                         std::uint64_t seed = 20260814);

// Heuristic mobility scale gamma_eff ~ 4 Gamma^2 / (Gamma_2 J^2) suggested by
// adiabatic elimination of the transverse components.  Order-of-magnitude
// only; exposed for exploration, never used in any quantitative check.
double gamma_eff_heuristic(double gamma_ratio, double gamma2_per_s, double j_phys);

}  // namespace lmg::classical
