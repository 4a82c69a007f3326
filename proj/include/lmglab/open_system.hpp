#pragma once

#include <complex>

#include <Eigen/Dense>

#include "lmglab/core.hpp"

// Open-system layer: n-level truncation of the exact spectrum, dense GKSL
// superoperator for collective dephasing L = sqrt(gamma) Jz, Leggett-Garg
// correlators under the stationary and sequential protocols, and dephasing
// threshold root-finding.
//
// Vectorization convention: column stacking, vec(rho) = [rho.col(0); ...].
// Under that convention vec(A X B) = (B^T (x) A) vec(X), so the coherent part
// is -i(I (x) H - H^T (x) I) and the dissipator for jump operator A is
// gamma(conj(A) (x) A - 1/2 I (x) A^dag A - 1/2 (A^dag A)^T (x) I).
namespace lmg::open_system {

struct LevelSystem {
  int n_levels = 0;
  Eigen::VectorXd h_diag;  // lowest eigenvalues, dimensionless
  Eigen::MatrixXd jz;      // <E_i|Jz|E_j>
  Eigen::MatrixXd q;       // <E_i|sgn(Jz)|E_j>
  double delta_e = 0.0;    // E1 - E0, dimensionless
  double j_phys = J_PHYS_DEFAULT;  // gamma (s^-1) -> dimensionless conversion
};

using DensityOperator = Eigen::MatrixXcd;

struct Superoperator {
  Eigen::MatrixXcd matrix;  // n^2 x n^2, column-stacked convention
  int dim = 0;              // n
};

// Projects the spectrum onto its lowest n_levels eigenstates. q_diag is the
// sign observable on the Dicke m-grid (see core::sign_observable).
LevelSystem truncate(const core::Spectrum& spec, const Eigen::VectorXd& q_diag,
                     int n_levels, double j_phys = J_PHYS_DEFAULT);

// Standard GKSL generator -i[H,.] + gamma(Jz . Jz - 1/2 {Jz^2, .}) with the
// system's truncated H and Jz; gamma is dimensionless.
Superoperator build_superoperator(const LevelSystem& sys, double gamma_dimensionless);

// General building block: -i[H,.] + gamma(A . A^dag - 1/2 {B, .}). B = A^dag A
// recovers the trace-preserving Lindblad dissipator; other kernels (e.g. the
// doublet generator whose anticommutator carries the full-space Jz^2 diagonal)
// are intentionally not trace-preserving.
Superoperator build_superoperator_general(const Eigen::MatrixXcd& h,
                                          const Eigen::MatrixXcd& a,
                                          const Eigen::MatrixXcd& b, double gamma);

// exp(L t) applied to the column-stacked operator. Hermiticity drift beyond
// 1e-12 is symmetrized away; drift beyond 1e-8 additionally emits a warning
// on stderr. Trace is NOT renormalized (instrument outputs are operator
// valued, not states).
DensityOperator propagate(const Superoperator& l, const DensityOperator& rho, double t);

// Non-selective Lueders update 1/2 (Q rho + rho Q); operator valued, not
// trace-normalized.
Eigen::MatrixXcd lueders_instrument(const Eigen::MatrixXd& q, const DensityOperator& rho);

// Optimal interval dt = pi / (3 DeltaE) in dimensionless time.
double default_dt(const LevelSystem& sys);

struct StationaryReport {
  double c12 = 0.0, c13 = 0.0, k3 = 0.0;
};

// Stationary-protocol correlator from rho0: K3 = 2 C12 - C13 with
// C1j = Tr[Q exp(L j dt)(1/2 {Q, rho0})]. gamma_phi is physical (s^-1) and is
// divided by j_phys exactly once, here. dt = 0 selects the default interval.
StationaryReport k3_stationary_report(const LevelSystem& sys, double gamma_phi_per_s,
                                      const DensityOperator& rho0, double dt = 0.0);

// Same, started from the ground state |E_0><E_0|.
double k3_stationary(const LevelSystem& sys, double gamma_phi_per_s, double dt = 0.0);

struct SequentialReport {
  double c12 = 0.0, c23 = 0.0, c13 = 0.0, k3 = 0.0;
};

// Strictly sequential protocol: C12, C13 from the instrument applied at t=0;
// C23 from undisturbed evolution to dt, instrument, then evolution by dt.
// K3 = C12 + C23 - C13.
SequentialReport k3_sequential(const LevelSystem& sys, double gamma_phi_per_s,
                               double dt = 0.0);

// Root of k3_stationary(gamma) = 1 in s^-1, bracketing solver with absolute
// tolerance 1e-4. The bracket is widened geometrically up to [0.05, 2.0] when
// the endpoints do not straddle the root; failure after widening throws.
double threshold_gamma(const LevelSystem& sys, double lo = 0.2, double hi = 0.5);

// Physical eigenstate coherence time in ms from the secular rate
// 1/T2 = (gamma/2)(<E0|Jz^2|E0> + <E1|Jz^2|E1>), full-space expectations.
double t2_phys_ms(const core::Spectrum& spec, double gamma_phi_per_s);

}  // namespace lmg::open_system
