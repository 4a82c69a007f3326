#pragma once

#include <Eigen/Dense>

#include "lmglab/constants.hpp"

// Exact spectral toolbox for the LMG Hamiltonian (Kac normalisation)
//
//   H = -(2J/N) Jz^2 - 2*Gamma*Jx - 2*h*Jz,   J = 1 internally,
//
// restricted to the maximal-spin symmetric Dicke sector (dimension N+1),
// where H is real symmetric tridiagonal in the Jz eigenbasis.
namespace lmg::core {

// Physical/dimensionless parameter bundle shared by all modules.
struct ModelParams {
  int n_spins = 370;                // N
  double gamma_ratio = 0.95;        // Gamma/J (transverse field)
  double j_phys = J_PHYS_DEFAULT;   // rad/s, applied only at I/O boundaries
  double temp_nk = 10.0;            // temperature in nK
  double bias_h = 0.0;              // longitudinal bias in units of J

  double kbt_rad_s() const { return KBT_PER_NK * temp_nk; }
  double kbt_dimensionless() const { return kbt_rad_s() / j_phys; }

  // Throws std::invalid_argument on N < 2, negative gamma_ratio, or
  // non-finite/non-positive remaining fields.
  void validate() const;
};

struct TridiagonalHamiltonian {
  Eigen::VectorXd diagonal;      // length N+1: -(2/N) m_i^2 - 2 h m_i
  Eigen::VectorXd off_diagonal;  // length N:   -Gamma sqrt(Jt(Jt+1)-m_i(m_i+1))
  Eigen::VectorXd m_grid;        // length N+1: -N/2 ... +N/2 step 1
};

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending, dimensionless (units of J)
  Eigen::MatrixXd eigenvectors;  // column k = |E_k> in the Dicke basis
  Eigen::VectorXd m_grid;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  double delta_e() const { return eigenvalues(1) - eigenvalues(0); }
};

TridiagonalHamiltonian build_hamiltonian(const ModelParams& params);

// Dense symmetric eigensolve of the tridiagonal matrix. Eigenvector sign
// gauge: each column is flipped so its largest-|entry| element is positive
// (ties broken by lowest index). Throws std::runtime_error if the solver
// fails to converge.
Spectrum diagonalize(const TridiagonalHamiltonian& h);

// Diagonal of Q = sgn(Jz) on the m-grid, with sgn(0) = 0 (trichotomic; the
// m = 0 state present for even N maps to 0, never +1).
Eigen::VectorXd sign_observable(int n_spins);

// <E_i| D |E_j> for an observable D diagonal in the Dicke basis.
double eigenbasis_element(const Spectrum& spec, const Eigen::VectorXd& diag_observable,
                          int i, int j);

// Full-space <E_level| Jz^2 |E_level>.
double jz2_expectation(const Spectrum& spec, int level);

// Ground-state weight |<m=0|E_0>|^2 (0 for odd N, which has no m = 0 state).
double m0_weight(const Spectrum& spec);

enum class ChiMode { exact, two_level };

// Intensive susceptibility chi_eff = d m_z / d h at h = bias_h, in 1/J.
//   exact:     central finite difference of m_z = (2/N)<Jz> over +-step_h,
//              with a step-halving linearity check (>1% shift -> error);
//              the half-step estimate is returned.
//   two_level: 2 N m_*^2 / DeltaE from a fresh diagonalization.
double susceptibility(const ModelParams& params, ChiMode mode, double step_h = 1e-6);

}  // namespace lmg::core
