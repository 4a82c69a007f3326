#include "lmglab/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lmg::core {

void ModelParams::validate() const {
  if (n_spins < 2) {
    throw std::invalid_argument("ModelParams: n_spins must be >= 2, got " +
                                std::to_string(n_spins));
  }
  if (!std::isfinite(gamma_ratio) || gamma_ratio < 0.0) {
    throw std::invalid_argument("ModelParams: gamma_ratio must be finite and >= 0");
  }
  if (!std::isfinite(j_phys) || j_phys <= 0.0) {
    throw std::invalid_argument("ModelParams: j_phys must be finite and > 0");
  }
  if (!std::isfinite(temp_nk) || temp_nk <= 0.0) {
    throw std::invalid_argument("ModelParams: temp_nk must be finite and > 0");
  }
  if (!std::isfinite(bias_h)) {
    throw std::invalid_argument("ModelParams: bias_h must be finite");
  }
}

TridiagonalHamiltonian build_hamiltonian(const ModelParams& params) {
  params.validate();
  const int n = params.n_spins;
  const double jt = 0.5 * n;
  const double gamma = params.gamma_ratio;  // J = 1
  const double h = params.bias_h;

  TridiagonalHamiltonian out;
  out.m_grid.resize(n + 1);
  out.diagonal.resize(n + 1);
  out.off_diagonal.resize(n);
  for (int i = 0; i <= n; ++i) {
    const double m = -jt + i;
    out.m_grid(i) = m;
    out.diagonal(i) = -2.0 / n * m * m - 2.0 * h * m;
  }
  for (int i = 0; i < n; ++i) {
    const double m = out.m_grid(i);
    out.off_diagonal(i) = -gamma * std::sqrt(jt * (jt + 1.0) - m * (m + 1.0));
  }
  return out;
}

Spectrum diagonalize(const TridiagonalHamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(h.diagonal, h.off_diagonal, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("diagonalize: tridiagonal eigensolver failed to converge");
  }

  Spectrum spec;
  spec.eigenvalues = solver.eigenvalues();
  spec.eigenvectors = solver.eigenvectors();
  spec.m_grid = h.m_grid;

  // Deterministic sign gauge: largest-|entry| component positive, first such
  // entry winning ties.
  const int dim = spec.dim();
  for (int k = 0; k < dim; ++k) {
    int arg = 0;
    double best = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double a = std::abs(spec.eigenvectors(i, k));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (spec.eigenvectors(arg, k) < 0.0) spec.eigenvectors.col(k) *= -1.0;
  }
  return spec;
}

Eigen::VectorXd sign_observable(int n_spins) {
  if (n_spins < 2) throw std::invalid_argument("sign_observable: n_spins must be >= 2");
  const double jt = 0.5 * n_spins;
  Eigen::VectorXd q(n_spins + 1);
  for (int i = 0; i <= n_spins; ++i) {
    const double m = -jt + i;
    q(i) = (std::abs(m) > 0.5) ? (m > 0.0 ? 1.0 : -1.0) : 0.0;
  }
  return q;
}

double eigenbasis_element(const Spectrum& spec, const Eigen::VectorXd& diag_observable,
                          int i, int j) {
  const int dim = spec.dim();
  if (i < 0 || j < 0 || i >= dim || j >= dim) {
    throw std::invalid_argument("eigenbasis_element: level index out of range");
  }
  if (diag_observable.size() != dim) {
    throw std::invalid_argument("eigenbasis_element: observable dimension mismatch");
  }
  return (spec.eigenvectors.col(i).array() * diag_observable.array() *
          spec.eigenvectors.col(j).array())
      .sum();
}

double jz2_expectation(const Spectrum& spec, int level) {
  if (level < 0 || level >= spec.dim()) {
    throw std::invalid_argument("jz2_expectation: level index out of range");
  }
  return (spec.eigenvectors.col(level).array().square() * spec.m_grid.array().square())
      .sum();
}

double m0_weight(const Spectrum& spec) {
  const int dim = spec.dim();         // N + 1
  if (dim % 2 == 0) return 0.0;       // odd N: no m = 0 state
  const int i0 = (dim - 1) / 2;       // m_grid(i0) == 0
  const double a = spec.eigenvectors(i0, 0);
  return a * a;
}

namespace {

// Ground-state longitudinal magnetisation m_z(h) = (2/N) <E_0|Jz|E_0>.
double ground_state_mz(ModelParams params, double h) {
  params.bias_h = h;
  const Spectrum spec = diagonalize(build_hamiltonian(params));
  const double jz = (spec.eigenvectors.col(0).array().square() * spec.m_grid.array())
                        .sum();
  return 2.0 / params.n_spins * jz;
}

double chi_central(const ModelParams& params, double h0, double step) {
  return (ground_state_mz(params, h0 + step) - ground_state_mz(params, h0 - step)) /
         (2.0 * step);
}

}  // namespace

double susceptibility(const ModelParams& params, ChiMode mode, double step_h) {
  params.validate();
  if (mode == ChiMode::two_level) {
    const Spectrum spec = diagonalize(build_hamiltonian(params));
    const double msq = 1.0 - params.gamma_ratio * params.gamma_ratio;
    if (msq <= 0.0) {
      throw std::runtime_error("susceptibility: two_level mode needs the ordered phase");
    }
    return 2.0 * params.n_spins * msq / spec.delta_e();
  }

  if (!(step_h > 0.0) || !std::isfinite(step_h)) {
    throw std::invalid_argument("susceptibility: step_h must be finite and > 0");
  }
  const double chi_full = chi_central(params, params.bias_h, step_h);
  const double chi_half = chi_central(params, params.bias_h, 0.5 * step_h);
  if (std::abs(chi_half - chi_full) > 0.01 * std::abs(chi_half)) {
    throw std::runtime_error(
        "susceptibility: finite difference outside the linear regime "
        "(halving step_h shifts the estimate by more than 1%)");
  }
  return chi_half;
}

}  // namespace lmg::core
