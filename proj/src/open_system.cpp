#include "lmglab/open_system.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace lmg::open_system {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

// Column stacking; Eigen matrices are column-major, so the map is direct.
VectorXcd vec(const MatrixXcd& rho) {
  return Eigen::Map<const VectorXcd>(rho.data(), rho.size());
}

MatrixXcd unvec(const VectorXcd& v, int d) {
  return Eigen::Map<const MatrixXcd>(v.data(), d, d);
}

MatrixXcd expm(const MatrixXcd& m) { return m.exp(); }

double resolve_dt(const LevelSystem& sys, double dt) {
  if (dt == 0.0) return default_dt(sys);
  if (!(dt > 0.0)) throw std::invalid_argument("k3: dt must be > 0");
  return dt;
}

double correlator(const Eigen::MatrixXd& q, const VectorXcd& v, int d) {
  return (q.cast<complex<double>>() * unvec(v, d)).trace().real();
}

}  // namespace

LevelSystem truncate(const core::Spectrum& spec, const Eigen::VectorXd& q_diag,
                     int n_levels, double j_phys) {
  if (n_levels < 2 || n_levels > spec.dim()) {
    throw std::invalid_argument("truncate: n_levels out of range");
  }
  LevelSystem sys;
  sys.n_levels = n_levels;
  sys.j_phys = j_phys;
  sys.h_diag = spec.eigenvalues.head(n_levels);
  sys.delta_e = spec.delta_e();
  sys.jz.resize(n_levels, n_levels);
  sys.q.resize(n_levels, n_levels);
  for (int i = 0; i < n_levels; ++i) {
    for (int j = i; j < n_levels; ++j) {
      sys.jz(i, j) = sys.jz(j, i) = core::eigenbasis_element(spec, spec.m_grid, i, j);
      sys.q(i, j) = sys.q(j, i) = core::eigenbasis_element(spec, q_diag, i, j);
    }
  }
  return sys;
}

Superoperator build_superoperator_general(const MatrixXcd& h, const MatrixXcd& a,
                                          const MatrixXcd& b, double gamma) {
  const int d = static_cast<int>(h.rows());
  const MatrixXcd id = MatrixXcd::Identity(d, d);
  const complex<double> im(0.0, 1.0);

  Superoperator l;
  l.dim = d;
  l.matrix = -im * (Eigen::kroneckerProduct(id, h) -
                    Eigen::kroneckerProduct(h.transpose(), id));
  if (gamma != 0.0) {
    l.matrix += gamma * (Eigen::kroneckerProduct(a.conjugate(), a) -
                         0.5 * Eigen::kroneckerProduct(id, b) -
                         0.5 * Eigen::kroneckerProduct(b.transpose(), id))
                    .eval();
  }
  return l;
}

Superoperator build_superoperator(const LevelSystem& sys, double gamma_dimensionless) {
  if (gamma_dimensionless < 0.0) {
    throw std::invalid_argument("build_superoperator: gamma must be >= 0");
  }
  const MatrixXcd h = sys.h_diag.asDiagonal().toDenseMatrix().cast<complex<double>>();
  const MatrixXcd jz = sys.jz.cast<complex<double>>();
  return build_superoperator_general(h, jz, jz.adjoint() * jz, gamma_dimensionless);
}

DensityOperator propagate(const Superoperator& l, const DensityOperator& rho, double t) {
  if (t < 0.0) throw std::invalid_argument("propagate: t must be >= 0");
  const MatrixXcd u = expm(l.matrix * t);
  if (!u.allFinite()) {
    throw std::runtime_error("propagate: matrix exponential did not converge");
  }
  MatrixXcd out = unvec(u * vec(rho), l.dim);
  // The hermiticity guard repairs numerical drift of physical states; a
  // deliberately non-Hermitian probe (a single matrix element, say) must
  // pass through the linear map untouched.
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12) {
    const double drift = (out - out.adjoint()).cwiseAbs().maxCoeff();
    if (drift > 1e-8) {
      std::cerr << "propagate: hermiticity drift " << drift << " exceeds 1e-8\n";
    }
    if (drift > 1e-12) out = 0.5 * (out + out.adjoint()).eval();
  }
  return out;
}

Eigen::MatrixXcd lueders_instrument(const Eigen::MatrixXd& q, const DensityOperator& rho) {
  if (q.rows() != rho.rows() || q.cols() != rho.cols()) {
    throw std::invalid_argument("lueders_instrument: dimension mismatch");
  }
  const MatrixXcd qc = q.cast<complex<double>>();
  return 0.5 * (qc * rho + rho * qc);
}

double default_dt(const LevelSystem& sys) { return M_PI / (3.0 * sys.delta_e); }

StationaryReport k3_stationary_report(const LevelSystem& sys, double gamma_phi_per_s,
                                      const DensityOperator& rho0, double dt) {
  const double step = resolve_dt(sys, dt);
  const Superoperator l = build_superoperator(sys, gamma_phi_per_s / sys.j_phys);
  const MatrixXcd prop = expm(l.matrix * step);
  const VectorXcd v0 = vec(lueders_instrument(sys.q, rho0));
  const VectorXcd v1 = prop * v0;
  const VectorXcd v2 = prop * v1;

  StationaryReport rep;
  rep.c12 = correlator(sys.q, v1, sys.n_levels);
  rep.c13 = correlator(sys.q, v2, sys.n_levels);
  rep.k3 = 2.0 * rep.c12 - rep.c13;
  return rep;
}

double k3_stationary(const LevelSystem& sys, double gamma_phi_per_s, double dt) {
  DensityOperator rho0 = DensityOperator::Zero(sys.n_levels, sys.n_levels);
  rho0(0, 0) = 1.0;
  return k3_stationary_report(sys, gamma_phi_per_s, rho0, dt).k3;
}

SequentialReport k3_sequential(const LevelSystem& sys, double gamma_phi_per_s, double dt) {
  const double step = resolve_dt(sys, dt);
  const Superoperator l = build_superoperator(sys, gamma_phi_per_s / sys.j_phys);
  const MatrixXcd prop = expm(l.matrix * step);
  const int d = sys.n_levels;

  DensityOperator rho0 = DensityOperator::Zero(d, d);
  rho0(0, 0) = 1.0;

  // Instrument at t = 0, then evolve to dt and 2 dt.
  const VectorXcd v_inst = vec(lueders_instrument(sys.q, rho0));
  const VectorXcd v1 = prop * v_inst;

  SequentialReport rep;
  rep.c12 = correlator(sys.q, v1, d);
  rep.c13 = correlator(sys.q, prop * v1, d);

  // C23: undisturbed evolution to dt, instrument, evolution by another dt.
  const MatrixXcd rho_dt = unvec(prop * vec(rho0), d);
  const VectorXcd v_inst2 = vec(lueders_instrument(sys.q, rho_dt));
  rep.c23 = correlator(sys.q, prop * v_inst2, d);

  rep.k3 = rep.c12 + rep.c23 - rep.c13;
  return rep;
}

double threshold_gamma(const LevelSystem& sys, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("threshold_gamma: need 0 < lo < hi");
  }
  const auto f = [&sys](double gamma) { return k3_stationary(sys, gamma) - 1.0; };

  constexpr double kLoMin = 0.05, kHiMax = 2.0;
  double flo = f(lo), fhi = f(hi);
  while (flo * fhi > 0.0 && (lo > kLoMin || hi < kHiMax)) {
    if (lo > kLoMin) {
      lo = std::max(kLoMin, 0.5 * lo);
      flo = f(lo);
    }
    if (flo * fhi > 0.0 && hi < kHiMax) {
      hi = std::min(kHiMax, 2.0 * hi);
      fhi = f(hi);
    }
  }
  if (flo * fhi > 0.0) {
    throw std::runtime_error(
        "threshold_gamma: K3 - 1 does not change sign on [0.05, 2.0] s^-1");
  }

  auto within_tol = [](double a, double b) { return std::abs(b - a) <= 1e-4; };
  std::uintmax_t max_iter = 100;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, within_tol,
                                                   max_iter);
  return 0.5 * (r.first + r.second);
}

double t2_phys_ms(const core::Spectrum& spec, double gamma_phi_per_s) {
  if (!(gamma_phi_per_s > 0.0)) {
    throw std::invalid_argument("t2_phys_ms: gamma must be > 0");
  }
  const double rate =
      0.5 * gamma_phi_per_s * (core::jz2_expectation(spec, 0) + core::jz2_expectation(spec, 1));
  return 1000.0 / rate;
}

}  // namespace lmg::open_system
