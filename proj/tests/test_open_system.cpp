#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "lmglab/core.hpp"
#include "lmglab/open_system.hpp"
#include "lmglab/semiclassics.hpp"

namespace {

using lmg::open_system::DensityOperator;
using lmg::open_system::LevelSystem;

const lmg::core::Spectrum& benchmark() {
  static const auto spec = [] {
    lmg::core::ModelParams p;  // defaults: N=370, Gamma/J=0.95
    return lmg::core::diagonalize(lmg::core::build_hamiltonian(p));
  }();
  return spec;
}

LevelSystem benchmark_system(int n_levels) {
  return lmg::open_system::truncate(benchmark(), lmg::core::sign_observable(370),
                                    n_levels);
}

// The Appendix toy system: H = 0, Jz = diag(-1, 0, 1).
LevelSystem toy_system() {
  LevelSystem sys;
  sys.n_levels = 3;
  sys.h_diag = Eigen::VectorXd::Zero(3);
  sys.jz = Eigen::Vector3d(-1.0, 0.0, 1.0).asDiagonal();
  sys.q = sys.jz;
  sys.delta_e = 1.0;
  sys.j_phys = 1.0;
  return sys;
}

DensityOperator ground_state(int d) {
  DensityOperator rho = DensityOperator::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

}  // namespace

TEST_SUITE("open-system") {

TEST_CASE("truncation invariants and benchmark matrix elements") {
  const auto sys = benchmark_system(5);
  CHECK((sys.jz - sys.jz.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sys.q - sys.q.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sys.jz.diagonal().cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(sys.q(0, 0)) < 1e-8);
  CHECK(std::abs(sys.q(1, 1)) < 1e-8);
  CHECK(sys.q(0, 1) * sys.q(0, 1) == doctest::Approx(0.9436).epsilon(0.002));

  const auto doublet = benchmark_system(2);
  const double jz2_00 = (doublet.jz * doublet.jz)(0, 0);
  CHECK(jz2_00 == doctest::Approx(2451.0).epsilon(0.01));
  CHECK_THROWS_AS(lmg::open_system::truncate(
                      benchmark(), lmg::core::sign_observable(370), 1),
                  std::invalid_argument);
}

TEST_CASE("analytic three-level dephasing decay and trace preservation") {
  const auto sys = toy_system();
  const auto gen = lmg::open_system::build_superoperator(sys, 0.1);

  DensityOperator rho = DensityOperator::Zero(3, 3);
  rho(0, 2) = 1.0;
  const auto decayed = lmg::open_system::propagate(gen, rho, 2.0);
  CHECK(std::abs(decayed(0, 2).real() - std::exp(-0.4)) < 1e-8);

  DensityOperator diag = DensityOperator::Zero(3, 3);
  diag.diagonal() << 0.2, 0.3, 0.5;
  const auto evolved = lmg::open_system::propagate(gen, diag, 2.0);
  CHECK(std::abs(evolved.trace().real() - 1.0) < 1e-10);
}

TEST_CASE("trace and hermiticity preserved for random states and rates") {
  const auto sys = benchmark_system(5);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd a(5, 5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) a(i, j) = std::complex<double>(u(rng), u(rng));
    }
    DensityOperator rho = a * a.adjoint();
    rho /= rho.trace();
    const double gamma = 0.5 * (u(rng) + 1.0);  // [0, 1] dimensionless
    const auto gen = lmg::open_system::build_superoperator(sys, gamma);
    const auto out =
        lmg::open_system::propagate(gen, rho, lmg::open_system::default_dt(sys));
    CHECK(std::abs(out.trace().real() - 1.0) < 1e-9);
    CHECK(std::abs(out.trace().imag()) < 1e-9);
    CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("propagation is the identity at t=0 and a semigroup in t") {
  const auto sys = benchmark_system(4);
  const auto gen = lmg::open_system::build_superoperator(sys, 0.02);
  DensityOperator rho = DensityOperator::Zero(4, 4);
  rho(0, 0) = 0.6;
  rho(1, 1) = 0.4;
  rho(0, 1) = rho(1, 0) = 0.3;

  const auto same = lmg::open_system::propagate(gen, rho, 0.0);
  CHECK((same - rho).cwiseAbs().maxCoeff() < 1e-12);

  const double t1 = 11.0, t2 = 29.0;
  const auto two_step = lmg::open_system::propagate(
      gen, lmg::open_system::propagate(gen, rho, t1), t2);
  const auto one_step = lmg::open_system::propagate(gen, rho, t1 + t2);
  CHECK((two_step - one_step).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero dephasing keeps the evolution unitary") {
  const auto sys = benchmark_system(5);
  const auto gen = lmg::open_system::build_superoperator(sys, 0.0);
  DensityOperator rho = DensityOperator::Zero(5, 5);
  rho(0, 0) = rho(1, 1) = 0.5;
  rho(0, 1) = rho(1, 0) = 0.5;  // pure superposition of the doublet
  const auto out = lmg::open_system::propagate(
      gen, rho, 3.0 * lmg::open_system::default_dt(sys));
  CHECK(std::abs((out * out).trace().real() - 1.0) < 1e-9);
}

TEST_CASE("Lueders instrument is the bare anticommutator") {
  const auto sys = benchmark_system(3);

  // From the ground state the result is purely off-diagonal (parity).
  const auto inst = lmg::open_system::lueders_instrument(sys.q, ground_state(3));
  CHECK(inst.diagonal().cwiseAbs().maxCoeff() < 1e-10);

  // Thermal doublet mixtures share the (0,1) element Q01/2 for any weight.
  for (double p1 : {0.0, 0.4, 1.0}) {
    DensityOperator rho = DensityOperator::Zero(3, 3);
    rho(0, 0) = 1.0 - p1;
    rho(1, 1) = p1;
    const auto mixed = lmg::open_system::lueders_instrument(sys.q, rho);
    CHECK(std::abs(mixed(0, 1).real() - 0.5 * sys.q(0, 1)) < 1e-12);
  }

  // Q = I returns rho unchanged.
  DensityOperator rho = DensityOperator::Zero(3, 3);
  rho(0, 1) = std::complex<double>(0.2, 0.1);
  const auto same =
      lmg::open_system::lueders_instrument(Eigen::MatrixXd::Identity(3, 3), rho);
  CHECK((same - rho).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("published correlator values at spot dephasing rates") {
  const auto sys5 = benchmark_system(5);
  CHECK(lmg::open_system::k3_stationary(sys5, 0.05) ==
        doctest::Approx(1.3167).epsilon(0.005));
  CHECK(lmg::open_system::k3_stationary(sys5, 0.3) ==
        doctest::Approx(0.9922).epsilon(0.005));
  const auto sys10 = benchmark_system(10);
  CHECK(lmg::open_system::k3_stationary(sys10, 2.0) ==
        doctest::Approx(0.6541).epsilon(0.005));
}

TEST_CASE("K3 decreases monotonically with the dephasing rate") {
  const auto sys = benchmark_system(5);
  double previous = 1e100;
  for (double gamma : {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0}) {
    const double k3 = lmg::open_system::k3_stationary(sys, gamma);
    CHECK(k3 < previous);
    previous = k3;
  }
}

TEST_CASE("thermal doublet mixtures leave K3 unchanged") {
  const auto sys = benchmark_system(2);
  const double reference = lmg::open_system::k3_stationary(sys, 0.05);
  for (double p : {0.0, 0.25, 0.731, 1.0}) {
    DensityOperator rho = DensityOperator::Zero(2, 2);
    rho(0, 0) = p;
    rho(1, 1) = 1.0 - p;
    const auto rep = lmg::open_system::k3_stationary_report(sys, 0.05, rho);
    CHECK(std::abs(rep.k3 - reference) < 1e-6);
  }
}

TEST_CASE("sequential protocol at the BEC target rate") {
  const auto sys = benchmark_system(5);
  const auto rep = lmg::open_system::k3_sequential(sys, 0.05);
  CHECK(rep.k3 == doctest::Approx(1.311).epsilon(0.005));
  CHECK(std::abs(rep.c23 - rep.c12) == doctest::Approx(0.006).epsilon(0.34));
  CHECK(rep.k3 == doctest::Approx(rep.c12 + rep.c23 - rep.c13).epsilon(1e-12));
}

TEST_CASE("sequential equals stationary for a dichotomic two-level system") {
  // Strict two-level system with Q^2 = I.
  LevelSystem sys;
  sys.n_levels = 2;
  sys.h_diag = Eigen::Vector2d(0.0, 0.8);
  sys.jz = Eigen::Matrix2d::Zero();
  sys.jz(0, 1) = sys.jz(1, 0) = 1.3;
  Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
  q(0, 1) = q(1, 0) = 1.0;
  sys.q = q;
  sys.delta_e = 0.8;
  sys.j_phys = 1.0;
  const auto seq = lmg::open_system::k3_sequential(sys, 0.0);
  const double stat = lmg::open_system::k3_stationary(sys, 0.0);
  CHECK(std::abs(seq.k3 - stat) < 1e-9);
  CHECK(std::abs(seq.c23 - seq.c12) < 1e-9);
}

TEST_CASE("coherent ceiling matches the multilevel sum") {
  const auto sys = benchmark_system(5);
  const double k3_zero = lmg::open_system::k3_stationary(sys, 1e-6);

  std::vector<double> q_sq, ratios;
  for (int k = 1; k < sys.n_levels; ++k) {
    q_sq.push_back(sys.q(0, k) * sys.q(0, k));
    ratios.push_back((sys.h_diag(k) - sys.h_diag(0)) / sys.delta_e);
  }
  const auto coherent = lmg::semiclassics::k3_coherent_multilevel(q_sq, ratios, 1.0);
  CHECK(k3_zero == doctest::Approx(coherent.k3).epsilon(0.003));
}

TEST_CASE("dephasing thresholds per truncation size") {
  CHECK(lmg::open_system::threshold_gamma(benchmark_system(5)) ==
        doctest::Approx(0.289).epsilon(0.02));
  // n = 2 sits outside the default bracket; the solver widens it.
  CHECK(lmg::open_system::threshold_gamma(benchmark_system(2)) ==
        doctest::Approx(0.515).epsilon(0.02));
  CHECK_THROWS_AS(lmg::open_system::threshold_gamma(benchmark_system(5), 3.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("physical coherence time from the secular rate") {
  const auto& spec = benchmark();
  CHECK(lmg::open_system::t2_phys_ms(spec, 0.05) ==
        doctest::Approx(7.04).epsilon(0.01));
  CHECK(lmg::open_system::t2_phys_ms(spec, 0.289) ==
        doctest::Approx(1.22).epsilon(0.02));

  // Margin over the measurement interval dt_opt = 0.80 ms at the BEC rate.
  const double dt_opt_ms =
      1000.0 * M_PI / (3.0 * spec.delta_e() * lmg::J_PHYS_DEFAULT);
  CHECK(dt_opt_ms == doctest::Approx(0.80).epsilon(0.01));
  CHECK(lmg::open_system::t2_phys_ms(spec, 0.05) / dt_opt_ms ==
        doctest::Approx(8.8).epsilon(0.02));
  CHECK_THROWS_AS(lmg::open_system::t2_phys_ms(spec, 0.0), std::invalid_argument);
}

TEST_CASE("secular rate matches the exact doublet Liouvillian") {
  // Two-level generator with the dissipator split the way the secular
  // formula assumes: coupling through the truncated Jz, damping through the
  // full-space Jz^2 expectations.
  const auto& spec = benchmark();
  const auto doublet = benchmark_system(2);
  const double gamma = 0.05 / lmg::J_PHYS_DEFAULT;  // dimensionless

  Eigen::MatrixXcd h = Eigen::Vector2cd(0.0, doublet.delta_e).asDiagonal();
  const Eigen::MatrixXcd a = doublet.jz.cast<std::complex<double>>();
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2, 2);
  b(0, 0) = lmg::core::jz2_expectation(spec, 0);
  b(1, 1) = lmg::core::jz2_expectation(spec, 1);
  const auto gen = lmg::open_system::build_superoperator_general(h, a, b, gamma);

  const double rate = 0.5 * gamma * (b(0, 0).real() + b(1, 1).real());
  const double coupling = gamma * doublet.jz(0, 1) * doublet.jz(0, 1);
  const double beat =
      std::sqrt(doublet.delta_e * doublet.delta_e - coupling * coupling);

  // After one beat period the coherence magnitude is exactly e^{-rate t}.
  DensityOperator rho = DensityOperator::Zero(2, 2);
  rho(0, 0) = rho(1, 1) = 0.5;
  rho(0, 1) = rho(1, 0) = 0.5;
  const double t_beat = 2.0 * M_PI / beat;
  const auto out = lmg::open_system::propagate(gen, rho, t_beat);
  const double extracted = -std::log(std::abs(out(0, 1)) / 0.5) / t_beat;
  CHECK(extracted == doctest::Approx(rate).epsilon(0.001));

  // And the rate in physical units reproduces T2_phys.
  CHECK(1000.0 / (extracted * lmg::J_PHYS_DEFAULT) ==
        doctest::Approx(lmg::open_system::t2_phys_ms(spec, 0.05)).epsilon(0.001));
}

TEST_CASE("argument validation") {
  const auto sys = benchmark_system(3);
  CHECK_THROWS_AS(lmg::open_system::build_superoperator(sys, -0.1),
                  std::invalid_argument);
  const auto gen = lmg::open_system::build_superoperator(sys, 0.1);
  CHECK_THROWS_AS(lmg::open_system::propagate(gen, ground_state(3), -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lmg::open_system::k3_stationary(sys, 0.05, -2.0),
                  std::invalid_argument);
}

}  // TEST_SUITE
