#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "lmglab/core.hpp"
#include "lmglab/open_system.hpp"
#include "lmglab/semiclassics.hpp"

namespace {

namespace sc = lmg::semiclassics;

lmg::core::ModelParams bench_params() { return lmg::core::ModelParams{}; }

const lmg::core::Spectrum& bench_spectrum() {
  static const auto spec =
      lmg::core::diagonalize(lmg::core::build_hamiltonian(bench_params()));
  return spec;
}

}  // namespace

TEST_SUITE("semiclassics") {

TEST_CASE("order parameter and coherent-state overlap") {
  CHECK(sc::order_parameter(0.95) == doctest::Approx(std::sqrt(0.0975)).epsilon(1e-12));
  CHECK(sc::order_parameter(1.0) == 0.0);
  CHECK(sc::order_parameter(1.3) == 0.0);
  CHECK_THROWS_AS(sc::order_parameter(0.0), std::invalid_argument);
  CHECK(sc::coherent_overlap(370, 0.95) == doctest::Approx(5.7e-9).epsilon(0.02));
}

TEST_CASE("free energy: symmetry, barrier height, Arrhenius exponent") {
  const auto p = bench_params();
  for (double m : {0.1, 0.31225, 0.7, 0.999}) {
    CHECK(std::abs(sc::free_energy(m, p) - sc::free_energy(-m, p)) < 1e-12);
  }
  CHECK_THROWS_AS(sc::free_energy(1.5, p), std::invalid_argument);

  const auto b = sc::barrier(p);
  CHECK(b.delta_f0_rad_s == doctest::Approx(46.5).epsilon(0.02));
  // At nK temperatures the thermal correction to the T = 0 closed form
  // (1 - Gamma/J)^2 / 2 is invisible.
  const double closed = 0.5 * (1.0 - p.gamma_ratio) * (1.0 - p.gamma_ratio);
  CHECK(b.delta_f0_rad_s == doctest::Approx(closed * p.j_phys).epsilon(0.001));
  CHECK(b.exponent == doctest::Approx(13.1).epsilon(0.02));
  CHECK(std::exp(b.exponent) / 5.05e5 == doctest::Approx(1.0).epsilon(0.1));

  // The gradient is the derivative of the free energy.
  const double t_dim = p.kbt_dimensionless();
  const double step = 1e-6;
  for (double m : {-0.8, -0.2, 0.31225, 0.6}) {
    const double numeric =
        (sc::free_energy(m + step, p) - sc::free_energy(m - step, p)) / (2.0 * step);
    CHECK(sc::free_energy_grad(m, p.gamma_ratio, t_dim, p.bias_h) ==
          doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("instanton action closed form") {
  CHECK(std::abs(sc::instanton_action(0.99) - 0.000947) < 1e-5);
  CHECK(std::abs(sc::instanton_action(0.95) - 0.010787) < 1e-5);
  CHECK(std::abs(sc::instanton_action(0.90) - 0.031255) < 1e-5);
  // The quadrature cross-check runs inside; it must stay silent on a grid.
  for (int i = 1; i <= 50; ++i) {
    CHECK_NOTHROW(sc::instanton_action(0.02 + 0.019 * i));
  }
  CHECK_THROWS_AS(sc::instanton_action(1.0), std::invalid_argument);
}

TEST_CASE("Goldilocks window sizes") {
  const double expected_analytic[] = {972.0, 87.0, 31.0};
  const double expected_root[] = {5521.0, 360.0, 105.0};
  int i = 0;
  for (const auto& fit : sc::GOLDILOCKS_FITS) {
    const auto row = sc::goldilocks(fit.gamma_ratio, fit.c0_over_kbt);
    CHECK(row.nc_analytic == doctest::Approx(expected_analytic[i]).epsilon(0.03));
    CHECK(row.nc_root == doctest::Approx(expected_root[i]).epsilon(0.03));
    CHECK(row.nc_root > row.nc_analytic);
    CHECK(row.nc_root_lo < row.nc_root);
    CHECK(row.nc_root_hi > row.nc_root);
    const double ratio = row.nc_root / row.nc_analytic;
    CHECK(ratio > 3.3);
    CHECK(ratio < 5.8);
    ++i;
  }
  // With C0 this far below kBT even the peak of sqrt(N) e^{-Ns} never
  // reaches the thermal scale, so there is no crossing to report.
  CHECK_THROWS_AS(sc::goldilocks(0.95, 0.1), std::runtime_error);
}

TEST_CASE("Kramers escape times at the benchmark point") {
  const auto p = bench_params();
  const double attempt = sc::kramers_time_s(p, 0.0, sc::KramersMode::attempt_period);
  CHECK(attempt == doctest::Approx(130.0).epsilon(0.10));

  const double full = sc::kramers_time_s(p, 1.0, sc::KramersMode::full);
  CHECK(full == doctest::Approx(1191.0).epsilon(0.02));
  // Full rate scales as the effective friction.
  CHECK(sc::kramers_time_s(p, 2.0, sc::KramersMode::full) ==
        doctest::Approx(0.5 * full).epsilon(1e-12));
  CHECK_THROWS_AS(sc::kramers_time_s(p, 0.0, sc::KramersMode::full),
                  std::invalid_argument);

  // Doubling N at double the temperature leaves the escape time unchanged:
  // the exponent N * df0 / kBT and the per-spin prefactors both cancel.
  auto p2 = p;
  p2.n_spins = 740;
  p2.temp_nk = 20.0;
  CHECK(sc::kramers_time_s(p2, 0.0, sc::KramersMode::attempt_period) /
            attempt ==
        doctest::Approx(1.0).epsilon(1e-9));
  // The full-mode prefactor carries finite-difference curvature noise
  // (step 1e-5 squared against double precision), so allow 1e-4 here.
  CHECK(sc::kramers_time_s(p2, 1.0, sc::KramersMode::full) / full ==
        doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("spinodal field and sweep window") {
  const auto sp = sc::spinodal_field(0.95);
  CHECK(sp.h_sp * lmg::J_PHYS_DEFAULT == doctest::Approx(229.0).epsilon(0.01));
  CHECK(sp.m_sp == doctest::Approx(-0.1832).epsilon(0.005));
  CHECK(sc::spinodal_field(0.9).h_sp == doctest::Approx(0.0177).epsilon(0.01));
  CHECK_THROWS_AS(sc::spinodal_field(1.0), std::runtime_error);

  const auto p = bench_params();
  const double de = bench_spectrum().delta_e() * p.j_phys;
  const auto w = sc::sweep_window(p, de);
  CHECK(w.lo_rad_s == doctest::Approx(11.34).epsilon(0.02));
  CHECK(w.hi_rad_s / w.lo_rad_s > 18.0);
  CHECK(w.hi_rad_s / w.lo_rad_s < 22.0);
  // Letting the window diagonalize for itself gives the same floor.
  CHECK(sc::sweep_window(p).lo_rad_s == doctest::Approx(w.lo_rad_s).epsilon(1e-10));
}

TEST_CASE("Landau-Zener flip error") {
  CHECK(sc::lz_error(2.0, 10, 0.5, 1.0, 0.0) == 1.0);
  // x = dE^2 tau / (4 N m* dh) = 1 at this point.
  CHECK(sc::lz_error(2.0, 10, 0.5, 1.0, 5.0) ==
        doctest::Approx(std::exp(-M_PI)).epsilon(1e-12));
  // Doubling the ramp time squares the error.
  const double p1 = sc::lz_error(2.0, 10, 0.5, 1.0, 3.0);
  const double p2 = sc::lz_error(2.0, 10, 0.5, 1.0, 6.0);
  CHECK(p2 == doctest::Approx(p1 * p1).epsilon(1e-12));
  CHECK_THROWS_AS(sc::lz_error(-1.0, 10, 0.5, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("dephasing channel coherence times") {
  const auto p = bench_params();
  const auto r = sc::dephasing_rates(p, 0.05);
  CHECK(r.t2_coll_ms == doctest::Approx(3.0).epsilon(0.02));
  CHECK(r.t2_local_ms == doctest::Approx(49.0).epsilon(0.02));

  // Deep in the ordered phase the local rate approaches 2 N gamma.
  auto deep = p;
  deep.gamma_ratio = 1e-6;
  const auto rd = sc::dephasing_rates(deep, 0.05);
  CHECK(1000.0 / rd.t2_local_ms ==
        doctest::Approx(2.0 * deep.n_spins * 0.05).epsilon(1e-3));
  CHECK_THROWS_AS(sc::dephasing_rates(p, 0.0), std::invalid_argument);
}

TEST_CASE("two-level decay model and its violation threshold") {
  const double de = 1310.0;
  const double q01_sq = 0.9436;

  // No decay: the coherent two-level ceiling Q01^2 * 3/2.
  CHECK(sc::k3_two_level(1e15, de, q01_sq) ==
        doctest::Approx(1.5 * q01_sq).epsilon(1e-9));

  const auto thr = sc::two_level_threshold(de, q01_sq);
  CHECK(thr.xi == doctest::Approx(0.76624).epsilon(1.5e-4));
  CHECK(thr.t2_threshold_ms == doctest::Approx(3.00).epsilon(0.01));
  CHECK(thr.t2_threshold_ms / 1000.0 * de == doctest::Approx(3.93).epsilon(0.01));
  // At the threshold the correlator sits exactly on the macrorealist bound.
  CHECK(sc::k3_two_level(thr.t2_threshold_ms, de, q01_sq) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Q01^2 <= 2/3 can never violate the bound.
  CHECK_THROWS_AS(sc::two_level_threshold(de, 0.5), std::runtime_error);
}

TEST_CASE("threshold hierarchy across dephasing channels") {
  const auto p = bench_params();
  const auto rep = sc::hierarchy(p, bench_spectrum(), 0.289, 0.05);
  CHECK(rep.gamma_a == doctest::Approx(0.050).epsilon(0.03));
  CHECK(rep.gamma_b == doctest::Approx(0.117).epsilon(0.03));
  CHECK(rep.gamma_b / rep.gamma_a == doctest::Approx(2.35).epsilon(0.05));
  CHECK(rep.gamma_c / rep.gamma_b == doctest::Approx(2.46).epsilon(0.05));
  CHECK(rep.gamma_a < rep.gamma_b);
  CHECK(rep.gamma_b < rep.gamma_c);
  CHECK(rep.t2_coll_ms == doctest::Approx(3.0).epsilon(0.02));
  CHECK(rep.t2_local_ms == doctest::Approx(49.0).epsilon(0.02));
  CHECK(rep.t2_phys_ms == doctest::Approx(7.04).epsilon(0.01));
}

TEST_CASE("coherent multilevel correlator") {
  // A single level with r = 1 reduces to the undamped two-level formula.
  for (double q : {0.3, 0.9436, 1.0}) {
    const auto one = sc::k3_coherent_multilevel({q}, {1.0}, 1.0);
    CHECK(one.k3 == doctest::Approx(sc::k3_two_level(1e15, 1310.0, q)).epsilon(1e-9));
  }

  // Benchmark ladder: odd levels contribute with alternating impact.
  const auto sys = lmg::open_system::truncate(bench_spectrum(),
                                              lmg::core::sign_observable(370), 10);
  std::vector<double> q_sq, ratios;
  for (int k = 1; k < 10; ++k) {
    q_sq.push_back(sys.q(0, k) * sys.q(0, k));
    ratios.push_back((sys.h_diag(k) - sys.h_diag(0)) / sys.delta_e);
  }
  const auto full = sc::k3_coherent_multilevel(q_sq, ratios, 1.0);
  const double expected[] = {1.415, 0.0, 0.028, 0.0, 0.013, 0.0, -0.010, 0.0, -0.009};
  for (int k = 1; k < 10; ++k) {
    if (k % 2 == 0) {
      CHECK(std::abs(full.contributions[k - 1]) < 1e-6);  // parity
    } else {
      CHECK(full.contributions[k - 1] ==
            doctest::Approx(expected[k - 1]).epsilon(0.10));
    }
  }
  CHECK(full.k3 == doctest::Approx(1.439).epsilon(0.005));

  const auto five = sc::k3_coherent_multilevel(
      {q_sq.begin(), q_sq.begin() + 4}, {ratios.begin(), ratios.begin() + 4}, 1.0);
  CHECK(five.k3 == doctest::Approx(1.443).epsilon(0.005));

  CHECK_THROWS_AS(sc::k3_coherent_multilevel({1.0}, {1.0, 2.0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("linearized autocorrelation modes") {
  const auto modes = sc::acf_linearization(1.0, 0.5, 0.01, 0.1);
  CHECK(std::abs(modes.lambda_plus - std::complex<double>(-0.1, std::sqrt(3.0))) <
        1e-4);
  CHECK(std::abs(modes.lambda_minus - std::complex<double>(-0.1, -std::sqrt(3.0))) <
        1e-4);
  CHECK(std::abs(modes.lambda_long - std::complex<double>(-0.01, 0.0)) < 1e-4);
  CHECK(modes.omega0 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

  // Precession frequency softens toward the critical point.
  CHECK(sc::acf_linearization(1.0, 1e-6, 0.01, 0.1).omega0 ==
        doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sc::acf_linearization(1.0, 0.999, 0.01, 0.1).omega0 < 0.1);
  CHECK_THROWS_AS(sc::acf_linearization(1.0, 1.0, 0.01, 0.1), std::runtime_error);
}

TEST_CASE("freeze-out exponents and the macrorealist bound") {
  CHECK(sc::freezeout_exponent(sc::Protocol::j_quench).num == 1);
  CHECK(sc::freezeout_exponent(sc::Protocol::j_quench).den == 3);
  CHECK(sc::freezeout_exponent(sc::Protocol::h_quench).value() ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sc::freezeout_exponent(sc::Protocol::classical_overdamped).value() ==
        doctest::Approx(0.5).epsilon(1e-15));

  const auto bound = sc::macrorealist_bound();
  CHECK(bound.max_k3 == 1);
  CHECK(bound.min_k3 == -3);
  int ones = 0, neg3 = 0;
  for (int v : bound.per_assignment) {
    if (v == 1) ++ones;
    if (v == -3) ++neg3;
  }
  CHECK(ones == 6);
  CHECK(neg3 == 2);
}

}  // TEST_SUITE
