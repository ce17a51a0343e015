#include <cmath>
#include <random>

#include <doctest.h>

#include "nozzleflow/errors.hpp"
#include "nozzleflow/gas.hpp"

using namespace nozzleflow;

namespace {

const GasLaw kPoly = GasLaw::polytropic(0.5, 2.0);
const GasLaw kIso = GasLaw::isothermal(1.0);

// Closed forms for A = 1/2, gamma = 2: h = rho, c^2 = rho.
double poly_sigma(double s) { return std::pow(2.0 * s / 3.0, 1.5); }

}  // namespace

TEST_CASE("enthalpy normalization and values") {
  CHECK(kPoly.enthalpy(1.3) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(kPoly.enthalpy(0.0) == 0.0);
  CHECK(kIso.enthalpy(1.0) == 0.0);
  CHECK(kPoly.B0() == 0.0);
  CHECK_FALSE(kIso.enthalpy_bounded_below());
  CHECK_THROWS_AS(kIso.enthalpy(0.0), DomainError);
  CHECK_THROWS_AS(kIso.enthalpy(-1.0), DomainError);
  CHECK_THROWS_AS(kPoly.enthalpy(-1.0), DomainError);
}

TEST_CASE("sound speed") {
  CHECK(kPoly.sound_speed_sq(1.44) == doctest::Approx(1.44).epsilon(1e-15));
  CHECK(kIso.sound_speed_sq(0.3) == 1.0);
  CHECK(kIso.sound_speed_sq(7.0) == 1.0);
  CHECK(GasLaw::polytropic(1.0, 1.4).sound_speed_sq(1.0) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK_THROWS_AS(kPoly.sound_speed_sq(0.0), DomainError);
}

TEST_CASE("invalid gas parameters") {
  CHECK_THROWS_AS(GasLaw::polytropic(0.0, 2.0), ConfigError);
  CHECK_THROWS_AS(GasLaw::polytropic(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(GasLaw::isothermal(-1.0), ConfigError);
}

TEST_CASE("critical states with closed forms") {
  const CriticalState p = critical_state(kPoly, 1.5);
  CHECK(p.rho_bar == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(p.rho_crit == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p.gamma_crit == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p.sigma == doctest::Approx(1.0).epsilon(1e-13));

  const CriticalState i = critical_state(kIso, 0.5);
  CHECK(i.rho_bar == doctest::Approx(std::exp(0.5)).epsilon(1e-13));
  CHECK(i.rho_crit == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(i.gamma_crit == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(i.sigma == doctest::Approx(1.0).epsilon(1e-13));

  const CriticalState q = critical_state(kPoly, 3.0);
  CHECK(q.rho_crit == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(q.sigma == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));

  CHECK_THROWS_AS(critical_state(kPoly, 0.0), DomainError);
  CHECK_THROWS_AS(critical_state(kPoly, -1.0), DomainError);
  // isothermal accepts any finite s
  CHECK(critical_state(kIso, -3.0).sigma == doctest::Approx(std::exp(-3.5)).epsilon(1e-12));
}

TEST_CASE("critical state invariants over a grid") {
  for (const GasLaw& gas : {kPoly, GasLaw::polytropic(1.0, 1.4), kIso}) {
    const double start = gas.enthalpy_bounded_below() ? 0.01 : -3.0;
    double prev_sigma = 0.0;
    for (int k = 0; k <= 60; ++k) {
      const double s = start + 0.1 * k;
      const CriticalState st = critical_state(gas, s);
      CHECK(st.rho_crit < st.rho_bar);
      CHECK(std::abs(gas.enthalpy(st.rho_bar) - s) <= 1e-12 * std::max(1.0, std::abs(s)));
      CHECK(gas.sound_speed_sq(st.rho_crit) == doctest::Approx(st.gamma_crit * st.gamma_crit).epsilon(1e-12));
      CHECK(gas.enthalpy(st.rho_crit) + 0.5 * st.gamma_crit * st.gamma_crit ==
            doctest::Approx(s).epsilon(1e-12).scale(1.0));
      CHECK(st.sigma > prev_sigma);
      prev_sigma = st.sigma;
    }
  }
}

TEST_CASE("critical flux derivative matches central differences") {
  for (double s : {0.4, 1.5, 3.0}) {
    const double h = 1e-5 * s;
    const double fd = (critical_state(kPoly, s + h).sigma - critical_state(kPoly, s - h).sigma) / (2.0 * h);
    CHECK(critical_flux_derivative(kPoly, s) == doctest::Approx(fd).epsilon(1e-6));
    // d/ds (2s/3)^{3/2} = sqrt(2s/3)
    CHECK(critical_flux_derivative(kPoly, s) == doctest::Approx(std::sqrt(2.0 * s / 3.0)).epsilon(1e-10));
  }
  const double fd = (critical_state(kIso, 0.5 + 1e-6).sigma - critical_state(kIso, 0.5 - 1e-6).sigma) / 2e-6;
  CHECK(critical_flux_derivative(kIso, 0.5) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("momentum function") {
  CHECK(momentum_sq(kPoly, 1.0, 1.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(momentum_sq(kPoly, 1.5, 1.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(momentum_sq(kPoly, 1.25, 1.5) == doctest::Approx(0.78125).epsilon(1e-14));
  CHECK_THROWS_AS(momentum_sq(kPoly, 1.6, 1.5), DomainError);
  // increasing below the critical density, decreasing above
  const CriticalState st = critical_state(kIso, 0.7);
  double prev = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double rho = st.rho_crit * k / 50.0;
    const double I = momentum_sq(kIso, rho, 0.7);
    CHECK(I > prev);
    prev = I;
  }
  CHECK(prev == doctest::Approx(st.sigma * st.sigma).epsilon(1e-12));
  for (int k = 1; k <= 50; ++k) {
    const double rho = st.rho_crit + (st.rho_bar - st.rho_crit) * k / 50.0;
    const double I = momentum_sq(kIso, rho, 0.7);
    CHECK(I < prev);
    prev = I;
  }
}

TEST_CASE("subsonic branch values") {
  CHECK(subsonic_density(kPoly, 0.0, 1.5).rho == doctest::Approx(1.5).epsilon(1e-14));
  // rho^3 - 3/2 rho^2 + 1/4 = (rho - 1/2)(rho^2 - rho - 1/2)
  CHECK(subsonic_density(kPoly, 0.5, 1.5).rho == doctest::Approx((1.0 + std::sqrt(3.0)) / 2.0).epsilon(1e-13));
  const BranchDensity sonic = subsonic_density(kPoly, 1.0, 1.5);
  CHECK(sonic.rho == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(sonic.status == BranchStatus::sonic);
  CHECK(subsonic_density(kPoly, 0.78125, 1.5).rho == doctest::Approx(1.25).epsilon(1e-13));
  CHECK_THROWS_AS(subsonic_density(kPoly, 1.01, 1.5), DomainError);
  CHECK_THROWS_AS(subsonic_density(kPoly, -0.1, 1.5), DomainError);
}

TEST_CASE("subsonic branch is decreasing in the momentum") {
  const CriticalState st = critical_state(kPoly, 2.0);
  double prev = st.rho_bar + 1.0;
  for (int k = 0; k < 100; ++k) {
    const double rho = subsonic_density(kPoly, st.sigma * st.sigma * k / 100.0, st).rho;
    CHECK(rho < prev);
    CHECK(rho > st.rho_crit);
    prev = rho;
  }
}

TEST_CASE("round trip through the subsonic branch on random states") {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const GasLaw& gas : {kPoly, GasLaw::polytropic(2.0, 1.4), kIso}) {
    for (int k = 0; k < 2000; ++k) {
      const double s = gas.enthalpy_bounded_below() ? 0.05 + 5.0 * unit(rng) : -3.0 + 6.0 * unit(rng);
      const CriticalState st = critical_state(gas, s);
      // keep clear of the sonic point, where J loses conditioning
      const double rho = st.rho_crit + (st.rho_bar - st.rho_crit) * (1e-3 + (1.0 - 1e-3) * unit(rng));
      const double back = subsonic_density(gas, momentum_sq(gas, rho, s), st).rho;
      CHECK(std::abs(back - rho) <= 1e-10 * rho);
    }
  }
}
