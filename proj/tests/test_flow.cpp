#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "nozzleflow/errors.hpp"
#include "nozzleflow/flow.hpp"

using namespace nozzleflow;

namespace {

const GasLaw kPoly = GasLaw::polytropic(0.5, 2.0);
const double kM = 1.25 / std::sqrt(2.0);

std::vector<double> linear_psi(const Mesh& mesh, double m) {
  std::vector<double> psi(mesh.size());
  for (int i = 0; i < mesh.n_xi(); ++i) {
    for (int j = 0; j < mesh.n_eta(); ++j) psi[mesh.index(i, j)] = m * mesh.x2(i, j);
  }
  return psi;
}

}  // namespace

TEST_CASE("uniform flow fields") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::constant(1.5), kM, 0.0, 1.0);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 8.0), 41, 11);
  const FlowField f = recover_fields(mesh, linear_psi(mesh, kM), ff);
  for (int k = 0; k < mesh.size(); ++k) {
    CHECK(f.rho[k] == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(f.u[k] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(f.v[k]) < 1e-13);
    CHECK(f.mach_sq[k] == doctest::Approx(0.4).epsilon(1e-12));
  }
  CHECK(mass_flux_error(f).max_err < 1e-13);
  CHECK(vorticity_residual(f, ff) < 1e-10);
  CHECK(subsonic_margin(f) == doctest::Approx(-0.21875).epsilon(1e-12));
  CHECK(subsonic_margin(mesh, f.psi, ff) == doctest::Approx(-0.21875).epsilon(1e-12));
  const FarFieldDeviation dev = farfield_deviation(mesh, f.psi, ff);
  CHECK(dev.minus < 1e-12);
  CHECK(dev.plus < 1e-12);
  CHECK(dev.x1_minus == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(dev.x1_plus == doctest::Approx(4.0).epsilon(1e-12));

  const DiagnosticReport rep = diagnose(f, ff, false);
  CHECK(rep.euler_consistent);
  CHECK(rep.violations.empty());
  CHECK(rep.bernoulli_max_drift < 1e-12);
  CHECK(rep.psi_min == 0.0);
  CHECK(rep.psi_max == doctest::Approx(kM).epsilon(1e-15));
  CHECK(to_json(rep)["euler_consistent"].get<bool>());
}

TEST_CASE("slow uniform flow margin") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::constant(1.5), 0.1, 0.0, 1.0);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 2.0), 11, 5);
  CHECK(subsonic_margin(recover_fields(mesh, linear_psi(mesh, 0.1), ff)) == doctest::Approx(-0.99).epsilon(1e-12));
}

TEST_CASE("degenerate and supersonic stream functions are rejected") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::constant(1.5), 0.5, 0.0, 1.0);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 2.0), 11, 5);
  CHECK_THROWS_WITH_AS(recover_fields(mesh, std::vector<double>(mesh.size(), 0.0), ff),
                       doctest::Contains("vanishes identically"), DomainError);
  CHECK_THROWS_AS(recover_fields(mesh, linear_psi(mesh, 1.2), ff), DomainError);
}

TEST_CASE("corrupted samples show up in the diagnostics") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::constant(1.5), kM, 0.0, 1.0);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 8.0), 41, 11);
  const FlowField f = recover_fields(mesh, linear_psi(mesh, kM), ff);
  std::vector<double> u = f.u;
  for (double& x : u) x *= 1.01;
  const FlowField bad = field_from_samples(mesh, f.psi, f.rho, u, f.v, ff);
  CHECK(mass_flux_error(bad).max_err == doctest::Approx(1e-2).epsilon(1e-9));
  const DiagnosticReport rep = diagnose(bad, ff, false);
  CHECK_FALSE(rep.euler_consistent);
  CHECK_FALSE(rep.violations.empty());

  CHECK_THROWS_AS(field_from_samples(mesh, f.psi, f.rho, std::vector<double>(3, 1.0), f.v, ff), ConfigError);
}

TEST_CASE("truncated solutions are never Euler consistent") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::constant(1.5), kM, 0.0, 1.0);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 8.0), 41, 11);
  const DiagnosticReport rep = diagnose(recover_fields(mesh, linear_psi(mesh, kM), ff), ff, true);
  CHECK(rep.truncation_active);
  CHECK_FALSE(rep.euler_consistent);
}

TEST_CASE("sampling interpolates bilinearly in the mesh coordinates") {
  const Mesh mesh = generate_mesh(truncate(build_nozzle(TanhTransitionSpec{}), 4.0), 81, 11);
  std::vector<double> f(mesh.size());
  for (int i = 0; i < mesh.n_xi(); ++i) {
    for (int j = 0; j < mesh.n_eta(); ++j) f[mesh.index(i, j)] = mesh.xi(i) + 3.0 * mesh.eta(j);
  }
  const NozzleGeometry& g = mesh.nozzle();
  for (double x : {-3.3, 0.01, 1.7}) {
    const double y = g.lower(x) + 0.37 * g.width(x);
    CHECK(sample_field(mesh, f, x, y) == doctest::Approx(x + 3.0 * 0.37).epsilon(1e-12));
  }
}

TEST_CASE("streamlines of the tanh widening") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::constant(1.5), 0.6, 0.0, 2.0);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(TanhTransitionSpec{}), 8.0), 161, 21);
  const StreamSolution sol = solve_bvp(mesh, ff, default_truncation(ff), PicardOptions{});
  REQUIRE(sol.converged);
  const FlowField f = recover_fields(sol, ff);
  for (double s : {0.25, 0.5, 0.75}) {
    const Streamline line = trace_streamline(f, ff, mesh.x1(0), s);
    REQUIRE(line.ok());
    CHECK(line.exit_height() == doctest::Approx(ff.downstream.ymap(s)).epsilon(2e-3));
    CHECK(line.bernoulli_drift < 1e-10);
    CHECK(std::is_sorted(line.x2.begin(), line.x2.end()));
  }
  CHECK_FALSE(trace_streamline(f, ff, 0.0, 5.0).ok());
  CHECK(mass_flux_error(f).max_err < 2e-3);
  CHECK(vorticity_residual(f, ff) < 2e-2);
  CHECK(subsonic_margin(f) < 0.0);
}

TEST_CASE("strip oracle with constant Bernoulli is linear") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::constant(1.5), 0.6, 0.0, 1.0);
  const StripProfile p = solve_1d_oracle(ff, 400);
  for (double y : {0.0, 0.13, 0.5, 0.9, 1.0}) CHECK(p(y) == doctest::Approx(0.6 * y).scale(1.0).epsilon(1e-11));
  CHECK(p.psi.back() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(p.inflow_speed == doctest::Approx(ff.upstream.speed(0.0)).epsilon(1e-10));
  CHECK_THROWS_AS(solve_1d_oracle(ff, 1), ConfigError);
}

TEST_CASE("strip oracle with variable Bernoulli matches the upstream profile") {
  // the strip solution is the upstream state itself, psi = int_0^x2 rho0 u0
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::polynomial({1.5025, -0.01, 0.01}), 0.6, 0.0, 1.0);
  const StripProfile p = solve_1d_oracle(ff, 4000);
  double err = 0.0;
  for (int k = 0; k <= 50; ++k) {
    const double y = k / 50.0;
    const int n = 4000;
    double sum = 0.0;
    for (int r = 0; r <= n; ++r) sum += ((r == 0 || r == n) ? 0.5 : 1.0) * ff.upstream.flux_density(y * r / n);
    err = std::max(err, std::abs(p(y) - sum * y / n));
  }
  CHECK(err < 1e-8);
}
