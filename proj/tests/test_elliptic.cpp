#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "nozzleflow/elliptic.hpp"
#include "nozzleflow/errors.hpp"

using namespace nozzleflow;

namespace {

const GasLaw kPoly = GasLaw::polytropic(0.5, 2.0);
const double kM = 1.25 / std::sqrt(2.0);

FarFieldStates constant_farfield(double m, double a = 0.0, double b = 1.0) {
  return build_farfield(kPoly, BernoulliProfile::constant(1.5), m, a, b);
}

}  // namespace

TEST_CASE("cutoff function") {
  const TruncationParams p{0.1};
  CHECK(cutoff(-0.5, p) == -0.5);
  CHECK(cutoff(-0.2, p) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(cutoff(-0.1, p) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(cutoff(0.3, p) == -0.1);
  CHECK(cutoff(-0.15, p) == doctest::Approx(-0.134375).epsilon(1e-14));
  // C2 joins
  CHECK(cutoff_derivative(-0.2, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cutoff_derivative(-0.1, p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  double prev = cutoff(-0.25, p);
  const double h = 1e-6;
  for (int k = 1; k <= 200; ++k) {
    const double s = -0.25 + 0.001 * k;
    const double v = cutoff(s, p);
    CHECK(v >= prev - 1e-15);  // nondecreasing
    CHECK(v <= -0.1 + 1e-15);
    CHECK(cutoff_derivative(s, p) ==
          doctest::Approx((cutoff(s + h, p) - cutoff(s - h, p)) / (2 * h)).scale(1.0).epsilon(1e-7));
    prev = v;
  }
}

TEST_CASE("default truncation level") {
  const FarFieldStates ff = constant_farfield(0.5);
  CHECK(default_truncation(ff).eps == doctest::Approx(0.05).epsilon(1e-12));  // Sigma^2(3/2) = 1
  CHECK(default_truncation(ff, 0.01).eps == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("truncated density") {
  const FarFieldStates ff = constant_farfield(kM);
  const TruncationParams p = default_truncation(ff);

  const TruncatedCoefficients uniform = truncated_density(ff, kM * kM, 0.3, p);
  CHECK_FALSE(uniform.active);
  CHECK(uniform.H == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(uniform.sigma_sq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(uniform.margin == doctest::Approx(kM * kM - 1.0).epsilon(1e-12));
  CHECK(uniform.source == 0.0);
  CHECK(untruncated_density(ff, kM * kM, 0.3) == doctest::Approx(1.25).epsilon(1e-12));

  const TruncatedCoefficients rest = truncated_density(ff, 0.0, 0.3, p);
  CHECK(rest.H == doctest::Approx(1.5).epsilon(1e-12));

  // supersonic input is clamped onto the subsonic branch
  const TruncatedCoefficients fast = truncated_density(ff, 2.0, 0.3, p);
  CHECK(fast.active);
  CHECK(std::isfinite(fast.H));
  CHECK(fast.H > 1.0);
  CHECK(fast.momentum_sq <= 1.0 - p.eps + 1e-12);
  CHECK_THROWS_AS(untruncated_density(ff, 2.0, 0.3), DomainError);

  // H1 = dH / d|grad psi|^2, inside and across the blend
  const double h = 1e-7;
  for (double q : {0.2, 0.6, 0.9, 0.93, 0.97, 1.2}) {
    const double fd = (truncated_density(ff, q + h, 0.3, p).H - truncated_density(ff, q - h, 0.3, p).H) / (2 * h);
    CHECK(truncated_density(ff, q, 0.3, p).H1 == doctest::Approx(fd).scale(1.0).epsilon(1e-6));
  }
}

TEST_CASE("truncated density with variable Bernoulli") {
  const FarFieldStates ff = build_farfield(kPoly, BernoulliProfile::polynomial({1.5025, -0.01, 0.01}), 0.6, 0.0, 1.0);
  const TruncationParams p = default_truncation(ff);
  const TruncatedCoefficients c = truncated_density(ff, 0.2, 0.15, p);
  CHECK(c.bernoulli == doctest::Approx(ff.stream_bernoulli(0.15)).epsilon(1e-15));
  const double F = ff.extended.value(0.15);
  const double dF = ff.extended.derivative(0.15);
  CHECK(c.source == doctest::Approx(F * dF * c.H).epsilon(1e-12));
  CHECK(c.source != 0.0);
}

TEST_CASE("assembly reproduces linear fields") {
  const Mesh mesh = generate_mesh(truncate(build_nozzle(TanhTransitionSpec{}), 4.0), 41, 9);
  const QuadratureCache quad(mesh);
  CoefficientField coeff;
  coeff.inv_density.assign(quad.cells() * 4, 0.8);
  coeff.source.assign(quad.cells() * 4, 0.0);
  std::vector<double> psi(mesh.size());
  for (int i = 0; i < mesh.n_xi(); ++i) {
    for (int j = 0; j < mesh.n_eta(); ++j) psi[mesh.index(i, j)] = 0.4 * mesh.x1(i) + 1.7 * mesh.x2(i, j);
  }
  CHECK(weak_residual(mesh, quad, coeff, psi) < 1e-13);

  const LinearSystem sys = assemble(mesh, quad, coeff, psi);
  Eigen::SparseMatrix<double> diff = sys.matrix - Eigen::SparseMatrix<double>(sys.matrix.transpose());
  CHECK(diff.norm() <= 1e-14 * sys.matrix.norm());
  Eigen::VectorXd interior(sys.matrix.rows());
  for (int node = 0; node < mesh.size(); ++node) {
    if (sys.unknown[node] >= 0) interior[sys.unknown[node]] = psi[node];
  }
  CHECK((sys.matrix * interior - sys.rhs).lpNorm<Eigen::Infinity>() < 1e-13);
  CHECK(std::count_if(sys.unknown.begin(), sys.unknown.end(), [](int u) { return u >= 0; }) == 39 * 7);
}

TEST_CASE("single interior node with a constant source") {
  // [-1, 1] x [0, 1] with 3 x 3 nodes: Q1 stiffness 10/3, load 1/2.
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 1.0), 3, 3);
  const QuadratureCache quad(mesh);
  CHECK(quad.cells() == 4);
  CoefficientField coeff;
  coeff.inv_density.assign(16, 1.0);
  coeff.source.assign(16, 1.0);
  const std::vector<double> zero(9, 0.0);
  const LinearSystem sys = assemble(mesh, quad, coeff, zero);
  REQUIRE(sys.matrix.rows() == 1);
  CHECK(sys.matrix.coeff(0, 0) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  CHECK(sys.rhs[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(sys.rhs[0] / sys.matrix.coeff(0, 0) == doctest::Approx(-0.15).epsilon(1e-14));

  // square cells h = 1/2: stiffness 8/3, load h^2, value -3/32 (the 5-point
  // scheme would give -h^2/4)
  const Mesh square = generate_mesh(truncate(build_nozzle(StraightSpec{}), 0.5), 3, 3);
  const QuadratureCache sq(square);
  const LinearSystem s2 = assemble(square, sq, coeff, zero);
  CHECK(s2.matrix.coeff(0, 0) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(s2.rhs[0] / s2.matrix.coeff(0, 0) == doctest::Approx(-3.0 / 32.0).epsilon(1e-14));
}

TEST_CASE("uniform flow in a straight nozzle") {
  const FarFieldStates ff = constant_farfield(kM);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 8.0), 81, 11);
  const StreamSolution sol = solve_bvp(mesh, ff, default_truncation(ff), PicardOptions{});
  CHECK(sol.converged);
  CHECK(sol.iterations <= 2);
  CHECK_FALSE(sol.any_truncation());
  double err = 0.0;
  for (int i = 0; i < mesh.n_xi(); ++i) {
    for (int j = 0; j < mesh.n_eta(); ++j) err = std::max(err, std::abs(sol.psi[mesh.index(i, j)] - kM * mesh.x2(i, j)));
  }
  CHECK(err < 1e-12);
  CHECK(sol.ellipticity_min > 0.0);
  CHECK(sol.ellipticity_min <= sol.ellipticity_max);
}

TEST_CASE("tanh widening converges") {
  const FarFieldStates ff = constant_farfield(0.6, 0.0, 2.0);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(TanhTransitionSpec{}), 8.0), 161, 17);
  const TruncationParams params = default_truncation(ff);
  const StreamSolution sol = solve_bvp(mesh, ff, params, PicardOptions{});
  REQUIRE(sol.converged);
  CHECK_FALSE(sol.any_truncation());
  CHECK(sol.ellipticity_min > 0.0);
  const auto& r = sol.residual_history;
  REQUIRE(r.size() > 4);
  for (std::size_t k = 3; k < r.size(); ++k) CHECK(r[k] < r[k - 1]);

  // idle truncation: truncated and untruncated coefficients coincide
  const QuadratureCache quad(mesh);
  const CoefficientField t = evaluate_coefficients(quad, sol.psi, ff, params);
  const CoefficientField u = evaluate_untruncated(quad, sol.psi, ff);
  CHECK(t.active_points == 0);
  CHECK(weak_residual(mesh, quad, u, sol.psi) == doctest::Approx(weak_residual(mesh, quad, t, sol.psi)).epsilon(1e-12));

  // warm start from the converged field
  const StreamSolution again = solve_bvp(mesh, ff, params, PicardOptions{}, sol.psi);
  CHECK(again.converged);
  CHECK(again.iterations <= 2);
  double diff = 0.0;
  for (std::size_t k = 0; k < sol.psi.size(); ++k) diff = std::max(diff, std::abs(again.psi[k] - sol.psi[k]));
  CHECK(diff < 1e-8);

  CHECK_THROWS_AS(solve_bvp(mesh, ff, params, PicardOptions{}, std::vector<double>(7, 0.0)), ConfigError);
}

TEST_CASE("throat demanding supersonic flow activates the truncation") {
  BumpSpec throat;
  throat.wall = BumpSpec::Wall::upper;
  throat.amplitude = -0.2;
  const FarFieldStates ff = constant_farfield(0.99);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(throat), 4.0), 81, 11);
  PicardOptions opt;
  opt.max_iter = 60;
  const StreamSolution sol = solve_bvp(mesh, ff, default_truncation(ff), opt);
  CHECK(sol.any_truncation());
  CHECK(sol.active_quadrature_points > 0);
  for (double v : sol.psi) CHECK(std::isfinite(v));
}

TEST_CASE("invalid Picard options") {
  const FarFieldStates ff = constant_farfield(0.5);
  const Mesh mesh = generate_mesh(truncate(build_nozzle(StraightSpec{}), 2.0), 11, 5);
  PicardOptions bad;
  bad.damping = 0.0;
  CHECK_THROWS_AS(solve_bvp(mesh, ff, default_truncation(ff), bad), ConfigError);
  bad.damping = 0.5;
  bad.tol_nonlinear = -1.0;
  CHECK_THROWS_AS(solve_bvp(mesh, ff, default_truncation(ff), bad), ConfigError);
}
