#include "nozzleflow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "nozzleflow/errors.hpp"

namespace nozzleflow {

namespace {

TruncatedCoefficients coefficients_at(const FarFieldStates& ff, CriticalStateCache& cache, double grad_sq, double psi,
                                      const TruncationParams& params) {
  TruncatedCoefficients c;
  const double F = ff.extended.value(psi);
  const double dF = ff.extended.derivative(psi);
  c.bernoulli = ff.upstream.enthalpy() + 0.5 * F * F;
  const CriticalState& st = cache.at(c.bernoulli);
  c.sigma_sq = st.sigma * st.sigma;
  c.margin = grad_sq - c.sigma_sq;
  c.active = c.margin > -2.0 * params.eps;
  c.momentum_sq = std::max(0.0, cutoff(c.margin, params) + c.sigma_sq);
  c.H = subsonic_density(ff.gas, c.momentum_sq, st).rho;
  const double c2 = ff.gas.sound_speed_sq(c.H);
  c.H1 = -cutoff_derivative(c.margin, params) * c.H / (2.0 * (c.H * c.H * c2 - c.momentum_sq));
  c.source = F * dF * c.H;
  return c;
}

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)
constexpr double kRefR[4] = {-1.0, 1.0, 1.0, -1.0};
constexpr double kRefS[4] = {-1.0, -1.0, 1.0, 1.0};
constexpr double kGaussR[4] = {-kGauss, kGauss, kGauss, -kGauss};
constexpr double kGaussS[4] = {-kGauss, -kGauss, kGauss, kGauss};

}  // namespace

double cutoff(double s, const TruncationParams& p) {
  const double e = p.eps;
  if (s <= -2.0 * e) return s;
  if (s >= -e) return -e;
  const double t = (s + 2.0 * e) / e;
  const double t3 = t * t * t;
  return -2.0 * e + e * (t + 4.0 * t3 - 7.0 * t3 * t + 3.0 * t3 * t * t);
}

double cutoff_derivative(double s, const TruncationParams& p) {
  const double e = p.eps;
  if (s <= -2.0 * e) return 1.0;
  if (s >= -e) return 0.0;
  const double t = (s + 2.0 * e) / e;
  const double t2 = t * t;
  return 1.0 + 12.0 * t2 - 28.0 * t2 * t + 15.0 * t2 * t2;
}

TruncationParams default_truncation(const FarFieldStates& farfield, double eps0_scale) {
  if (!(eps0_scale > 0.0)) throw ConfigError("eps0_scale must be positive");
  const CriticalState st = critical_state(farfield.gas, farfield.bernoulli.min());
  return TruncationParams{eps0_scale * st.sigma * st.sigma};
}

TruncatedCoefficients truncated_density(const FarFieldStates& farfield, double grad_sq, double psi,
                                        const TruncationParams& params) {
  CriticalStateCache cache(farfield.gas);
  return coefficients_at(farfield, cache, grad_sq, psi, params);
}

double untruncated_density(const FarFieldStates& farfield, double grad_sq, double psi) {
  const double B = farfield.stream_bernoulli(psi);
  const BranchDensity d = subsonic_density(farfield.gas, grad_sq, B);
  if (d.status == BranchStatus::sonic) throw DomainError("untruncated density: sonic state");
  return d.rho;
}

// -------------------------------------------------------------- quadrature

QuadratureCache::QuadratureCache(const Mesh& mesh)
    : nx_(mesh.n_xi() - 1), ny_(mesh.n_eta() - 1), cells_(nx_ * ny_) {
  for (int q = 0; q < kPoints; ++q) {
    for (int a = 0; a < 4; ++a) {
      shape_[q][a] = 0.25 * (1.0 + kRefR[a] * kGaussR[q]) * (1.0 + kRefS[a] * kGaussS[q]);
    }
  }
  corners_.resize(cells_);
  jxw_.resize(cells_ * kPoints);
  grad_.resize(cells_ * kPoints * 8);
  for (int i = 0; i < nx_; ++i) {
    for (int j = 0; j < ny_; ++j) {
      const int c = i * ny_ + j;
      corners_[c] = {mesh.index(i, j), mesh.index(i + 1, j), mesh.index(i + 1, j + 1), mesh.index(i, j + 1)};
      const double px[4] = {mesh.x1(i), mesh.x1(i + 1), mesh.x1(i + 1), mesh.x1(i)};
      const double py[4] = {mesh.x2(i, j), mesh.x2(i + 1, j), mesh.x2(i + 1, j + 1), mesh.x2(i, j + 1)};
      for (int q = 0; q < kPoints; ++q) {
        double dr[4], ds[4];
        double xr = 0, xs = 0, yr = 0, ys = 0;
        for (int a = 0; a < 4; ++a) {
          dr[a] = 0.25 * kRefR[a] * (1.0 + kRefS[a] * kGaussS[q]);
          ds[a] = 0.25 * kRefS[a] * (1.0 + kRefR[a] * kGaussR[q]);
          xr += dr[a] * px[a];
          xs += ds[a] * px[a];
          yr += dr[a] * py[a];
          ys += ds[a] * py[a];
        }
        const double det = xr * ys - xs * yr;
        if (!(det > 0.0)) throw SolverError("quadrature: nonpositive element Jacobian");
        jxw_[c * kPoints + q] = det;  // unit Gauss weights
        for (int a = 0; a < 4; ++a) {
          grad_[(c * kPoints + q) * 8 + 2 * a] = (ys * dr[a] - yr * ds[a]) / det;
          grad_[(c * kPoints + q) * 8 + 2 * a + 1] = (-xs * dr[a] + xr * ds[a]) / det;
        }
      }
    }
  }
}

QuadratureCache::PointValues QuadratureCache::evaluate(std::span<const double> field, int c, int q) const {
  PointValues v{0.0, 0.0, 0.0};
  const auto& nodes = corners_[c];
  for (int a = 0; a < 4; ++a) {
    const double f = field[nodes[a]];
    v.psi += shape_[q][a] * f;
    v.dx1 += dshape_x1(c, q, a) * f;
    v.dx2 += dshape_x2(c, q, a) * f;
  }
  return v;
}

// ------------------------------------------------------------ coefficients

CoefficientField evaluate_coefficients(const QuadratureCache& quad, std::span<const double> psi,
                                       const FarFieldStates& farfield, const TruncationParams& params) {
  CoefficientField field;
  const int n = quad.cells() * QuadratureCache::kPoints;
  field.inv_density.resize(n);
  field.source.resize(n);
  field.ellipticity_min = std::numeric_limits<double>::infinity();
  field.ellipticity_max = 0.0;
  CriticalStateCache cache(farfield.gas);
  for (int c = 0; c < quad.cells(); ++c) {
    for (int q = 0; q < QuadratureCache::kPoints; ++q) {
      const auto v = quad.evaluate(psi, c, q);
      const double grad_sq = v.dx1 * v.dx1 + v.dx2 * v.dx2;
      const TruncatedCoefficients k = coefficients_at(farfield, cache, grad_sq, v.psi, params);
      if (!(k.H > 0.0)) throw SolverError("assembly: nonpositive truncated density");
      const int idx = c * QuadratureCache::kPoints + q;
      field.inv_density[idx] = 1.0 / k.H;
      field.source[idx] = k.source;
      if (k.active) ++field.active_points;
      // eigenvalues H (across q) and H - 2 H1 |q|^2 (along q)
      const double along = k.H - 2.0 * k.H1 * grad_sq;
      field.ellipticity_min = std::min({field.ellipticity_min, k.H, along});
      field.ellipticity_max = std::max({field.ellipticity_max, k.H, along});
    }
  }
  return field;
}

CoefficientField evaluate_untruncated(const QuadratureCache& quad, std::span<const double> psi,
                                      const FarFieldStates& farfield) {
  CoefficientField field;
  const int n = quad.cells() * QuadratureCache::kPoints;
  field.inv_density.resize(n);
  field.source.resize(n);
  CriticalStateCache cache(farfield.gas);
  for (int c = 0; c < quad.cells(); ++c) {
    for (int q = 0; q < QuadratureCache::kPoints; ++q) {
      const auto v = quad.evaluate(psi, c, q);
      const double grad_sq = v.dx1 * v.dx1 + v.dx2 * v.dx2;
      const double F = farfield.extended.value(v.psi);
      const double B = farfield.upstream.enthalpy() + 0.5 * F * F;
      const BranchDensity d = subsonic_density(farfield.gas, grad_sq, cache.at(B));
      if (d.status == BranchStatus::sonic) throw DomainError("untruncated coefficients: sonic Gauss point");
      const int idx = c * QuadratureCache::kPoints + q;
      field.inv_density[idx] = 1.0 / d.rho;
      field.source[idx] = F * farfield.extended.derivative(v.psi) * d.rho;
    }
  }
  return field;
}

// ---------------------------------------------------------------- assembly

LinearSystem assemble(const Mesh& mesh, const QuadratureCache& quad, const CoefficientField& coeff,
                      std::span<const double> dirichlet) {
  LinearSystem sys;
  sys.unknown.assign(mesh.size(), -1);
  int n = 0;
  for (int i = 0; i < mesh.n_xi(); ++i) {
    for (int j = 0; j < mesh.n_eta(); ++j) {
      if (!mesh.is_boundary(i, j)) sys.unknown[mesh.index(i, j)] = n++;
    }
  }
  sys.rhs = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(quad.cells()) * 16);
  for (int c = 0; c < quad.cells(); ++c) {
    double ke[4][4] = {};
    double fe[4] = {};
    for (int q = 0; q < QuadratureCache::kPoints; ++q) {
      const int idx = c * QuadratureCache::kPoints + q;
      const double w = quad.weight(c, q);
      const double k = coeff.inv_density[idx] * w;
      if (!(coeff.inv_density[idx] > 0.0) || !std::isfinite(coeff.inv_density[idx])) {
        throw SolverError("assembly: coefficient field not positive");
      }
      for (int a = 0; a < 4; ++a) {
        fe[a] += coeff.source[idx] * quad.shape(q, a) * w;
        for (int b = 0; b < 4; ++b) {
          ke[a][b] += k * (quad.dshape_x1(c, q, a) * quad.dshape_x1(c, q, b) +
                           quad.dshape_x2(c, q, a) * quad.dshape_x2(c, q, b));
        }
      }
    }
    const auto& nodes = quad.corners(c);
    for (int a = 0; a < 4; ++a) {
      const int row = sys.unknown[nodes[a]];
      if (row < 0) continue;
      sys.rhs[row] -= fe[a];
      for (int b = 0; b < 4; ++b) {
        const int col = sys.unknown[nodes[b]];
        if (col < 0) {
          sys.rhs[row] -= ke[a][b] * dirichlet[nodes[b]];
        } else {
          triplets.emplace_back(row, col, ke[a][b]);
        }
      }
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

double weak_residual(const Mesh& mesh, const QuadratureCache& quad, const CoefficientField& coeff,
                     std::span<const double> psi) {
  std::vector<double> r(mesh.size(), 0.0);
  for (int c = 0; c < quad.cells(); ++c) {
    const auto& nodes = quad.corners(c);
    for (int q = 0; q < QuadratureCache::kPoints; ++q) {
      const int idx = c * QuadratureCache::kPoints + q;
      const double w = quad.weight(c, q);
      const auto v = quad.evaluate(psi, c, q);
      for (int a = 0; a < 4; ++a) {
        r[nodes[a]] += w * (coeff.inv_density[idx] * (v.dx1 * quad.dshape_x1(c, q, a) + v.dx2 * quad.dshape_x2(c, q, a)) +
                            coeff.source[idx] * quad.shape(q, a));
      }
    }
  }
  double worst = 0.0;
  for (int i = 1; i + 1 < mesh.n_xi(); ++i) {
    for (int j = 1; j + 1 < mesh.n_eta(); ++j) worst = std::max(worst, std::abs(r[mesh.index(i, j)]));
  }
  return worst;
}

// ------------------------------------------------------------------ Picard

bool StreamSolution::any_truncation() const {
  return active_quadrature_points > 0 ||
         std::any_of(truncation_active.begin(), truncation_active.end(), [](std::uint8_t a) { return a != 0; });
}

bool TruncationActivity::any() const {
  return quadrature_points > 0 || std::any_of(nodes.begin(), nodes.end(), [](std::uint8_t a) { return a != 0; });
}

TruncationActivity truncation_activity(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield,
                                       const TruncationParams& params) {
  TruncationActivity activity;
  const QuadratureCache quad(mesh);
  activity.quadrature_points = evaluate_coefficients(quad, psi, farfield, params).active_points;
  const NodalGradient grad = nodal_gradient(mesh, psi);
  activity.nodes.assign(mesh.size(), 0);
  CriticalStateCache cache(farfield.gas);
  for (int node = 0; node < mesh.size(); ++node) {
    const double gx = grad.dx1[node], gy = grad.dx2[node];
    const CriticalState& st = cache.at(farfield.stream_bernoulli(psi[node]));
    if (gx * gx + gy * gy - st.sigma * st.sigma > -2.0 * params.eps) activity.nodes[node] = 1;
  }
  return activity;
}

StreamSolution solve_bvp(const Mesh& mesh, const FarFieldStates& farfield, const TruncationParams& params,
                         const PicardOptions& options, std::span<const double> seed) {
  if (!(options.damping > 0.0 && options.damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (!(options.tol_nonlinear > 0.0)) throw ConfigError("tol_nonlinear must be positive");
  StreamSolution sol(mesh);
  sol.m = farfield.m;
  sol.eps0 = params.eps;
  std::vector<double> psi = boundary_values(mesh, farfield.m, options.boundary_mode, &farfield);
  if (!seed.empty()) {
    if (static_cast<int>(seed.size()) != mesh.size()) throw ConfigError("seed size does not match the mesh");
    for (int i = 1; i + 1 < mesh.n_xi(); ++i) {
      for (int j = 1; j + 1 < mesh.n_eta(); ++j) psi[mesh.index(i, j)] = seed[mesh.index(i, j)];
    }
  }

  const QuadratureCache quad(mesh);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;
  double theta = options.damping;
  double previous = std::numeric_limits<double>::infinity();
  CoefficientField coeff;

  for (int k = 1; k <= options.max_iter; ++k) {
    coeff = evaluate_coefficients(quad, psi, farfield, params);
    const double res = weak_residual(mesh, quad, coeff, psi);
    sol.residual_history.push_back(res);
    if (res > previous) theta = std::max(0.5 * theta, options.min_damping);
    previous = res;

    const LinearSystem sys = assemble(mesh, quad, coeff, psi);
    if (!analyzed) {
      solver.analyzePattern(sys.matrix);
      analyzed = true;
    }
    solver.factorize(sys.matrix);
    if (solver.info() != Eigen::Success) throw SolverError("sparse factorization failed");
    const Eigen::VectorXd hat = solver.solve(sys.rhs);
    if (solver.info() != Eigen::Success) throw SolverError("sparse solve failed");

    double update = 0.0;
    for (int node = 0; node < mesh.size(); ++node) {
      const int u = sys.unknown[node];
      if (u >= 0) update = std::max(update, std::abs(hat[u] - psi[node]));
    }
    sol.iterations = k;
    sol.last_update = update;
    if (update <= options.tol_nonlinear) {
      for (int node = 0; node < mesh.size(); ++node) {
        if (sys.unknown[node] >= 0) psi[node] = hat[sys.unknown[node]];
      }
      sol.converged = true;
      break;
    }
    for (int node = 0; node < mesh.size(); ++node) {
      const int u = sys.unknown[node];
      if (u >= 0) psi[node] = (1.0 - theta) * psi[node] + theta * hat[u];
    }
  }

  coeff = evaluate_coefficients(quad, psi, farfield, params);
  sol.ellipticity_min = coeff.ellipticity_min;
  sol.ellipticity_max = coeff.ellipticity_max;
  sol.grad = nodal_gradient(mesh, psi);
  TruncationActivity activity = truncation_activity(mesh, psi, farfield, params);
  sol.active_quadrature_points = activity.quadrature_points;
  sol.truncation_active = std::move(activity.nodes);
  sol.psi = std::move(psi);
  return sol;
}

}  // namespace nozzleflow
