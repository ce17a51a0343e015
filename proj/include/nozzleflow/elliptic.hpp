#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "nozzleflow/farfield.hpp"
#include "nozzleflow/geometry.hpp"

namespace nozzleflow {

// Cutoff zeta0: identity below -2 eps, constant -eps above -eps, and the
// C2 quintic blend -2 eps + eps (t + 4t^3 - 7t^4 + 3t^5) in between.
struct TruncationParams {
  double eps = 0.05;
};

double cutoff(double s, const TruncationParams& params);
double cutoff_derivative(double s, const TruncationParams& params);

// eps = eps0_scale * Sigma^2(min B)
TruncationParams default_truncation(const FarFieldStates& farfield, double eps0_scale = 0.05);

struct TruncatedCoefficients {
  double bernoulli = 0.0;    // B~(psi)
  double sigma_sq = 0.0;     // Sigma^2(B~)
  double margin = 0.0;       // |grad psi|^2 - Sigma^2(B~)
  double momentum_sq = 0.0;  // Delta~
  double H = 0.0;            // truncated density
  double H1 = 0.0;           // dH / d|grad psi|^2
  double source = 0.0;       // F~ F~' H
  bool active = false;       // cutoff differs from the identity
};

TruncatedCoefficients truncated_density(const FarFieldStates& farfield, double grad_sq, double psi,
                                        const TruncationParams& params);

// Density of the untruncated problem, J(|grad psi|^2, B~(psi)).
// Throws DomainError at supersonic input.
double untruncated_density(const FarFieldStates& farfield, double grad_sq, double psi);

// Shape data of the bilinear elements at the 2x2 Gauss points.
// Cell (i, j) has corners (i,j), (i+1,j), (i+1,j+1), (i,j+1).
class QuadratureCache {
 public:
  explicit QuadratureCache(const Mesh& mesh);

  static constexpr int kPoints = 4;
  int cells() const { return cells_; }
  int cell_count_xi() const { return nx_; }
  int cell_count_eta() const { return ny_; }
  // global node numbers of the corners of cell c
  const std::array<int, 4>& corners(int c) const { return corners_[c]; }
  double weight(int c, int q) const { return jxw_[c * kPoints + q]; }
  double shape(int q, int a) const { return shape_[q][a]; }
  double dshape_x1(int c, int q, int a) const { return grad_[(c * kPoints + q) * 8 + 2 * a]; }
  double dshape_x2(int c, int q, int a) const { return grad_[(c * kPoints + q) * 8 + 2 * a + 1]; }

  struct PointValues {
    double psi;
    double dx1;
    double dx2;
  };
  PointValues evaluate(std::span<const double> field, int c, int q) const;

 private:
  int nx_;
  int ny_;
  int cells_;
  std::vector<std::array<int, 4>> corners_;
  double shape_[kPoints][4];
  std::vector<double> jxw_;
  std::vector<double> grad_;
};

// Frozen coefficients at every Gauss point (index cell * 4 + point).
struct CoefficientField {
  std::vector<double> inv_density;
  std::vector<double> source;
  int active_points = 0;
  double ellipticity_min = 0.0;  // eigenvalue bounds of H delta_ij - 2 H1 q_i q_j
  double ellipticity_max = 0.0;
};

CoefficientField evaluate_coefficients(const QuadratureCache& quad, std::span<const double> psi,
                                       const FarFieldStates& farfield, const TruncationParams& params);

// Same field with the untruncated density; throws DomainError at a
// supersonic Gauss point.
CoefficientField evaluate_untruncated(const QuadratureCache& quad, std::span<const double> psi,
                                      const FarFieldStates& farfield);

// Galerkin system for -div(grad psi / H) + source = 0 (weak form
// int grad psi . grad phi / H + int source phi = 0), Dirichlet rows
// eliminated. Unknowns are the interior nodes in mesh order.
struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<int> unknown;  // node -> unknown index, -1 on the boundary
};

LinearSystem assemble(const Mesh& mesh, const QuadratureCache& quad, const CoefficientField& coeff,
                      std::span<const double> dirichlet);

// Max-norm of the discrete weak residual at interior nodes.
double weak_residual(const Mesh& mesh, const QuadratureCache& quad, const CoefficientField& coeff,
                     std::span<const double> psi);

struct PicardOptions {
  double tol_nonlinear = 1e-10;
  int max_iter = 200;
  double damping = 0.7;
  double min_damping = 1.0 / 64.0;
  BoundaryMode boundary_mode = BoundaryMode::linear;
};

struct StreamSolution {
  explicit StreamSolution(Mesh mesh_) : mesh(std::move(mesh_)) {}

  Mesh mesh;
  double m = 0.0;
  std::vector<double> psi;
  NodalGradient grad;
  int iterations = 0;
  bool converged = false;
  double last_update = 0.0;
  std::vector<double> residual_history;
  std::vector<std::uint8_t> truncation_active;  // per node
  int active_quadrature_points = 0;
  double eps0 = 0.0;
  double ellipticity_min = 0.0;
  double ellipticity_max = 0.0;

  bool any_truncation() const;
};

// Where the cutoff leaves the identity for a given iterate: nodes (by the
// nodal gradient) and Gauss points of the assembly.
struct TruncationActivity {
  std::vector<std::uint8_t> nodes;
  int quadrature_points = 0;

  bool any() const;
};

TruncationActivity truncation_activity(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield,
                                       const TruncationParams& params);

// Damped Picard iteration. `seed`, when given, replaces the bilinear start
// in the interior (boundary values are always reset to the Dirichlet data).
// Non-convergence is reported through `converged`, not thrown.
StreamSolution solve_bvp(const Mesh& mesh, const FarFieldStates& farfield, const TruncationParams& params,
                         const PicardOptions& options, std::span<const double> seed = {});

}  // namespace nozzleflow
