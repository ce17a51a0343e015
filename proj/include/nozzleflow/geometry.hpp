#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nozzleflow/interp.hpp"

namespace nozzleflow {

struct FarFieldStates;

// One nozzle wall x2 = f(x1) with first and second derivatives.
class WallProfile {
 public:
  enum class Kind { constant, tanh_step, gaussian_bump, tabulated };

  static WallProfile constant(double height);
  // from + (to - from) (1 + tanh(k (x - center)))/2
  static WallProfile tanh_step(double from, double to, double center, double steepness);
  // base + amplitude exp(-(x/width)^2)
  static WallProfile gaussian_bump(double base, double amplitude, double width);
  // natural cubic spline, constant beyond the table ends
  static WallProfile tabulated(std::vector<double> x1, std::vector<double> height);

  double operator()(double x1) const;
  double slope(double x1) const;
  double curvature(double x1) const;  // second derivative

  double upstream_limit() const;
  double downstream_limit() const;
  Kind kind() const { return kind_; }
  // Interval outside which the wall is (numerically) at its limits.
  std::pair<double, double> transition_extent() const;

 private:
  Kind kind_ = Kind::constant;
  double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
  NaturalCubicSpline spline_;
};

struct StraightSpec {};

struct TanhTransitionSpec {
  double center = 0.0;
  double steepness = 1.0;
  double lower_from = 0.0, lower_to = 0.0;
  double upper_from = 1.0, upper_to = 2.0;
};

struct BumpSpec {
  enum class Wall { lower, upper };
  double amplitude = -0.1;
  double width = 1.0;
  Wall wall = Wall::lower;
};

struct TabulatedSpec {
  std::vector<double> lower_x1, lower_height;
  std::vector<double> upper_x1, upper_height;
};

using NozzleSpec = std::variant<StraightSpec, TanhTransitionSpec, BumpSpec, TabulatedSpec>;

enum class NozzleFamily { straight, tanh_transition, bump, tabulated };
std::string to_string(NozzleFamily family);

// Walls f1 < f2 with f1 -> 0, f2 -> 1 upstream and f1 -> a, f2 -> b downstream.
struct NozzleGeometry {
  NozzleFamily family = NozzleFamily::straight;
  WallProfile lower = WallProfile::constant(0.0);
  WallProfile upper = WallProfile::constant(1.0);
  double a = 0.0;
  double b = 1.0;

  double width(double x1) const { return upper(x1) - lower(x1); }
};

// Throws ConfigError on invalid parameters or f2 <= f1 anywhere on the scan.
NozzleGeometry build_nozzle(const NozzleSpec& spec);

struct TruncatedDomain {
  NozzleGeometry nozzle;
  double L = 8.0;
};

TruncatedDomain truncate(const NozzleGeometry& nozzle, double L);

// Single-block wall-fitted mesh: node (i, j) sits at
// (xi_i, f1(xi_i) + eta_j (f2(xi_i) - f1(xi_i))), xi uniform on [-L, L],
// eta uniform on [0, 1]. Nodes are numbered i * n_eta + j.
class Mesh {
 public:
  Mesh(TruncatedDomain domain, int n_xi, int n_eta);

  int n_xi() const { return n_xi_; }
  int n_eta() const { return n_eta_; }
  int size() const { return n_xi_ * n_eta_; }
  int index(int i, int j) const { return i * n_eta_ + j; }
  double L() const { return domain_.L; }
  double h_xi() const { return 2.0 * domain_.L / (n_xi_ - 1); }
  double h_eta() const { return 1.0 / (n_eta_ - 1); }

  double xi(int i) const { return -domain_.L + (2.0 * domain_.L * i) / (n_xi_ - 1); }
  double eta(int j) const { return static_cast<double>(j) / (n_eta_ - 1); }
  double x1(int i) const { return x1_[i]; }
  double x2(int i, int j) const { return lower_[i] + eta(j) * width_[i]; }

  double lower(int i) const { return lower_[i]; }
  double width(int i) const { return width_[i]; }
  double lower_slope(int i) const { return dlower_[i]; }
  double width_slope(int i) const { return dwidth_[i]; }

  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == n_xi_ - 1 || j == n_eta_ - 1; }
  const NozzleGeometry& nozzle() const { return domain_.nozzle; }
  const TruncatedDomain& domain() const { return domain_; }

  // Smallest corner Jacobian over all cells.
  double min_jacobian() const;

 private:
  TruncatedDomain domain_;
  int n_xi_;
  int n_eta_;
  std::vector<double> x1_, lower_, width_, dlower_, dwidth_;
};

Mesh generate_mesh(const TruncatedDomain& domain, int n_xi, int n_eta);

enum class BoundaryMode { linear, farfield_profile };

// Dirichlet data on every boundary node. Interior entries hold the seed
// eta * m so the vector doubles as a Picard starting iterate.
// linear mode puts psi = eta m on the end sections; farfield_profile mode
// uses the far-field stream profiles there and needs the far-field states.
std::vector<double> boundary_values(const Mesh& mesh, double m, BoundaryMode mode,
                                    const FarFieldStates* farfield = nullptr);

// Physical gradient of a nodal field by second-order differences in (xi, eta)
// with exact metric terms; one-sided second order on the boundary.
struct NodalGradient {
  std::vector<double> dx1;
  std::vector<double> dx2;
};
NodalGradient nodal_gradient(const Mesh& mesh, std::span<const double> field);

// Transfers a nodal field to another mesh of the same nozzle by linear
// interpolation in (xi, eta); nodes beyond the old range take the end column.
std::vector<double> resample(const Mesh& from, std::span<const double> field, const Mesh& to);

}  // namespace nozzleflow
