#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nozzleflow/elliptic.hpp"
#include "nozzleflow/farfield.hpp"
#include "nozzleflow/geometry.hpp"

namespace nozzleflow {

// Physical fields on the mesh nodes. rho, u, v come either from psi
// (recover_fields) or from a stored field file; everything else is derived
// from those samples.
struct FlowField {
  explicit FlowField(Mesh mesh_) : mesh(std::move(mesh_)) {}

  Mesh mesh;
  double m = 0.0;
  std::vector<double> psi, psi_x1, psi_x2;
  std::vector<double> rho, u, v;
  std::vector<double> mach_sq;
  std::vector<double> omega;   // v_x1 - u_x2 by differences of (u, v)
  std::vector<double> margin;  // |grad psi|^2 - Sigma^2(B(psi))
};

// rho = J(|grad psi|^2, B(psi)) untruncated, u = psi_x2/rho, v = -psi_x1/rho.
// Throws DomainError on sonic or supersonic nodes.
FlowField recover_fields(const StreamSolution& sol, const FarFieldStates& farfield);
FlowField recover_fields(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield);

// Builds a field from stored (psi, rho, u, v) samples.
FlowField field_from_samples(const Mesh& mesh, std::vector<double> psi, std::vector<double> rho,
                             std::vector<double> u, std::vector<double> v, const FarFieldStates& farfield);

// Field value at a physical point by bilinear interpolation in (xi, eta).
double sample_field(const Mesh& mesh, std::span<const double> values, double x1, double x2);

struct MassFluxReport {
  double max_err = 0.0;  // max relative deviation from m
  std::vector<double> x1;
  std::vector<double> flux;
};

// Trapezoid integral of rho u over every mesh column.
MassFluxReport mass_flux_error(const FlowField& field);

struct Streamline {
  std::vector<double> x1;
  std::vector<double> x2;
  double bernoulli_drift = 0.0;
  std::string failure;  // empty when the path reached the outflow end

  bool ok() const { return failure.empty(); }
  double exit_height() const { return x2.back(); }
};

// RK4 along dx2/dx1 = v/u from the seed to x1 = L - h_xi, step h_xi/4.
Streamline trace_streamline(const FlowField& field, const FarFieldStates& farfield, double x1, double x2);

// sup over interior nodes of |omega/rho + F F'(psi)|
double vorticity_residual(const FlowField& field, const FarFieldStates& farfield);

double subsonic_margin(const FlowField& field);
// Same quantity straight from psi (no density recovery), for sweeps.
double subsonic_margin(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield);

// sup |psi - far-field profile| on the columns nearest x1 = -L/2 and +L/2.
struct FarFieldDeviation {
  double minus = 0.0;
  double plus = 0.0;
  double x1_minus = 0.0;
  double x1_plus = 0.0;
};
FarFieldDeviation farfield_deviation(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield);

// Stream function of the infinite straight strip from the ODE
// (psi'/H)' = F F' H, psi(0) = 0, psi(1) = m, written as the first-order
// system psi' = rho w, w' = F F' rho with h(rho) + w^2/2 = B(psi), and solved
// by RK4 shooting on w(0) with bisection.
struct StripProfile {
  std::vector<double> x2;
  std::vector<double> psi;
  std::vector<double> slope;  // psi' = rho w
  double inflow_speed = 0.0;  // w(0)
  CubicHermite table;

  double operator()(double y) const { return table(y); }
};

StripProfile solve_1d_oracle(const FarFieldStates& farfield, int n);

struct DiagnosticOptions {
  int streamlines = 11;
  double psi_tol_rel = 1e-8;
  double mass_flux_tol = 1e-3;
  double bernoulli_tol = 1e-3;
};

struct DiagnosticReport {
  double mass_flux_max_err = 0.0;
  double bernoulli_max_drift = 0.0;
  double vorticity_sup_residual = 0.0;
  double subsonic_margin = 0.0;
  double farfield_dev_minus = 0.0;
  double farfield_dev_plus = 0.0;
  double psi_min = 0.0;
  double psi_max = 0.0;
  double min_u = 0.0;
  double min_psi_x2 = 0.0;
  double max_mach_sq = 0.0;
  bool truncation_active = false;
  bool euler_consistent = false;
  std::vector<std::string> violations;
};

DiagnosticReport diagnose(const FlowField& field, const FarFieldStates& farfield, bool truncation_active,
                          const DiagnosticOptions& options = {});

nlohmann::json to_json(const DiagnosticReport& report);

}  // namespace nozzleflow
