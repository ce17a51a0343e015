#include "nozzleflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nozzleflow/errors.hpp"

namespace nozzleflow {

namespace {

double sq(double x) { return x * x; }

}  // namespace

// ------------------------------------------------------------------ fields

FlowField field_from_samples(const Mesh& mesh, std::vector<double> psi, std::vector<double> rho,
                             std::vector<double> u, std::vector<double> v, const FarFieldStates& farfield) {
  const std::size_t n = mesh.size();
  if (psi.size() != n || rho.size() != n || u.size() != n || v.size() != n) {
    throw ConfigError("field samples do not match the mesh size");
  }
  FlowField f(mesh);
  f.m = farfield.m;
  NodalGradient g = nodal_gradient(mesh, psi);
  f.psi_x1 = std::move(g.dx1);
  f.psi_x2 = std::move(g.dx2);
  f.psi = std::move(psi);
  f.rho = std::move(rho);
  f.u = std::move(u);
  f.v = std::move(v);

  f.mach_sq.resize(n);
  f.margin.resize(n);
  CriticalStateCache cache(farfield.gas);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(f.rho[k] > 0.0)) throw DomainError("field: nonpositive density at node " + std::to_string(k));
    f.mach_sq[k] = (sq(f.u[k]) + sq(f.v[k])) / farfield.gas.sound_speed_sq(f.rho[k]);
    const CriticalState& st = cache.at(farfield.stream_bernoulli(f.psi[k]));
    f.margin[k] = sq(f.psi_x1[k]) + sq(f.psi_x2[k]) - sq(st.sigma);
  }
  const NodalGradient gu = nodal_gradient(mesh, f.u);
  const NodalGradient gv = nodal_gradient(mesh, f.v);
  f.omega.resize(n);
  for (std::size_t k = 0; k < n; ++k) f.omega[k] = gv.dx1[k] - gu.dx2[k];
  return f;
}

FlowField recover_fields(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield) {
  if (farfield.m > 0.0 && std::all_of(psi.begin(), psi.end(), [](double p) { return p == 0.0; })) {
    throw DomainError("stream function vanishes identically; stagnation everywhere is consistent only with m = 0");
  }
  const int n = mesh.size();
  const NodalGradient g = nodal_gradient(mesh, psi);
  std::vector<double> rho(n), u(n), v(n);
  struct Offender {
    int node;
    double excess;
  };
  std::vector<Offender> bad;
  CriticalStateCache cache(farfield.gas);
  for (int k = 0; k < n; ++k) {
    const double grad_sq = sq(g.dx1[k]) + sq(g.dx2[k]);
    const CriticalState& st = cache.at(farfield.stream_bernoulli(psi[k]));
    const double sigma_sq = sq(st.sigma);
    if (grad_sq >= sigma_sq) {
      bad.push_back({k, grad_sq - sigma_sq});
      continue;
    }
    const BranchDensity d = subsonic_density(farfield.gas, grad_sq, st);
    if (d.status == BranchStatus::sonic) {
      bad.push_back({k, grad_sq - sigma_sq});
      continue;
    }
    rho[k] = d.rho;
    u[k] = g.dx2[k] / d.rho;
    v[k] = -g.dx1[k] / d.rho;
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end(), [](const Offender& a, const Offender& b) { return a.excess > b.excess; });
    std::ostringstream msg;
    msg << "sonic/supersonic node(s): " << bad.size() << " nodes with |grad psi|^2 >= Sigma^2; worst:";
    for (std::size_t k = 0; k < std::min<std::size_t>(5, bad.size()); ++k) {
      const int i = bad[k].node / mesh.n_eta();
      const int j = bad[k].node % mesh.n_eta();
      msg << " (x1=" << mesh.x1(i) << ", x2=" << mesh.x2(i, j) << ", excess=" << bad[k].excess << ")";
    }
    throw DomainError(msg.str());
  }
  return field_from_samples(mesh, std::vector<double>(psi.begin(), psi.end()), std::move(rho), std::move(u),
                            std::move(v), farfield);
}

FlowField recover_fields(const StreamSolution& sol, const FarFieldStates& farfield) {
  return recover_fields(sol.mesh, sol.psi, farfield);
}

double sample_field(const Mesh& mesh, std::span<const double> values, double x1, double x2) {
  const double sx = std::clamp((x1 + mesh.L()) / mesh.h_xi(), 0.0, static_cast<double>(mesh.n_xi() - 1));
  const int i0 = std::min(static_cast<int>(sx), mesh.n_xi() - 2);
  const double tx = sx - i0;
  const NozzleGeometry& g = mesh.nozzle();
  const double eta = (x2 - g.lower(x1)) / g.width(x1);
  const double sy = std::clamp(eta / mesh.h_eta(), 0.0, static_cast<double>(mesh.n_eta() - 1));
  const int j0 = std::min(static_cast<int>(sy), mesh.n_eta() - 2);
  const double ty = sy - j0;
  return (1 - tx) * (1 - ty) * values[mesh.index(i0, j0)] + tx * (1 - ty) * values[mesh.index(i0 + 1, j0)] +
         (1 - tx) * ty * values[mesh.index(i0, j0 + 1)] + tx * ty * values[mesh.index(i0 + 1, j0 + 1)];
}

// ------------------------------------------------------------- diagnostics

MassFluxReport mass_flux_error(const FlowField& field) {
  const Mesh& mesh = field.mesh;
  MassFluxReport report;
  for (int i = 0; i < mesh.n_xi(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < mesh.n_eta(); ++j) {
      const int k = mesh.index(i, j);
      const double w = (j == 0 || j == mesh.n_eta() - 1) ? 0.5 : 1.0;
      sum += w * field.rho[k] * field.u[k];
    }
    const double flux = sum * mesh.h_eta() * mesh.width(i);
    report.x1.push_back(mesh.x1(i));
    report.flux.push_back(flux);
    report.max_err = std::max(report.max_err, std::abs(flux - field.m) / field.m);
  }
  return report;
}

Streamline trace_streamline(const FlowField& field, const FarFieldStates& farfield, double x1, double x2) {
  const Mesh& mesh = field.mesh;
  const NozzleGeometry& g = mesh.nozzle();
  Streamline line;
  line.x1.push_back(x1);
  line.x2.push_back(x2);

  std::vector<double> bernoulli(mesh.size());
  for (int k = 0; k < mesh.size(); ++k) {
    bernoulli[k] = farfield.gas.enthalpy(field.rho[k]) + 0.5 * (sq(field.u[k]) + sq(field.v[k]));
  }
  const double target = farfield.stream_bernoulli(sample_field(mesh, field.psi, x1, x2));

  auto inside = [&](double a, double b) {
    const double eta = (b - g.lower(a)) / g.width(a);
    return eta >= -1e-9 && eta <= 1.0 + 1e-9;
  };
  auto slope = [&](double a, double b, double& out) {
    const double uu = sample_field(mesh, field.u, a, b);
    if (!(uu > 0.0)) return false;
    out = sample_field(mesh, field.v, a, b) / uu;
    return true;
  };
  if (!inside(x1, x2)) {
    line.failure = "seed outside the nozzle";
    return line;
  }
  const double end = mesh.L() - mesh.h_xi();
  const int steps = std::max(1, static_cast<int>(std::ceil((end - x1) / (0.25 * mesh.h_xi()))));
  const double dx = (end - x1) / steps;
  double a = x1, b = x2;
  line.bernoulli_drift = std::abs(sample_field(mesh, bernoulli, a, b) - target);
  for (int s = 0; s < steps; ++s) {
    double k1, k2, k3, k4;
    if (!slope(a, b, k1) || !slope(a + 0.5 * dx, b + 0.5 * dx * k1, k2) ||
        !slope(a + 0.5 * dx, b + 0.5 * dx * k2, k3) || !slope(a + dx, b + dx * k3, k4)) {
      line.failure = "stagnation (u <= 0) on the path near x1 = " + std::to_string(a);
      return line;
    }
    b += dx * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    a = x1 + (s + 1) * dx;
    line.x1.push_back(a);
    line.x2.push_back(b);
    if (!inside(a, b)) {
      line.failure = "streamline exits through a wall near x1 = " + std::to_string(a);
      return line;
    }
    line.bernoulli_drift = std::max(line.bernoulli_drift, std::abs(sample_field(mesh, bernoulli, a, b) - target));
  }
  return line;
}

double vorticity_residual(const FlowField& field, const FarFieldStates& farfield) {
  const Mesh& mesh = field.mesh;
  double worst = 0.0;
  for (int i = 1; i + 1 < mesh.n_xi(); ++i) {
    for (int j = 1; j + 1 < mesh.n_eta(); ++j) {
      const int k = mesh.index(i, j);
      const double p = field.psi[k];
      const double FFp = farfield.extended.value(p) * farfield.extended.derivative(p);
      worst = std::max(worst, std::abs(field.omega[k] / field.rho[k] + FFp));
    }
  }
  return worst;
}

double subsonic_margin(const FlowField& field) {
  return *std::max_element(field.margin.begin(), field.margin.end());
}

double subsonic_margin(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield) {
  const NodalGradient g = nodal_gradient(mesh, psi);
  CriticalStateCache cache(farfield.gas);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.size(); ++k) {
    const CriticalState& st = cache.at(farfield.stream_bernoulli(psi[k]));
    worst = std::max(worst, sq(g.dx1[k]) + sq(g.dx2[k]) - sq(st.sigma));
  }
  return worst;
}

FarFieldDeviation farfield_deviation(const Mesh& mesh, std::span<const double> psi, const FarFieldStates& farfield) {
  FarFieldDeviation dev;
  const int last = mesh.n_xi() - 1;
  const int i_minus = static_cast<int>(std::lround(0.25 * last));
  const int i_plus = static_cast<int>(std::lround(0.75 * last));
  dev.x1_minus = mesh.x1(i_minus);
  dev.x1_plus = mesh.x1(i_plus);
  for (int j = 0; j < mesh.n_eta(); ++j) {
    const double y_minus = std::clamp(mesh.x2(i_minus, j), 0.0, 1.0);
    dev.minus = std::max(dev.minus, std::abs(psi[mesh.index(i_minus, j)] - farfield.upstream_stream(y_minus)));
    dev.plus = std::max(dev.plus,
                        std::abs(psi[mesh.index(i_plus, j)] - farfield.downstream_stream(mesh.x2(i_plus, j))));
  }
  return dev;
}

// -------------------------------------------------------------- 1-D oracle

StripProfile solve_1d_oracle(const FarFieldStates& farfield, int n) {
  if (n < 2) throw ConfigError("1-D oracle needs at least two steps");
  const GasLaw& gas = farfield.gas;
  const double h0 = farfield.upstream.enthalpy();
  const double m = farfield.m;
  const double dx = 1.0 / n;

  // (psi, w) -> (psi', w'); false once the state leaves the subsonic branch.
  auto rhs = [&](double psi, double w, double& dpsi, double& dw) {
    const double F = farfield.extended.value(psi);
    const double e = h0 + 0.5 * F * F - 0.5 * w * w;
    if (gas.enthalpy_bounded_below() && !(e > gas.B0())) return false;
    const double rho = max_density(gas, e);
    if (w * w >= gas.sound_speed_sq(rho)) return false;
    dpsi = rho * w;
    dw = F * farfield.extended.derivative(psi) * rho;
    return true;
  };
  auto shoot = [&](double w0, StripProfile* out) {
    double psi = 0.0, w = w0;
    if (out) {
      out->x2.assign(1, 0.0);
      out->psi.assign(1, 0.0);
      out->slope.clear();
    }
    for (int k = 0; k < n; ++k) {
      double p1, w1, p2, w2, p3, w3, p4, w4;
      if (!rhs(psi, w, p1, w1)) return std::numeric_limits<double>::infinity();
      if (out && k == 0) out->slope.push_back(p1);
      if (!rhs(psi + 0.5 * dx * p1, w + 0.5 * dx * w1, p2, w2)) return std::numeric_limits<double>::infinity();
      if (!rhs(psi + 0.5 * dx * p2, w + 0.5 * dx * w2, p3, w3)) return std::numeric_limits<double>::infinity();
      if (!rhs(psi + dx * p3, w + dx * w3, p4, w4)) return std::numeric_limits<double>::infinity();
      psi += dx * (p1 + 2 * p2 + 2 * p3 + p4) / 6.0;
      w += dx * (w1 + 2 * w2 + 2 * w3 + w4) / 6.0;
      if (out) {
        double sp, sw;
        if (!rhs(psi, w, sp, sw)) return std::numeric_limits<double>::infinity();
        out->x2.push_back((k + 1) * dx);
        out->psi.push_back(psi);
        out->slope.push_back(sp);
      }
    }
    return psi;
  };

  const CriticalState st = critical_state(gas, farfield.stream_bernoulli(0.0));
  double lo = 0.0;
  double hi = st.gamma_crit;
  if (!(shoot(lo, nullptr) < m)) throw SolverError("1-D oracle: shooting bracket failure (no subsonic profile)");
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(mid, nullptr) > m) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  StripProfile profile;
  profile.inflow_speed = 0.5 * (lo + hi);
  const double end = shoot(profile.inflow_speed, &profile);
  if (!std::isfinite(end) || std::abs(end - m) > 1e-9 * m) {
    throw SolverError("1-D oracle: shooting bracket failure; configuration outside the subsonic range");
  }
  profile.table = CubicHermite(profile.x2, profile.psi, profile.slope);
  return profile;
}

// ---------------------------------------------------------------- summary

DiagnosticReport diagnose(const FlowField& field, const FarFieldStates& farfield, bool truncation_active,
                          const DiagnosticOptions& options) {
  const Mesh& mesh = field.mesh;
  DiagnosticReport r;
  r.truncation_active = truncation_active;
  r.mass_flux_max_err = mass_flux_error(field).max_err;

  const double seed_x1 = -mesh.L() + mesh.h_xi();
  const NozzleGeometry& g = mesh.nozzle();
  for (int k = 1; k <= options.streamlines; ++k) {
    const double eta = static_cast<double>(k) / (options.streamlines + 1);
    const Streamline line = trace_streamline(field, farfield, seed_x1, g.lower(seed_x1) + eta * g.width(seed_x1));
    r.bernoulli_max_drift = std::max(r.bernoulli_max_drift, line.bernoulli_drift);
    if (!line.ok()) r.violations.push_back("streamline " + std::to_string(k) + ": " + line.failure);
  }

  r.vorticity_sup_residual = vorticity_residual(field, farfield);
  r.subsonic_margin = subsonic_margin(field);
  const FarFieldDeviation dev = farfield_deviation(mesh, field.psi, farfield);
  r.farfield_dev_minus = dev.minus;
  r.farfield_dev_plus = dev.plus;
  r.psi_min = *std::min_element(field.psi.begin(), field.psi.end());
  r.psi_max = *std::max_element(field.psi.begin(), field.psi.end());
  r.min_u = *std::min_element(field.u.begin(), field.u.end());
  r.min_psi_x2 = *std::min_element(field.psi_x2.begin(), field.psi_x2.end());
  r.max_mach_sq = *std::max_element(field.mach_sq.begin(), field.mach_sq.end());

  const double m = field.m;
  if (truncation_active) r.violations.push_back("cutoff active: solution of the modified problem only");
  if (r.psi_min < -options.psi_tol_rel * m || r.psi_max > m * (1.0 + options.psi_tol_rel)) {
    r.violations.push_back("psi leaves [0, m]");
  }
  if (!(r.min_u > 0.0)) r.violations.push_back("horizontal velocity not positive");
  if (!(r.min_psi_x2 > 0.0)) r.violations.push_back("psi_x2 not positive");
  if (!(r.subsonic_margin < 0.0)) r.violations.push_back("subsonic margin not negative");
  if (r.mass_flux_max_err > options.mass_flux_tol) r.violations.push_back("mass flux deviation above tolerance");
  if (r.bernoulli_max_drift > options.bernoulli_tol) r.violations.push_back("Bernoulli drift above tolerance");
  r.euler_consistent = r.violations.empty();
  return r;
}

nlohmann::json to_json(const DiagnosticReport& r) {
  return {
      {"mass_flux_max_err", r.mass_flux_max_err},
      {"bernoulli_max_drift", r.bernoulli_max_drift},
      {"vorticity_sup_residual", r.vorticity_sup_residual},
      {"subsonic_margin", r.subsonic_margin},
      {"farfield_dev_minus", r.farfield_dev_minus},
      {"farfield_dev_plus", r.farfield_dev_plus},
      {"psi_min", r.psi_min},
      {"psi_max", r.psi_max},
      {"min_u", r.min_u},
      {"min_psi_x2", r.min_psi_x2},
      {"max_mach_sq", r.max_mach_sq},
      {"truncation_active", r.truncation_active},
      {"euler_consistent", r.euler_consistent},
      {"violations", r.violations},
  };
}

}  // namespace nozzleflow
