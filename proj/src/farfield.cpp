#include "nozzleflow/farfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nozzleflow/errors.hpp"
#include "nozzleflow/roots.hpp"

namespace nozzleflow {

namespace {

constexpr double kRootTol = 1e-12;

// Subsonic density window (rho_crit(B_max), rho_bar(B_min)).
std::pair<double, double> subsonic_window(const GasLaw& gas, const BernoulliProfile& bernoulli) {
  const double lo = critical_state(gas, bernoulli.max()).rho_crit;
  const double hi = max_density(gas, bernoulli.min());
  return {lo, hi};
}

}  // namespace

// ---------------------------------------------------------------- upstream

Upstream::Upstream(GasLaw gas, BernoulliProfile bernoulli, double m, double rho0)
    : gas_(gas), bernoulli_(std::move(bernoulli)), m_(m), rho0_(rho0), h0_(gas.enthalpy(rho0)) {}

double Upstream::speed(double x2) const {
  return std::sqrt(std::max(0.0, 2.0 * (bernoulli_(x2) - h0_)));
}

double Upstream::speed_derivative(double x2) const { return bernoulli_.derivative(x2) / speed(x2); }

double upstream_mass_flux(const GasLaw& gas, const BernoulliProfile& bernoulli, double rho0) {
  const double h0 = gas.enthalpy(rho0);
  return simpson(
      [&](double x2) { return rho0 * std::sqrt(std::max(0.0, 2.0 * (bernoulli(x2) - h0))); }, 0.0, 1.0,
      kFarFieldQuadratureIntervals);
}

double upstream_choking_limit(const GasLaw& gas, const BernoulliProfile& bernoulli) {
  return upstream_mass_flux(gas, bernoulli, subsonic_window(gas, bernoulli).first);
}

Upstream solve_upstream(const GasLaw& gas, const BernoulliProfile& bernoulli, double m) {
  if (!(m > 0.0)) throw DomainError("mass flux must be positive");
  if (gas.enthalpy_bounded_below() && !(bernoulli.min() > gas.B0())) {
    throw DomainError("Bernoulli profile must stay above B0");
  }
  const auto [lo, hi] = subsonic_window(gas, bernoulli);
  const double m_max = upstream_mass_flux(gas, bernoulli, lo);
  const double m_min = upstream_mass_flux(gas, bernoulli, hi);
  if (m > m_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "mass flux exceeds subsonic range: m = " << m << " > " << m_max;
    throw DomainError(msg.str());
  }
  if (m < m_min) {
    std::ostringstream msg;
    msg << "mass flux below assumed lower bound: m = " << m << " < " << m_min;
    throw DomainError(msg.str());
  }
  double rho0 = lo;
  if (m < m_max) {
    rho0 = bisect([&](double rho) { return upstream_mass_flux(gas, bernoulli, rho) - m; }, lo, hi,
                  {kRootTol, 200});
  }
  return Upstream(gas, bernoulli, m, rho0);
}

// -------------------------------------------------------------- downstream

double downstream_height(const Upstream& upstream, double rho1) {
  const GasLaw& gas = upstream.gas();
  const double h1 = gas.enthalpy(rho1);
  bool stagnant = false;
  const double value = simpson(
      [&](double s) {
        const double head = 2.0 * (upstream.bernoulli()(s) - h1);
        if (!(head > 0.0)) {
          stagnant = true;
          return 0.0;
        }
        return upstream.flux_density(s) / (rho1 * std::sqrt(head));
      },
      0.0, 1.0, kFarFieldQuadratureIntervals);
  return stagnant ? std::numeric_limits<double>::infinity() : value;
}

Downstream::Downstream(const Upstream& upstream, double rho1, double a, double b)
    : bernoulli_(upstream.bernoulli()),
      rho1_(rho1),
      h1_(upstream.gas().enthalpy(rho1)),
      a_(a),
      b_(b) {
  // dy/ds depends on s only, so classical RK4 reduces to Simpson per step.
  auto slope = [&](double s) { return upstream.flux_density(s) / (rho1_ * speed_at_upstream_height(s)); };
  const int n = kFlowMapSteps;
  const double h = 1.0 / n;
  std::vector<double> s(n + 1), y(n + 1), dy(n + 1);
  s[0] = 0.0;
  y[0] = a;
  dy[0] = slope(0.0);
  for (int k = 0; k < n; ++k) {
    const double s0 = k * h;
    const double k1 = dy[k];
    const double k23 = slope(s0 + 0.5 * h);
    const double k4 = slope(s0 + h);
    s[k + 1] = (k + 1) * h;
    y[k + 1] = y[k] + h / 6.0 * (k1 + 4.0 * k23 + k4);
    dy[k + 1] = k4;
  }
  s[n] = 1.0;
  end_error_ = std::abs(y[n] - b);
  if (end_error_ > 1e-6) {
    std::ostringstream msg;
    msg << "flow map integration error: y(1) = " << y[n] << " differs from b = " << b;
    throw SolverError(msg.str());
  }
  std::vector<double> inv_slope(n + 1);
  for (int k = 0; k <= n; ++k) inv_slope[k] = 1.0 / dy[k];
  ymap_ = CubicHermite(s, y, dy);
  inverse_ = CubicHermite(y, s, inv_slope);
}

double Downstream::speed_at_upstream_height(double s) const {
  return std::sqrt(std::max(0.0, 2.0 * (bernoulli_(s) - h1_)));
}

double Downstream::speed(double y) const { return speed_at_upstream_height(inverse_ymap(y)); }

Downstream solve_downstream(const Upstream& upstream, double a, double b) {
  if (!(b > a)) throw DomainError("downstream heights need b > a");
  const auto [lo, hi] = subsonic_window(upstream.gas(), upstream.bernoulli());
  const double width = b - a;
  auto g = [&](double rho) { return downstream_height(upstream, rho) - width; };
  if (g(lo) > 0.0) throw DomainError("downstream choking: widen b-a or reduce m");
  const double rho1 = bisect(g, lo, hi, {kRootTol, 200});
  return Downstream(upstream, rho1, a, b);
}

// ---------------------------------------------------------- stream profiles

StreamProfiles::StreamProfiles(const Upstream& upstream)
    : m_(upstream.mass_flux()),
      rho0_(upstream.density()),
      bernoulli_(upstream.bernoulli()),
      h0_(upstream.enthalpy()) {
  const int n = kStreamTableIntervals;
  auto flux_density = [&](double x2) { return upstream.flux_density(x2); };

  // psi(X2) on a uniform X2 grid.
  {
    const double h = 1.0 / n;
    std::vector<double> x(n + 1), p(n + 1), d(n + 1);
    x[0] = 0.0;
    p[0] = 0.0;
    d[0] = flux_density(0.0);
    for (int k = 0; k < n; ++k) {
      const double x0 = k * h;
      const double mid = flux_density(x0 + 0.5 * h);
      const double end = flux_density(x0 + h);
      x[k + 1] = (k + 1) * h;
      p[k + 1] = p[k] + h / 6.0 * (d[k] + 4.0 * mid + end);
      d[k + 1] = end;
    }
    x[n] = 1.0;
    flux_ = CubicHermite(std::move(x), std::move(p), std::move(d));
  }

  // kappa on a uniform psi grid: dX2/dpsi = 1/(rho0 u0(X2)).
  {
    const double h = m_ / n;
    auto rhs = [&](double x2) { return 1.0 / flux_density(std::clamp(x2, 0.0, 1.0)); };
    std::vector<double> psi(n + 1), x(n + 1), d(n + 1);
    psi[0] = 0.0;
    x[0] = 0.0;
    d[0] = rhs(0.0);
    for (int k = 0; k < n; ++k) {
      const double k1 = d[k];
      const double k2 = rhs(x[k] + 0.5 * h * k1);
      const double k3 = rhs(x[k] + 0.5 * h * k2);
      const double k4 = rhs(x[k] + h * k3);
      psi[k + 1] = (k + 1) * h;
      x[k + 1] = x[k] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      d[k + 1] = rhs(x[k + 1]);
    }
    psi[n] = m_;
    x[n] = 1.0;
    d[n] = rhs(1.0);
    kappa_ = CubicHermite(std::move(psi), std::move(x), std::move(d));
  }
}

double StreamProfiles::kappa(double psi) const {
  if (psi <= 0.0) return 0.0;
  if (psi >= m_) return 1.0;
  return kappa_(psi);
}

double StreamProfiles::F(double psi) const {
  return std::sqrt(std::max(0.0, 2.0 * (bernoulli_(kappa(psi)) - h0_)));
}

double StreamProfiles::Fprime(double psi) const {
  const double x2 = kappa(psi);
  const double u0_sq = 2.0 * (bernoulli_(x2) - h0_);
  // u0'/(rho0 u0) with u0' = B'/u0
  return bernoulli_.derivative(x2) / (rho0_ * u0_sq);
}

double StreamProfiles::vorticity_function(double psi) const { return rho0_ * F(psi) * Fprime(psi); }

double StreamProfiles::upstream_stream(double x2) const {
  if (x2 <= 0.0) return 0.0;
  if (x2 >= 1.0) return flux_.values().back();
  return flux_(x2);
}

StreamProfiles build_stream_profiles(const Upstream& upstream) { return StreamProfiles(upstream); }

// ------------------------------------------------------- extended profiles

ExtendedProfile::ExtendedProfile(std::shared_ptr<const StreamProfiles> profiles)
    : profiles_(std::move(profiles)), m_(profiles_->mass_flux()) {
  F0_ = profiles_->F(0.0);
  Fm_ = profiles_->F(m_);
  dF0_ = profiles_->Fprime(0.0);
  dFm_ = profiles_->Fprime(m_);
}

double ExtendedProfile::derivative(double s) const {
  if (s >= 0.0 && s <= m_) return profiles_->Fprime(s);
  if (s > m_ && s <= 2.0 * m_) return dFm_ * (2.0 * m_ - s) / m_;
  if (s < 0.0 && s >= -m_) return dF0_ * (s + m_) / m_;
  return 0.0;
}

double ExtendedProfile::value(double s) const {
  if (s >= 0.0 && s <= m_) return profiles_->F(s);
  if (s > m_) {
    const double t = std::min(s, 2.0 * m_);
    // int_m^t F'(m)(2m - r)/m dr
    return Fm_ + dFm_ / m_ * (2.0 * m_ * (t - m_) - 0.5 * (t * t - m_ * m_));
  }
  const double t = std::max(s, -m_);
  // int_0^t F'(0)(r + m)/m dr
  return F0_ + dF0_ / m_ * (0.5 * t * t + m_ * t);
}

ExtendedProfile extend_profiles(std::shared_ptr<const StreamProfiles> profiles) {
  return ExtendedProfile(std::move(profiles));
}

// ----------------------------------------------------------- far-field set

double FarFieldStates::stream_bernoulli(double psi) const {
  const double F = extended.value(psi);
  return upstream.enthalpy() + 0.5 * F * F;
}

double FarFieldStates::downstream_stream(double y) const {
  if (y <= downstream.a()) return 0.0;
  if (y >= downstream.b()) return profiles->upstream_stream(1.0);
  return profiles->upstream_stream(downstream.inverse_ymap(y));
}

FarFieldStates build_farfield(const GasLaw& gas, const BernoulliProfile& bernoulli, double m, double a,
                              double b) {
  Upstream up = solve_upstream(gas, bernoulli, m);
  Downstream down = solve_downstream(up, a, b);
  auto profiles = std::make_shared<const StreamProfiles>(up);
  ExtendedProfile ext(profiles);
  return FarFieldStates{gas, bernoulli, m, std::move(up), std::move(down), std::move(profiles), std::move(ext)};
}

// ------------------------------------------------------------ admissibility

AdmissibilityReport check_assumptions(const GasLaw& gas, const BernoulliProfile& bernoulli, double m,
                                      double a, double b) {
  AdmissibilityReport r;
  r.delta = bernoulli.delta();
  r.mass_flux_lower_bound = std::pow(r.delta, kMassFluxExponent);
  r.lower_sign_ok = bernoulli.lower_sign_ok();
  r.upper_sign_ok = bernoulli.upper_sign_ok();
  r.flat_at_walls = bernoulli.flat_at_walls();
  r.mass_flux_above_bound = m > r.mass_flux_lower_bound;
  if (!r.lower_sign_ok) r.warnings.push_back("B'(0) > 0 violates the lower-wall sign condition");
  if (!r.upper_sign_ok) r.warnings.push_back("B'(1) < 0 violates the upper-wall sign condition");
  if (!r.mass_flux_above_bound) {
    std::ostringstream msg;
    msg << "m = " << m << " is not above delta^(1/4) = " << r.mass_flux_lower_bound;
    r.warnings.push_back(msg.str());
  }
  if (!r.flat_at_walls) r.warnings.push_back("B'(0) = B'(1) = 0 does not hold (critical-flux condition)");

  r.bernoulli_above_B0 = !gas.enthalpy_bounded_below() || bernoulli.min() > gas.B0();
  if (!r.bernoulli_above_B0) {
    r.warnings.push_back("Bernoulli profile does not stay above B0");
    r.upstream_bracket_ok = r.downstream_bracket_ok = false;
    return r;
  }
  try {
    const Upstream up = solve_upstream(gas, bernoulli, m);
    try {
      (void)solve_downstream(up, a, b);
    } catch (const std::exception& e) {
      r.downstream_bracket_ok = false;
      r.warnings.push_back(std::string("downstream: ") + e.what());
    }
  } catch (const std::exception& e) {
    r.upstream_bracket_ok = false;
    r.downstream_bracket_ok = false;
    r.warnings.push_back(std::string("upstream: ") + e.what());
  }
  return r;
}

}  // namespace nozzleflow
