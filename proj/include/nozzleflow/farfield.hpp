#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nozzleflow/bernoulli.hpp"
#include "nozzleflow/gas.hpp"
#include "nozzleflow/interp.hpp"

namespace nozzleflow {

// Nodes used for every x2-integral of the far-field construction.
inline constexpr int kFarFieldQuadratureIntervals = 1000;
// Steps of the flow-map integration and knots of the stream tables.
inline constexpr int kFlowMapSteps = 2000;
inline constexpr int kStreamTableIntervals = 4096;
// Exponent of the advisory lower bound m > delta^gamma.
inline constexpr double kMassFluxExponent = 0.25;

// Uniform upstream state: constant density rho0 and horizontal speed
// u0(x2) = sqrt(2 (B(x2) - h(rho0))).
class Upstream {
 public:
  Upstream(GasLaw gas, BernoulliProfile bernoulli, double m, double rho0);

  double mass_flux() const { return m_; }
  double density() const { return rho0_; }
  double enthalpy() const { return h0_; }
  const GasLaw& gas() const { return gas_; }
  const BernoulliProfile& bernoulli() const { return bernoulli_; }

  double speed(double x2) const;
  // u0' = B'/u0, from differentiating the upstream Bernoulli relation.
  double speed_derivative(double x2) const;
  double flux_density(double x2) const { return rho0_ * speed(x2); }

 private:
  GasLaw gas_;
  BernoulliProfile bernoulli_;
  double m_;
  double rho0_;
  double h0_;
};

// Mass flux carried by a uniform upstream density rho0 under profile B.
double upstream_mass_flux(const GasLaw& gas, const BernoulliProfile& bernoulli, double rho0);

// Largest mass flux with a subsonic upstream state (rho0 at the lower end of
// the subsonic window).
double upstream_choking_limit(const GasLaw& gas, const BernoulliProfile& bernoulli);

Upstream solve_upstream(const GasLaw& gas, const BernoulliProfile& bernoulli, double m);

// Downstream state: density rho1, the flow map y(s) taking the upstream
// streamline height s to its downstream height, and u1 on [a, b].
class Downstream {
 public:
  Downstream(const Upstream& upstream, double rho1, double a, double b);

  double density() const { return rho1_; }
  double enthalpy() const { return h1_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double ymap(double s) const { return ymap_(s); }
  double ymap_derivative(double s) const { return ymap_.derivative(s); }
  double inverse_ymap(double y) const { return inverse_(y); }
  // |ymap(1) - b| before any correction
  double end_error() const { return end_error_; }

  // u1 along the downstream section, u1(y(s)) from Bernoulli conservation.
  double speed(double y) const;
  double speed_at_upstream_height(double s) const;

 private:
  BernoulliProfile bernoulli_;
  double rho1_;
  double h1_;
  double a_;
  double b_;
  CubicHermite ymap_;
  CubicHermite inverse_;
  double end_error_ = 0.0;
};

// Height integral of the downstream flow map for a trial rho1.
double downstream_height(const Upstream& upstream, double rho1);

Downstream solve_downstream(const Upstream& upstream, double a, double b);

// Stream-coordinate functions on [0, m]: kappa inverts
// psi(X2) = int_0^X2 rho0 u0, F = u0(kappa), F' = u0'(kappa)/(rho0 u0(kappa)).
class StreamProfiles {
 public:
  explicit StreamProfiles(const Upstream& upstream);

  double mass_flux() const { return m_; }
  double kappa(double psi) const;
  double F(double psi) const;
  double Fprime(double psi) const;
  // f = rho0 F F' (= u0'(kappa))
  double vorticity_function(double psi) const;
  // int_0^x2 rho0 u0, the upstream stream-function profile.
  double upstream_stream(double x2) const;

  const CubicHermite& kappa_table() const { return kappa_; }

 private:
  double m_;
  double rho0_;
  BernoulliProfile bernoulli_;
  double h0_;
  CubicHermite kappa_;
  CubicHermite flux_;
};

StreamProfiles build_stream_profiles(const Upstream& upstream);

// C^{1,1} extension of F to the whole line: F~' is F' on [0, m], tapers
// linearly to zero on [m, 2m] and [-m, 0], and vanishes outside.
class ExtendedProfile {
 public:
  explicit ExtendedProfile(std::shared_ptr<const StreamProfiles> profiles);

  double value(double s) const;
  double derivative(double s) const;

 private:
  std::shared_ptr<const StreamProfiles> profiles_;
  double m_;
  double F0_, Fm_, dF0_, dFm_;
};

ExtendedProfile extend_profiles(std::shared_ptr<const StreamProfiles> profiles);

struct FarFieldStates {
  GasLaw gas;
  BernoulliProfile bernoulli;
  double m;
  Upstream upstream;
  Downstream downstream;
  std::shared_ptr<const StreamProfiles> profiles;
  ExtendedProfile extended;

  // B~(psi) = h(rho0) + F~(psi)^2/2
  double stream_bernoulli(double psi) const;
  double upstream_stream(double x2) const { return profiles->upstream_stream(x2); }
  // int_a^y rho1 u1, equal to the upstream profile at the preimage height.
  double downstream_stream(double y) const;
};

FarFieldStates build_farfield(const GasLaw& gas, const BernoulliProfile& bernoulli, double m,
                              double a, double b);

struct AdmissibilityReport {
  double delta = 0.0;
  double mass_flux_lower_bound = 0.0;  // delta^(1/4)
  bool lower_sign_ok = true;           // B'(0) <= 0
  bool upper_sign_ok = true;           // B'(1) >= 0
  bool mass_flux_above_bound = true;
  bool bernoulli_above_B0 = true;
  bool upstream_bracket_ok = true;
  bool downstream_bracket_ok = true;
  bool flat_at_walls = true;           // B'(0) = B'(1) = 0
  std::vector<std::string> warnings;

  bool all_pass() const {
    return lower_sign_ok && upper_sign_ok && mass_flux_above_bound && bernoulli_above_B0 &&
           upstream_bracket_ok && downstream_bracket_ok;
  }
};

// Advisory only; never throws for admissible argument types.
AdmissibilityReport check_assumptions(const GasLaw& gas, const BernoulliProfile& bernoulli, double m,
                                      double a = 0.0, double b = 1.0);

}  // namespace nozzleflow
