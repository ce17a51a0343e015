#pragma once

// Isentropic gas algebra: enthalpy, sound speed, the maximum and critical
// states for a Bernoulli constant s, the momentum function
// I(rho) = 2 rho^2 (s - h(rho)) and its subsonic inverse J.

namespace nozzleflow {

enum class GasKind { polytropic, isothermal };

class GasLaw {
 public:
  // p = A rho^gamma, h = A gamma/(gamma-1) rho^(gamma-1), h(0) = 0.
  static GasLaw polytropic(double A, double gamma);
  // p = c^2 rho, h = c^2 ln rho, h(1) = 0.
  static GasLaw isothermal(double c);

  GasKind kind() const { return kind_; }
  double A() const { return A_; }
  double gamma() const { return gamma_; }
  double c() const { return c_; }

  // Infimum of the enthalpy; isothermal gases have none.
  bool enthalpy_bounded_below() const { return kind_ == GasKind::polytropic; }
  double B0() const;

  double pressure(double rho) const;
  double enthalpy(double rho) const;
  double sound_speed_sq(double rho) const;  // p'(rho)
  double pressure_second_derivative(double rho) const;

 private:
  GasLaw(GasKind kind, double A, double gamma, double c) : kind_(kind), A_(A), gamma_(gamma), c_(c) {}

  GasKind kind_;
  double A_ = 0.0;
  double gamma_ = 0.0;
  double c_ = 0.0;
};

struct CriticalState {
  double s = 0.0;
  double rho_bar = 0.0;     // h(rho_bar) = s
  double rho_crit = 0.0;    // h + c^2/2 = s
  double gamma_crit = 0.0;  // critical speed, c(rho_crit)
  double sigma = 0.0;       // rho_crit * gamma_crit
};

// Solves h(rho) = s. Throws DomainError for s <= B0.
double max_density(const GasLaw& gas, double s);

CriticalState critical_state(const GasLaw& gas, double s);

// Closed-form d(Sigma)/ds from differentiating the critical-state relations.
double critical_flux_derivative(const GasLaw& gas, double s);

// I(rho) = 2 rho^2 (s - h(rho)). Throws DomainError for rho > rho_bar(s).
double momentum_sq(const GasLaw& gas, double rho, double s);

enum class BranchStatus { subsonic, sonic };

struct BranchDensity {
  double rho = 0.0;
  BranchStatus status = BranchStatus::subsonic;
};

// J(Msq, s): the root of I(rho) = Msq with rho in (rho_crit, rho_bar].
// Msq equal to Sigma^2 (to rounding) returns rho_crit flagged sonic;
// Msq above it or negative throws DomainError.
BranchDensity subsonic_density(const GasLaw& gas, double Msq, double s);
BranchDensity subsonic_density(const GasLaw& gas, double Msq, const CriticalState& state);

// Memo of the last critical state; repeated Bernoulli values (always the
// case for constant B) skip the root solves.
class CriticalStateCache {
 public:
  explicit CriticalStateCache(const GasLaw& gas) : gas_(gas) {}

  const CriticalState& at(double s) {
    if (!valid_ || s != state_.s) {
      state_ = critical_state(gas_, s);
      valid_ = true;
    }
    return state_;
  }

 private:
  const GasLaw& gas_;
  CriticalState state_;
  bool valid_ = false;
};

}  // namespace nozzleflow
