#include "nozzleflow/gas.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nozzleflow/errors.hpp"
#include "nozzleflow/roots.hpp"

namespace nozzleflow {

namespace {

void require_positive_density(double rho, const char* what) {
  if (!(rho > 0.0)) throw DomainError(std::string(what) + ": density must be positive");
}

void require_above_B0(const GasLaw& gas, double s) {
  if (gas.enthalpy_bounded_below() && !(s > gas.B0())) {
    throw DomainError("Bernoulli constant must exceed B0 = " + std::to_string(gas.B0()));
  }
  if (!std::isfinite(s)) throw DomainError("Bernoulli constant must be finite");
}

// Positive interval around the solution of an increasing g.
std::pair<double, double> density_bracket(const std::function<double(double)>& g) {
  return expand_positive_bracket(g, 0.5, 2.0, 1100);
}

}  // namespace

GasLaw GasLaw::polytropic(double A, double gamma) {
  if (!(A > 0.0)) throw ConfigError("polytropic gas: A must be positive");
  if (!(gamma > 1.0)) throw ConfigError("polytropic gas: gamma must exceed 1");
  return GasLaw(GasKind::polytropic, A, gamma, 0.0);
}

GasLaw GasLaw::isothermal(double c) {
  if (!(c > 0.0)) throw ConfigError("isothermal gas: sound speed must be positive");
  return GasLaw(GasKind::isothermal, 0.0, 0.0, c);
}

double GasLaw::B0() const {
  return kind_ == GasKind::polytropic ? 0.0 : -std::numeric_limits<double>::infinity();
}

double GasLaw::pressure(double rho) const {
  if (kind_ == GasKind::polytropic) {
    if (rho < 0.0) throw DomainError("pressure: negative density");
    return A_ * std::pow(rho, gamma_);
  }
  require_positive_density(rho, "pressure");
  return c_ * c_ * rho;
}

double GasLaw::enthalpy(double rho) const {
  if (kind_ == GasKind::polytropic) {
    if (rho < 0.0) throw DomainError("enthalpy: negative density");
    return A_ * gamma_ / (gamma_ - 1.0) * std::pow(rho, gamma_ - 1.0);
  }
  require_positive_density(rho, "enthalpy");
  return c_ * c_ * std::log(rho);
}

double GasLaw::sound_speed_sq(double rho) const {
  require_positive_density(rho, "sound_speed_sq");
  if (kind_ == GasKind::polytropic) return A_ * gamma_ * std::pow(rho, gamma_ - 1.0);
  return c_ * c_;
}

double GasLaw::pressure_second_derivative(double rho) const {
  require_positive_density(rho, "pressure_second_derivative");
  if (kind_ == GasKind::polytropic) return A_ * gamma_ * (gamma_ - 1.0) * std::pow(rho, gamma_ - 2.0);
  return 0.0;
}

double max_density(const GasLaw& gas, double s) {
  require_above_B0(gas, s);
  auto g = [&](double rho) { return gas.enthalpy(rho) - s; };
  auto [lo, hi] = density_bracket(g);
  auto g_dg = [&](double rho) {
    return std::make_pair(gas.enthalpy(rho) - s, gas.sound_speed_sq(rho) / rho);
  };
  return safeguarded_newton(g_dg, lo, hi, 0.5 * (lo + hi));
}

CriticalState critical_state(const GasLaw& gas, double s) {
  CriticalState state;
  state.s = s;
  state.rho_bar = max_density(gas, s);
  auto g = [&](double rho) { return gas.enthalpy(rho) + 0.5 * gas.sound_speed_sq(rho) - s; };
  auto g_dg = [&](double rho) {
    return std::make_pair(g(rho), gas.sound_speed_sq(rho) / rho + 0.5 * gas.pressure_second_derivative(rho));
  };
  // g(rho_bar) = c^2/2 > 0; walk down for the negative end.
  double lo = 0.5 * state.rho_bar;
  for (int k = 0; k < 1100 && !(g(lo) < 0.0); ++k) lo *= 0.5;
  if (!(g(lo) < 0.0)) throw SolverError("critical_state: cannot bracket critical density");
  state.rho_crit = safeguarded_newton(g_dg, lo, state.rho_bar, 0.5 * (lo + state.rho_bar));
  state.gamma_crit = std::sqrt(gas.sound_speed_sq(state.rho_crit));
  state.sigma = state.rho_crit * std::sqrt(2.0 * (s - gas.enthalpy(state.rho_crit)));
  return state;
}

double critical_flux_derivative(const GasLaw& gas, double s) {
  const CriticalState st = critical_state(gas, s);
  const double rho = st.rho_crit;
  const double dp = gas.sound_speed_sq(rho);
  const double ddp = gas.pressure_second_derivative(rho);
  const double q = std::sqrt(2.0 * (s - gas.enthalpy(rho)));
  return q / (dp / rho + 0.5 * ddp) + rho * (1.0 - 2.0 * dp / (2.0 * dp + rho * ddp)) / q;
}

double momentum_sq(const GasLaw& gas, double rho, double s) {
  require_above_B0(gas, s);
  require_positive_density(rho, "momentum_sq");
  const double head = s - gas.enthalpy(rho);
  if (head < 0.0) {
    const double rho_bar = max_density(gas, s);
    // Rounding at rho == rho_bar can push the head slightly negative.
    if (rho <= rho_bar * (1.0 + 1e-14)) return 0.0;
    throw DomainError("momentum_sq: density exceeds the stagnation density for this Bernoulli constant");
  }
  return 2.0 * rho * rho * head;
}

BranchDensity subsonic_density(const GasLaw& gas, double Msq, double s) {
  require_above_B0(gas, s);
  return subsonic_density(gas, Msq, critical_state(gas, s));
}

BranchDensity subsonic_density(const GasLaw& gas, double Msq, const CriticalState& state) {
  const double sigma_sq = state.sigma * state.sigma;
  if (!(Msq >= 0.0)) throw DomainError("subsonic_density: squared momentum must be nonnegative");
  if (Msq > sigma_sq * (1.0 + 1e-12)) {
    throw DomainError("subsonic_density: squared momentum exceeds Sigma^2 (supersonic)");
  }
  if (Msq >= sigma_sq) return {state.rho_crit, BranchStatus::sonic};
  if (Msq == 0.0) return {state.rho_bar, BranchStatus::subsonic};
  const double s = state.s;
  // I is decreasing on (rho_crit, rho_bar]; root of I - Msq.
  auto g_dg = [&](double rho) {
    const double head = s - gas.enthalpy(rho);
    const double I = 2.0 * rho * rho * head;
    const double dI = 4.0 * rho * (head - 0.5 * gas.sound_speed_sq(rho));
    return std::make_pair(I - Msq, dI);
  };
  if (g_dg(state.rho_crit).first <= 0.0) return {state.rho_crit, BranchStatus::sonic};
  // Start from the stagnation side, where I is well conditioned.
  const double guess = state.rho_bar - (state.rho_bar - state.rho_crit) * Msq / sigma_sq;
  const double rho = safeguarded_newton(g_dg, state.rho_crit, state.rho_bar, guess);
  return {rho, BranchStatus::subsonic};
}

}  // namespace nozzleflow
