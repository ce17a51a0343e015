#include "nozzleflow/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nozzleflow/errors.hpp"
#include "nozzleflow/flow.hpp"

namespace nozzleflow {

namespace {

// Accepted solution kept for warm starts, resampled to the L0 mesh.
struct WarmStart {
  double m = 0.0;
  std::vector<double> psi;
};

MarginSample run_sample(const CriticalSetup& setup, double m, double eps_accept, WarmStart& warm) {
  MarginSample sample;
  sample.m = m;
  sample.margin = std::numeric_limits<double>::quiet_NaN();
  try {
    const FarFieldStates ff = build_farfield(setup.gas, setup.bernoulli, m, setup.nozzle.a, setup.nozzle.b);
    ContinuationOptions options = setup.solver;
    options.eps0 = 0.5 * eps_accept;
    std::vector<double> seed;
    if (options.warm_start && !warm.psi.empty()) {
      seed = warm.psi;
      for (double& p : seed) p *= m / warm.m;
    }
    const ContinuationResult res = continuation_solve(setup.nozzle, ff, options, seed);
    const StreamSolution& sol = res.solution;
    sample.converged = sol.converged;
    sample.truncation_active = sol.any_truncation();
    sample.margin = subsonic_margin(sol.mesh, sol.psi, ff);
    sample.accepted = sample.converged && !sample.truncation_active && sample.margin < -eps_accept;
    if (!sample.converged) sample.failure = "Picard iteration did not converge";
    if (sample.accepted) {
      const Mesh base = generate_mesh(truncate(setup.nozzle, options.L0), options.n_xi, options.n_eta);
      warm.m = m;
      warm.psi = resample(sol.mesh, sol.psi, base);
    }
  } catch (const DomainError& e) {
    sample.failure = e.what();
  } catch (const SolverError& e) {
    sample.failure = e.what();
  }
  return sample;
}

void sort_samples(MarginCurve& curve) {
  std::stable_sort(curve.samples.begin(), curve.samples.end(),
                   [](const MarginSample& a, const MarginSample& b) { return a.m < b.m; });
}

}  // namespace

double acceptance_margin(const GasLaw& gas, const BernoulliProfile& bernoulli) {
  const CriticalState st = critical_state(gas, bernoulli.min());
  return 1e-3 * st.sigma * st.sigma;
}

MarginCurve margin_curve(const CriticalSetup& setup, std::span<const double> m_values) {
  for (std::size_t k = 0; k < m_values.size(); ++k) {
    if (!(m_values[k] > 0.0) || (k > 0 && !(m_values[k] > m_values[k - 1]))) {
      throw ConfigError("margin curve: mass fluxes must be positive and increasing");
    }
  }
  MarginCurve curve;
  curve.eps_accept = acceptance_margin(setup.gas, setup.bernoulli);
  WarmStart warm;
  for (double m : m_values) curve.samples.push_back(run_sample(setup, m, curve.eps_accept, warm));
  curve.m_lo = std::numeric_limits<double>::quiet_NaN();
  curve.m_hi = std::numeric_limits<double>::quiet_NaN();
  for (const MarginSample& s : curve.samples) {
    if (s.accepted) curve.m_lo = s.m;
  }
  for (const MarginSample& s : curve.samples) {
    if (!s.accepted && s.m > (std::isnan(curve.m_lo) ? 0.0 : curve.m_lo)) {
      curve.m_hi = s.m;
      break;
    }
  }
  return curve;
}

CriticalBracket find_critical(const CriticalSetup& setup, double tol_m, double m_start) {
  if (!(tol_m > 0.0)) throw ConfigError("tol_m must be positive");
  CriticalBracket bracket;
  MarginCurve& curve = bracket.curve;
  curve.eps_accept = acceptance_margin(setup.gas, setup.bernoulli);
  bracket.upstream_limit = upstream_choking_limit(setup.gas, setup.bernoulli);
  if (!setup.bernoulli.flat_at_walls()) {
    bracket.warnings.push_back("B'(0) = B'(1) = 0 does not hold; the critical-flux dichotomy is not guaranteed");
  }

  WarmStart warm;
  double lo = m_start > 0.0 ? std::min(m_start, bracket.upstream_limit) : 0.5 * bracket.upstream_limit;
  bool found = false;
  for (int k = 0; k < 8 && !found; ++k, lo *= 0.5) {
    curve.samples.push_back(run_sample(setup, lo, curve.eps_accept, warm));
    found = curve.samples.back().accepted;
    if (found) break;
  }
  if (!found) throw SolverError("infeasible configuration: no accepted subsonic solution at any starting mass flux");

  double hi = bracket.upstream_limit;
  WarmStart probe = warm;
  curve.samples.push_back(run_sample(setup, hi, curve.eps_accept, probe));
  if (curve.samples.back().accepted) {
    bracket.warnings.push_back("solution accepted at the upstream choking limit");
    lo = hi;
  }
  while (hi - lo > tol_m) {
    const double mid = 0.5 * (lo + hi);
    curve.samples.push_back(run_sample(setup, mid, curve.eps_accept, warm));
    if (curve.samples.back().accepted) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  sort_samples(curve);
  curve.m_lo = lo;
  curve.m_hi = hi;
  bracket.m_lo = lo;
  bracket.m_hi = hi;
  return bracket;
}

}  // namespace nozzleflow
