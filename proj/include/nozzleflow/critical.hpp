#pragma once

#include <span>
#include <string>
#include <vector>

#include "nozzleflow/bernoulli.hpp"
#include "nozzleflow/continuation.hpp"
#include "nozzleflow/gas.hpp"
#include "nozzleflow/geometry.hpp"

namespace nozzleflow {

struct CriticalSetup {
  NozzleGeometry nozzle;
  GasLaw gas;
  BernoulliProfile bernoulli;
  ContinuationOptions solver;
};

struct MarginSample {
  double m = 0.0;
  double margin = 0.0;  // NaN when no solution exists
  bool converged = false;
  bool truncation_active = false;
  bool accepted = false;
  std::string failure;
};

struct MarginCurve {
  std::vector<MarginSample> samples;  // sorted by m
  double m_lo = 0.0;
  double m_hi = 0.0;
  double eps_accept = 0.0;
};

// eps_accept = 1e-3 Sigma^2(min B)
double acceptance_margin(const GasLaw& gas, const BernoulliProfile& bernoulli);

// Continuation solve at each m (increasing), warm-started from the previous
// accepted sample. The cutoff uses eps0 = eps_accept/2, so a converged sample
// is accepted exactly when the cutoff stayed idle.
MarginCurve margin_curve(const CriticalSetup& setup, std::span<const double> m_values);

struct CriticalBracket {
  double m_lo = 0.0;  // accepted
  double m_hi = 0.0;  // rejected
  double upstream_limit = 0.0;
  MarginCurve curve;
  std::vector<std::string> warnings;
};

// Bisection between an accepted flux (m_start, halved until accepted) and
// the upstream choking limit, which no subsonic solution can exceed.
// Throws SolverError when no accepted start is found.
CriticalBracket find_critical(const CriticalSetup& setup, double tol_m, double m_start = 0.0);

}  // namespace nozzleflow
