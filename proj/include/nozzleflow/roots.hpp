#pragma once

#include <functional>
#include <utility>

namespace nozzleflow {

struct RootOptions {
  double rel_tol = 1e-13;
  int max_iter = 100;
};

// Value and derivative of a scalar function at a point.
using ValueAndSlope = std::function<std::pair<double, double>(double)>;

// Newton iteration kept inside [lo, hi]; falls back to bisection whenever the
// Newton step leaves the bracket or fails to halve the residual. f(lo) and
// f(hi) must have opposite signs (or one of them vanish).
double safeguarded_newton(const ValueAndSlope& f, double lo, double hi, double guess,
                          const RootOptions& options = {});

// Plain bisection on a sign change; stops once the bracket is below
// rel_tol * |midpoint|.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              const RootOptions& options = {});

// Grows [lo, hi] geometrically (lo /= factor, hi *= factor) around a positive
// starting interval until f(lo) < 0 < f(hi) for an increasing f. Throws
// SolverError if no sign change is found within max_expansions.
std::pair<double, double> expand_positive_bracket(const std::function<double(double)>& f,
                                                  double lo, double hi,
                                                  int max_expansions = 200);

}  // namespace nozzleflow
