#include "nozzleflow/roots.hpp"

#include <cmath>

#include "nozzleflow/errors.hpp"

namespace nozzleflow {

double safeguarded_newton(const ValueAndSlope& f, double lo, double hi, double guess,
                          const RootOptions& options) {
  auto [f_lo, df_lo] = f(lo);
  if (f_lo == 0.0) return lo;
  auto [f_hi, df_hi] = f(hi);
  if (f_hi == 0.0) return hi;
  (void)df_lo;
  (void)df_hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw SolverError("safeguarded_newton: no sign change on bracket");
  }
  // Orient so that f(neg) < 0 < f(pos).
  double neg = f_lo < 0.0 ? lo : hi;
  double pos = f_lo < 0.0 ? hi : lo;

  double x = (guess > std::min(lo, hi) && guess < std::max(lo, hi)) ? guess : 0.5 * (lo + hi);
  double dx_old = std::abs(hi - lo);
  double dx = dx_old;
  auto [fx, dfx] = f(x);

  for (int it = 0; it < options.max_iter; ++it) {
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      neg = x;
    } else {
      pos = x;
    }
    const double a = std::min(neg, pos);
    const double b = std::max(neg, pos);
    double x_new = dfx != 0.0 ? x - fx / dfx : a - 1.0;
    const bool outside = !(x_new > a && x_new < b);
    const bool slow = std::abs(2.0 * fx) > std::abs(dx_old * dfx);
    dx_old = dx;
    if (outside || slow) {
      x_new = 0.5 * (a + b);
    }
    dx = x_new - x;
    x = x_new;
    if (std::abs(dx) <= options.rel_tol * std::abs(x) || (b - a) <= options.rel_tol * std::abs(x)) {
      return x;
    }
    std::tie(fx, dfx) = f(x);
  }
  return x;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              const RootOptions& options) {
  double f_lo = f(lo);
  if (f_lo == 0.0) return lo;
  const double f_hi = f(hi);
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw SolverError("bisect: no sign change on bracket");
  }
  for (int it = 0; it < options.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(hi - lo) <= options.rel_tol * std::abs(mid)) return mid;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> expand_positive_bracket(const std::function<double(double)>& f,
                                                  double lo, double hi, int max_expansions) {
  for (int k = 0; k < max_expansions && !(f(lo) < 0.0); ++k) lo *= 0.5;
  for (int k = 0; k < max_expansions && !(f(hi) > 0.0); ++k) hi *= 2.0;
  if (!(f(lo) < 0.0) || !(f(hi) > 0.0)) {
    throw SolverError("expand_positive_bracket: could not bracket root");
  }
  return {lo, hi};
}

}  // namespace nozzleflow
