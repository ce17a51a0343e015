#pragma once

#include <vector>

#include "nozzleflow/interp.hpp"

namespace nozzleflow {

// Upstream Bernoulli function B(x2) on x2 in [0, 1], either a polynomial in x2
// or tabulated samples joined by a monotone cubic.
class BernoulliProfile {
 public:
  enum class Representation { polynomial, tabulated };

  static BernoulliProfile constant(double value);
  // B(x2) = sum_k coeffs[k] x2^k
  static BernoulliProfile polynomial(std::vector<double> coeffs);
  static BernoulliProfile tabulated(std::vector<double> x2, std::vector<double> values);

  double operator()(double x2) const;
  double derivative(double x2) const;

  Representation representation() const { return repr_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double min() const { return min_; }
  double max() const { return max_; }
  // max(sup|B'|, Lip(B')) on [0, 1]
  double delta() const { return delta_; }
  bool is_constant() const { return delta_ == 0.0; }

  bool lower_sign_ok() const { return derivative(0.0) <= 0.0; }   // B'(0) <= 0
  bool upper_sign_ok() const { return derivative(1.0) >= 0.0; }   // B'(1) >= 0
  bool flat_at_walls(double tol = 1e-12) const;                   // B'(0) = B'(1) = 0

 private:
  BernoulliProfile() = default;
  void compute_bounds();

  Representation repr_ = Representation::polynomial;
  std::vector<double> coeffs_;
  CubicHermite table_;
  double min_ = 0.0;
  double max_ = 0.0;
  double delta_ = 0.0;
};

}  // namespace nozzleflow
