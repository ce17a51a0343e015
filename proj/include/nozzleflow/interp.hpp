#pragma once

#include <functional>
#include <vector>

namespace nozzleflow {

// Piecewise cubic Hermite interpolant on strictly increasing knots.
// Evaluation outside [front, back] clamps to the end knots.
class CubicHermite {
 public:
  CubicHermite() = default;
  CubicHermite(std::vector<double> x, std::vector<double> y, std::vector<double> slope);

  // Fritsch-Carlson slopes: monotone data gives a monotone interpolant.
  static CubicHermite monotone(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& slopes() const { return d_; }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t segment(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

// C2 natural cubic spline; used for tabulated walls where the second
// derivative is needed for regularity checks.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline() = default;
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  double front_value() const { return y_.front(); }
  double back_value() const { return y_.back(); }

 private:
  std::size_t segment(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at knots
};

// Composite Simpson rule with n_intervals (rounded up to even) subintervals.
double simpson(const std::function<double(double)>& f, double a, double b, int n_intervals);

}  // namespace nozzleflow
