#include "nozzleflow/interp.hpp"

#include <algorithm>
#include <cmath>

#include "nozzleflow/errors.hpp"

namespace nozzleflow {

namespace {

void check_knots(const std::vector<double>& x, std::size_t n_values) {
  if (x.size() < 2 || x.size() != n_values) {
    throw ConfigError("interpolation table needs at least two knots with matching values");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw ConfigError("interpolation knots must be strictly increasing");
  }
}

std::size_t find_segment(const std::vector<double>& x, double t) {
  if (t <= x.front()) return 0;
  if (t >= x.back()) return x.size() - 2;
  auto it = std::upper_bound(x.begin(), x.end(), t);
  return static_cast<std::size_t>(it - x.begin()) - 1;
}

}  // namespace

CubicHermite::CubicHermite(std::vector<double> x, std::vector<double> y, std::vector<double> slope)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(slope)) {
  check_knots(x_, y_.size());
  if (d_.size() != x_.size()) throw ConfigError("Hermite table: slope count mismatch");
}

CubicHermite CubicHermite::monotone(std::vector<double> x, std::vector<double> y) {
  check_knots(x, y.size());
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return CubicHermite(std::move(x), std::move(y), std::move(d));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // Three-point end slopes, limited to keep the shape.
  auto end_slope = [](double h0, double h1, double del0, double del1) {
    double s = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (s * del0 <= 0.0) {
      s = 0.0;
    } else if (del0 * del1 <= 0.0 && std::abs(s) > std::abs(3.0 * del0)) {
      s = 3.0 * del0;
    }
    return s;
  };
  d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return CubicHermite(std::move(x), std::move(y), std::move(d));
}

std::size_t CubicHermite::segment(double t) const { return find_segment(x_, t); }

double CubicHermite::operator()(double t) const {
  t = std::clamp(t, x_.front(), x_.back());
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double CubicHermite::derivative(double t) const {
  t = std::clamp(t, x_.front(), x_.back());
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double s2 = s * s;
  const double dh00 = (6.0 * s2 - 6.0 * s) / h;
  const double dh10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double dh01 = (-6.0 * s2 + 6.0 * s) / h;
  const double dh11 = 3.0 * s2 - 2.0 * s;
  return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  check_knots(x_, y_.size());
  const std::size_t n = x_.size();
  m_.assign(n, 0.0);
  if (n < 3) return;
  // Thomas algorithm on the interior second-derivative system.
  std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    sub[i] = h0 / 6.0;
    diag[i] = (h0 + h1) / 3.0;
    sup[i] = h1 / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
  }
}

std::size_t NaturalCubicSpline::segment(double t) const { return find_segment(x_, t); }

// Outside the knot range the spline continues as the constant end value, so
// tabulated walls reach their asymptotic heights exactly.
double NaturalCubicSpline::operator()(double t) const {
  if (t <= x_.front()) return y_.front();
  if (t >= x_.back()) return y_.back();
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double NaturalCubicSpline::derivative(double t) const {
  if (t <= x_.front() || t >= x_.back()) return 0.0;
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

double NaturalCubicSpline::second_derivative(double t) const {
  if (t <= x_.front() || t >= x_.back()) return 0.0;
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

double simpson(const std::function<double(double)>& f, double a, double b, int n_intervals) {
  if (n_intervals < 2) n_intervals = 2;
  if (n_intervals % 2 != 0) ++n_intervals;
  const double h = (b - a) / n_intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < n_intervals; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * i);
  }
  return sum * h / 3.0;
}

}  // namespace nozzleflow
