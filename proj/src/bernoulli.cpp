#include "nozzleflow/bernoulli.hpp"

#include <algorithm>
#include <cmath>

#include "nozzleflow/errors.hpp"

namespace nozzleflow {

namespace {
constexpr int kBoundSamples = 10000;
}

BernoulliProfile BernoulliProfile::constant(double value) { return polynomial({value}); }

BernoulliProfile BernoulliProfile::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ConfigError("Bernoulli polynomial needs at least one coefficient");
  // Trailing zeros only slow evaluation down.
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  BernoulliProfile b;
  b.repr_ = Representation::polynomial;
  b.coeffs_ = std::move(coeffs);
  b.compute_bounds();
  return b;
}

BernoulliProfile BernoulliProfile::tabulated(std::vector<double> x2, std::vector<double> values) {
  if (x2.size() < 3) throw ConfigError("tabulated Bernoulli profile needs at least three samples");
  if (std::abs(x2.front()) > 1e-12 || std::abs(x2.back() - 1.0) > 1e-12) {
    throw ConfigError("tabulated Bernoulli profile must span x2 in [0, 1]");
  }
  BernoulliProfile b;
  b.repr_ = Representation::tabulated;
  b.table_ = CubicHermite::monotone(std::move(x2), std::move(values));
  b.compute_bounds();
  return b;
}

double BernoulliProfile::operator()(double x2) const {
  if (repr_ == Representation::tabulated) return table_(x2);
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x2 + coeffs_[k];
  return acc;
}

double BernoulliProfile::derivative(double x2) const {
  if (repr_ == Representation::tabulated) return table_.derivative(x2);
  double acc = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * x2 + static_cast<double>(k) * coeffs_[k];
  return acc;
}

bool BernoulliProfile::flat_at_walls(double tol) const {
  return std::abs(derivative(0.0)) <= tol && std::abs(derivative(1.0)) <= tol;
}

void BernoulliProfile::compute_bounds() {
  if (repr_ == Representation::polynomial && coeffs_.size() == 1) {
    min_ = max_ = coeffs_[0];
    delta_ = 0.0;
    return;
  }
  min_ = max_ = (*this)(0.0);
  double sup_slope = 0.0;
  double lip_slope = 0.0;
  double prev_slope = derivative(0.0);
  const double h = 1.0 / kBoundSamples;
  for (int i = 0; i <= kBoundSamples; ++i) {
    const double x = i * h;
    const double v = (*this)(x);
    const double d = derivative(x);
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
    sup_slope = std::max(sup_slope, std::abs(d));
    if (i > 0) lip_slope = std::max(lip_slope, std::abs(d - prev_slope) / h);
    prev_slope = d;
  }
  // Exact Lipschitz constant of B' for polynomials: sup|B''|.
  if (repr_ == Representation::polynomial) {
    lip_slope = 0.0;
    for (int i = 0; i <= kBoundSamples; ++i) {
      const double x = i * h;
      double acc = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 2;) {
        acc = acc * x + static_cast<double>(k * (k - 1)) * coeffs_[k];
      }
      lip_slope = std::max(lip_slope, std::abs(acc));
    }
  }
  delta_ = std::max(sup_slope, lip_slope);
}

}  // namespace nozzleflow
