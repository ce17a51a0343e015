#include "nozzleflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nozzleflow/errors.hpp"
#include "nozzleflow/farfield.hpp"

namespace nozzleflow {

namespace {

constexpr int kValidationScan = 10000;
constexpr double kLimitProbe = 1e3;
constexpr double kLimitTol = 1e-8;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

// ------------------------------------------------------------------ walls

WallProfile WallProfile::constant(double height) {
  WallProfile w;
  w.kind_ = Kind::constant;
  w.p0_ = height;
  return w;
}

WallProfile WallProfile::tanh_step(double from, double to, double center, double steepness) {
  if (!(steepness > 0.0)) throw ConfigError("tanh_transition: steepness must be positive");
  WallProfile w;
  w.kind_ = Kind::tanh_step;
  w.p0_ = from;
  w.p1_ = to;
  w.p2_ = center;
  w.p3_ = steepness;
  return w;
}

WallProfile WallProfile::gaussian_bump(double base, double amplitude, double width) {
  if (!(width > 0.0)) throw ConfigError("bump: width must be positive");
  WallProfile w;
  w.kind_ = Kind::gaussian_bump;
  w.p0_ = base;
  w.p1_ = amplitude;
  w.p2_ = width;
  return w;
}

WallProfile WallProfile::tabulated(std::vector<double> x1, std::vector<double> height) {
  if (x1.size() < 4) throw ConfigError("tabulated wall needs at least four samples");
  WallProfile w;
  w.kind_ = Kind::tabulated;
  w.spline_ = NaturalCubicSpline(std::move(x1), std::move(height));
  return w;
}

double WallProfile::operator()(double x) const {
  switch (kind_) {
    case Kind::constant:
      return p0_;
    case Kind::tanh_step:
      return p0_ + (p1_ - p0_) * 0.5 * (1.0 + std::tanh(p3_ * (x - p2_)));
    case Kind::gaussian_bump: {
      const double r = x / p2_;
      return p0_ + p1_ * std::exp(-r * r);
    }
    case Kind::tabulated:
      return spline_(x);
  }
  return 0.0;
}

double WallProfile::slope(double x) const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::tanh_step: {
      const double t = std::tanh(p3_ * (x - p2_));
      return (p1_ - p0_) * 0.5 * p3_ * (1.0 - t * t);
    }
    case Kind::gaussian_bump: {
      const double r = x / p2_;
      return p1_ * std::exp(-r * r) * (-2.0 * x / (p2_ * p2_));
    }
    case Kind::tabulated:
      return spline_.derivative(x);
  }
  return 0.0;
}

double WallProfile::curvature(double x) const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::tanh_step: {
      const double t = std::tanh(p3_ * (x - p2_));
      return -(p1_ - p0_) * p3_ * p3_ * (1.0 - t * t) * t;
    }
    case Kind::gaussian_bump: {
      const double w2 = p2_ * p2_;
      const double r = x / p2_;
      return p1_ * std::exp(-r * r) * (4.0 * x * x / (w2 * w2) - 2.0 / w2);
    }
    case Kind::tabulated:
      return spline_.second_derivative(x);
  }
  return 0.0;
}

double WallProfile::upstream_limit() const {
  switch (kind_) {
    case Kind::constant:
    case Kind::gaussian_bump:
      return p0_;
    case Kind::tanh_step:
      return p0_;
    case Kind::tabulated:
      return spline_.front_value();
  }
  return 0.0;
}

double WallProfile::downstream_limit() const {
  switch (kind_) {
    case Kind::constant:
    case Kind::gaussian_bump:
      return p0_;
    case Kind::tanh_step:
      return p1_;
    case Kind::tabulated:
      return spline_.back_value();
  }
  return 0.0;
}

std::pair<double, double> WallProfile::transition_extent() const {
  switch (kind_) {
    case Kind::constant:
      return {0.0, 0.0};
    case Kind::tanh_step:
      return {p2_ - 20.0 / p3_, p2_ + 20.0 / p3_};
    case Kind::gaussian_bump:
      return {-7.0 * p2_, 7.0 * p2_};
    case Kind::tabulated:
      return {spline_.front(), spline_.back()};
  }
  return {0.0, 0.0};
}

std::string to_string(NozzleFamily family) {
  switch (family) {
    case NozzleFamily::straight:
      return "straight";
    case NozzleFamily::tanh_transition:
      return "tanh_transition";
    case NozzleFamily::bump:
      return "bump";
    case NozzleFamily::tabulated:
      return "tabulated";
  }
  return "unknown";
}

// --------------------------------------------------------------- nozzles

namespace {

void validate(const NozzleGeometry& g) {
  auto fail = [](const std::string& what) { throw ConfigError("invalid geometry: " + what); };
  if (!(g.b > g.a)) fail("downstream heights need b > a");
  if (std::abs(g.lower(-kLimitProbe)) > kLimitTol || std::abs(g.upper(-kLimitProbe) - 1.0) > kLimitTol) {
    fail("upstream walls must approach heights 0 and 1");
  }
  if (std::abs(g.lower(kLimitProbe) - g.a) > kLimitTol || std::abs(g.upper(kLimitProbe) - g.b) > kLimitTol) {
    fail("downstream walls do not approach (a, b)");
  }
  auto [l0, l1] = g.lower.transition_extent();
  auto [u0, u1] = g.upper.transition_extent();
  const double lo = std::min({l0, u0, -10.0}) - 1.0;
  const double hi = std::max({l1, u1, 10.0}) + 1.0;
  for (int k = 0; k <= kValidationScan; ++k) {
    const double x = lo + (hi - lo) * k / kValidationScan;
    const double w = g.width(x);
    if (!(w > 0.0)) {
      std::ostringstream msg;
      msg << "f2 <= f1 at x1 = " << x;
      fail(msg.str());
    }
    for (const WallProfile* wall : {&g.lower, &g.upper}) {
      if (!std::isfinite((*wall)(x)) || !std::isfinite(wall->slope(x)) || !std::isfinite(wall->curvature(x))) {
        fail("wall profile is not bounded in C^2");
      }
    }
  }
}

}  // namespace

NozzleGeometry build_nozzle(const NozzleSpec& spec) {
  NozzleGeometry g = std::visit(
      overloaded{
          [](const StraightSpec&) { return NozzleGeometry{}; },
          [](const TanhTransitionSpec& s) {
            NozzleGeometry n;
            n.family = NozzleFamily::tanh_transition;
            n.lower = WallProfile::tanh_step(s.lower_from, s.lower_to, s.center, s.steepness);
            n.upper = WallProfile::tanh_step(s.upper_from, s.upper_to, s.center, s.steepness);
            n.a = s.lower_to;
            n.b = s.upper_to;
            return n;
          },
          [](const BumpSpec& s) {
            NozzleGeometry n;
            n.family = NozzleFamily::bump;
            if (s.wall == BumpSpec::Wall::lower) {
              n.lower = WallProfile::gaussian_bump(0.0, s.amplitude, s.width);
            } else {
              n.upper = WallProfile::gaussian_bump(1.0, s.amplitude, s.width);
            }
            return n;
          },
          [](const TabulatedSpec& s) {
            NozzleGeometry n;
            n.family = NozzleFamily::tabulated;
            n.lower = WallProfile::tabulated(s.lower_x1, s.lower_height);
            n.upper = WallProfile::tabulated(s.upper_x1, s.upper_height);
            n.a = n.lower.downstream_limit();
            n.b = n.upper.downstream_limit();
            return n;
          },
      },
      spec);
  validate(g);
  return g;
}

TruncatedDomain truncate(const NozzleGeometry& nozzle, double L) {
  if (!(L > 0.0)) throw ConfigError("truncation length must be positive");
  return TruncatedDomain{nozzle, L};
}

// ------------------------------------------------------------------ mesh

Mesh::Mesh(TruncatedDomain domain, int n_xi, int n_eta) : domain_(std::move(domain)), n_xi_(n_xi), n_eta_(n_eta) {
  if (n_xi < 3 || n_eta < 3) throw ConfigError("mesh needs at least 3 nodes in each direction");
  const NozzleGeometry& g = domain_.nozzle;
  x1_.resize(n_xi);
  lower_.resize(n_xi);
  width_.resize(n_xi);
  dlower_.resize(n_xi);
  dwidth_.resize(n_xi);
  for (int i = 0; i < n_xi; ++i) {
    const double x = xi(i);
    x1_[i] = x;
    lower_[i] = g.lower(x);
    width_[i] = g.upper(x) - lower_[i];
    dlower_[i] = g.lower.slope(x);
    dwidth_[i] = g.upper.slope(x) - dlower_[i];
  }
}

double Mesh::min_jacobian() const {
  double jmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n_xi_; ++i) {
    for (int j = 0; j + 1 < n_eta_; ++j) {
      const double px[4] = {x1(i), x1(i + 1), x1(i + 1), x1(i)};
      const double py[4] = {x2(i, j), x2(i + 1, j), x2(i + 1, j + 1), x2(i, j + 1)};
      for (int c = 0; c < 4; ++c) {
        const int n = (c + 1) % 4;
        const int p = (c + 3) % 4;
        const double ex = px[n] - px[c], ey = py[n] - py[c];
        const double fx = px[p] - px[c], fy = py[p] - py[c];
        jmin = std::min(jmin, ex * fy - ey * fx);
      }
    }
  }
  return jmin;
}

Mesh generate_mesh(const TruncatedDomain& domain, int n_xi, int n_eta) {
  Mesh mesh(domain, n_xi, n_eta);
  if (!(mesh.min_jacobian() > 0.0)) {
    throw ConfigError("mesh has a degenerate cell; geometry too distorted for this resolution, refine n_xi");
  }
  return mesh;
}

// ---------------------------------------------------------- boundary data

std::vector<double> boundary_values(const Mesh& mesh, double m, BoundaryMode mode,
                                    const FarFieldStates* farfield) {
  if (mode == BoundaryMode::farfield_profile && farfield == nullptr) {
    throw ConfigError("farfield_profile boundary data needs far-field states");
  }
  const int nx = mesh.n_xi();
  const int ny = mesh.n_eta();
  std::vector<double> psi(mesh.size());
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) psi[mesh.index(i, j)] = mesh.eta(j) * m;
  }
  if (mode == BoundaryMode::farfield_profile) {
    const NozzleGeometry& g = mesh.nozzle();
    for (int j = 1; j + 1 < ny; ++j) {
      const double y_in = std::clamp(mesh.x2(0, j), 0.0, 1.0);
      psi[mesh.index(0, j)] = farfield->upstream_stream(y_in);
      const double y_out = std::clamp(mesh.x2(nx - 1, j), g.a, g.b);
      psi[mesh.index(nx - 1, j)] = farfield->downstream_stream(y_out);
    }
  }
  // Walls (and the corners) carry 0 and m in both modes.
  for (int i = 0; i < nx; ++i) {
    psi[mesh.index(i, 0)] = 0.0;
    psi[mesh.index(i, ny - 1)] = m;
  }
  return psi;
}

// ---------------------------------------------------------------- gradient

NodalGradient nodal_gradient(const Mesh& mesh, std::span<const double> f) {
  const int nx = mesh.n_xi();
  const int ny = mesh.n_eta();
  const double hx = mesh.h_xi();
  const double hy = mesh.h_eta();
  NodalGradient g;
  g.dx1.resize(mesh.size());
  g.dx2.resize(mesh.size());
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      double d_xi;
      if (i == 0) {
        d_xi = (-3.0 * f[mesh.index(0, j)] + 4.0 * f[mesh.index(1, j)] - f[mesh.index(2, j)]) / (2.0 * hx);
      } else if (i == nx - 1) {
        d_xi = (3.0 * f[mesh.index(i, j)] - 4.0 * f[mesh.index(i - 1, j)] + f[mesh.index(i - 2, j)]) / (2.0 * hx);
      } else {
        d_xi = (f[mesh.index(i + 1, j)] - f[mesh.index(i - 1, j)]) / (2.0 * hx);
      }
      double d_eta;
      if (j == 0) {
        d_eta = (-3.0 * f[mesh.index(i, 0)] + 4.0 * f[mesh.index(i, 1)] - f[mesh.index(i, 2)]) / (2.0 * hy);
      } else if (j == ny - 1) {
        d_eta = (3.0 * f[mesh.index(i, j)] - 4.0 * f[mesh.index(i, j - 1)] + f[mesh.index(i, j - 2)]) / (2.0 * hy);
      } else {
        d_eta = (f[mesh.index(i, j + 1)] - f[mesh.index(i, j - 1)]) / (2.0 * hy);
      }
      // x2 = f1 + eta w: d/dx2 = (1/w) d/deta, d/dx1 = d/dxi - (f1' + eta w')/w d/deta
      const double w = mesh.width(i);
      const int n = mesh.index(i, j);
      g.dx2[n] = d_eta / w;
      g.dx1[n] = d_xi - (mesh.lower_slope(i) + mesh.eta(j) * mesh.width_slope(i)) / w * d_eta;
    }
  }
  return g;
}

std::vector<double> resample(const Mesh& from, std::span<const double> field, const Mesh& to) {
  std::vector<double> out(to.size());
  const double hx = from.h_xi();
  const double hy = from.h_eta();
  for (int i = 0; i < to.n_xi(); ++i) {
    const double sx = std::clamp((to.xi(i) + from.L()) / hx, 0.0, static_cast<double>(from.n_xi() - 1));
    const int i0 = std::min(static_cast<int>(sx), from.n_xi() - 2);
    const double tx = sx - i0;
    for (int j = 0; j < to.n_eta(); ++j) {
      const double sy = std::clamp(to.eta(j) / hy, 0.0, static_cast<double>(from.n_eta() - 1));
      const int j0 = std::min(static_cast<int>(sy), from.n_eta() - 2);
      const double ty = sy - j0;
      const double v00 = field[from.index(i0, j0)];
      const double v10 = field[from.index(i0 + 1, j0)];
      const double v01 = field[from.index(i0, j0 + 1)];
      const double v11 = field[from.index(i0 + 1, j0 + 1)];
      out[to.index(i, j)] = (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
    }
  }
  return out;
}

}  // namespace nozzleflow
