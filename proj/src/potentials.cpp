#include "hsstokes/potentials.hpp"

#include "hsstokes/detail/adaptive.hpp"
#include "hsstokes/normal_factors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hsstokes {

void HalfSpacePoint::validate() const {
  if (x_prime.size() != 1 && x_prime.size() != 2) throw std::invalid_argument("HalfSpacePoint: n must be 2 or 3");
  if (!(x_n > 0)) throw std::invalid_argument("HalfSpacePoint: x_n must be positive");
}

namespace potentials {

using kernels::gauss1d;
using kernels::gaussian;
using kernels::newtonian;
using quad::QuadConfig;
using quad::QuadResult;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr quad::EndpointHint kInvSqrtAtZero{0.0, -0.5};

void check_index(int i, int n) {
  if (i < 1 || i > n) throw std::invalid_argument("index out of range 1..n");
}

void check_time(double t) {
  if (!(t > 0)) throw std::invalid_argument("time argument must be positive");
}

// Geometric breakpoints spanning the given positive scales.
std::vector<double> scale_breakpoints(std::initializer_list<double> scales) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double s : scales) {
    if (s > 0) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  std::vector<double> pts;
  if (hi == 0) return pts;
  for (double v = lo / 16; v < 16 * hi; v *= 4) pts.push_back(v);
  return pts;
}

// Surface measure of the unit sphere in R^n.
double sphere_area(int n) { return n * kernels::unit_ball_volume<double>(n); }

Vecd polar_point(double r, double w, int d) {
  Vecd z(d);
  if (d == 1) {
    z[0] = r;
  } else {
    z[0] = r * std::cos(w);
    z[1] = r * std::sin(w);
  }
  return z;
}

// Integral of f over R^d (d = 1, 2) in polar coordinates about the origin, with
// radius up to R. The integrand is always folded: f(z) + f(-z) over half the
// directions (the two signs for d = 1), which is how odd singular kernels
// become regular.
QuadResult polar_integral(const std::function<double(const Vecd&, double)>& f, int d, double R,
                          std::vector<double> radial_breaks, const QuadConfig& cfg) {
  quad::AxisHints radial, angular;
  radial.breakpoints = std::move(radial_breaks);
  if (d == 1) {
    auto g = [&](double r) {
      Vecd z(1);
      z[0] = r;
      Vecd mz(1);
      mz[0] = -r;
      return f(z, r) + f(mz, r);
    };
    return quad::detail::adaptive_scalar(g, 0.0, R, cfg, radial.breakpoints, {});
  }
  Eigen::VectorXd lo(2), hi(2), c(2);
  lo << 0, 0;
  hi << R, kPi;
  c << 0, 0;
  auto g = [&](const Eigen::VectorXd& v) {
    const double r = v[0];
    const Vecd z = polar_point(r, v[1], 2);
    return (f(z, r) + f(-z, r)) * r;
  };
  quad::AxisHints axes[2] = {radial, angular};
  return quad::integrate_nd(g, {lo, hi}, c, R, cfg, axes);
}

}  // namespace

QuadResult l_tensor(const TensorIndex& idx, const HalfSpacePoint& p, double t, const QuadConfig& cfg) {
  p.validate();
  check_time(t);
  const int n = p.n(), d = n - 1;
  check_index(idx.i, n);
  check_index(idx.j, n);
  const int I = idx.i - 1, J = idx.j - 1;
  const double xn = p.x_n;
  const Vecd& xp = p.x_prime;
  const double gxt = gauss1d(1, xn, t);
  auto f = [&](double tau) {
    double e[3];
    normal::E_all(xn, t, tau, e);
    const double s = t + tau;
    if (I < d && J < d) return -gaussian(MultiIndex::unit(I) + MultiIndex::unit(J), xp, s) * e[0];
    if (I < d) return -gaussian(MultiIndex::unit(I), xp, s) * (gxt * gauss1d(0, 0.0, tau) + e[1]);
    if (J < d) return -gaussian(MultiIndex::unit(J), xp, s) * e[1];
    return -gaussian(MultiIndex{}, xp, s) * e[2];
  };
  const auto bps = scale_breakpoints({xn * xn, t, xp.squaredNorm()});
  cfg.validate();
  return quad::detail::adaptive_scalar(f, 0.0, quad::kInf, cfg, bps, std::span(&kInvSqrtAtZero, 1));
}

QuadResult l_tensor_direct(const TensorIndex& idx, const HalfSpacePoint& p, double t, const QuadConfig& cfg) {
  p.validate();
  check_time(t);
  cfg.validate();
  const int n = p.n(), d = n - 1;
  check_index(idx.i, n);
  check_index(idx.j, n);
  const int I = idx.i - 1, J = idx.j - 1;
  const Vecd xp = p.x_prime;
  const double xn = p.x_n;
  const double area = sphere_area(n);
  const double R = xp.norm() + cfg.tail_sigma * std::sqrt(2 * t);

  // Derivative of Gamma(x' - y', x_n - h, t) acting as d_{z_n} then d_{x_j}.
  auto kernel = [&](const Vecd& y, double h) {
    const Vecd X = xp - y;
    if (J < d) return gaussian(MultiIndex::unit(J), X, t) * gauss1d(1, xn - h, t);
    return gaussian(MultiIndex{}, X, t) * gauss1d(2, xn - h, t);
  };
  // D_i N(y', h) / |(y',h)| profile, returned without the radial Jacobian.
  auto newton_i = [&](const Vecd& y, double r, double h) {
    const double rho2 = r * r + h * h;
    const double num = (I < d) ? y[I] : h;
    return num / (area * std::pow(rho2, 0.5 * n));
  };

  Eigen::VectorXd lo(d + 1), hi(d + 1), c(d + 1);
  quad::AxisHints axes[3];
  lo[0] = 0;
  hi[0] = xn;
  c[0] = 0;
  lo[1] = 0;
  hi[1] = R;
  c[1] = 0;
  if (d == 2) {
    lo[2] = 0;
    hi[2] = kPi;
    c[2] = 0;
  }
  // The radial integrand peaks at r ~ h; split the radius on that scale.
  axes[1].breakpoints = {xn / 64, xn / 16, xn / 4, xn, 4 * xn};
  auto g = [&](const Eigen::VectorXd& v) {
    const double h = v[0], r = v[1];
    double sum = 0;
    if (d == 1) {
      Vecd y(1);
      y[0] = r;
      Vecd my(1);
      my[0] = -r;
      sum = newton_i(y, r, h) * kernel(y, h) + newton_i(my, r, h) * kernel(my, h);
      return sum;
    }
    const Vecd y = polar_point(r, v[2], 2);
    const Vecd my = -y;
    sum = newton_i(y, r, h) * kernel(y, h) + newton_i(my, r, h) * kernel(my, h);
    return sum * r;
  };
  return quad::integrate_nd(g, {lo, hi}, c, R, cfg, std::span(axes, static_cast<std::size_t>(d + 1)));
}

QuadResult h_tangential(int i, const Vecd& X, double theta, const QuadConfig& cfg) {
  check_time(theta);
  cfg.validate();
  const int d = static_cast<int>(X.size()), n = d + 1;
  if (i < 1 || i > d) throw std::invalid_argument("h_tangential: i must be tangential");
  const double area = sphere_area(n);
  const double R = X.norm() + cfg.tail_sigma * std::sqrt(2 * theta);
  const int I = i - 1;
  auto f = [&](const Vecd& z, double r) {
    // D_i N(z, 0) without the radial Jacobian, which polar_integral supplies for d = 2.
    return gaussian(MultiIndex{}, Vecd(X - z), theta) * z[I] / (area * std::pow(r, n));
  };
  const double s = std::sqrt(theta);
  return polar_integral(f, d, R, {s / 4, s, X.norm()}, cfg);
}

QuadResult h_tangential_semigroup(int i, const Vecd& X, double theta, const QuadConfig& cfg) {
  check_time(theta);
  cfg.validate();
  const int d = static_cast<int>(X.size());
  if (i < 1 || i > d) throw std::invalid_argument("h_tangential_semigroup: i must be tangential");
  const MultiIndex m = MultiIndex::unit(i - 1);
  auto f = [&](double tau) { return -gaussian(m, X, theta + tau) * gauss1d(0, 0.0, tau); };
  const auto bps = scale_breakpoints({theta, X.squaredNorm()});
  return quad::detail::adaptive_scalar(f, 0.0, quad::kInf, cfg, bps, std::span(&kInvSqrtAtZero, 1));
}

QuadResult h_normal(const Vecd& X, double x_n, double theta, const QuadConfig& cfg) {
  check_time(theta);
  cfg.validate();
  if (!(x_n > 0)) throw std::invalid_argument("h_normal: x_n must be positive");
  auto f = [&](double tau) { return -gaussian(MultiIndex{}, X, theta + tau) * gauss1d(1, x_n, tau); };
  const auto bps = scale_breakpoints({x_n * x_n, theta, X.squaredNorm()});
  return quad::detail::adaptive_scalar(f, 0.0, quad::kInf, cfg, bps, {});
}

QuadResult h_normal_direct(const Vecd& X, double x_n, double theta, const QuadConfig& cfg) {
  check_time(theta);
  cfg.validate();
  if (!(x_n > 0)) throw std::invalid_argument("h_normal_direct: x_n must be positive");
  const int d = static_cast<int>(X.size()), n = d + 1;
  const double area = sphere_area(n);
  const double R = X.norm() + cfg.tail_sigma * std::sqrt(2 * theta);
  auto f = [&](const Vecd& z, double r) {
    return gaussian(MultiIndex{}, Vecd(X - z), theta) * x_n / (area * std::pow(r * r + x_n * x_n, 0.5 * n));
  };
  const double s = std::sqrt(theta), xr = X.norm();
  return polar_integral(f, d, R, {x_n / 4, x_n, 4 * x_n, std::max(0.0, xr - 3 * s), xr, xr + 3 * s}, cfg);
}

QuadResult b_tensor(int i, const HalfSpacePoint& p, double t, const QuadConfig& cfg) {
  p.validate();
  if (i < 1 || i >= p.n()) throw std::invalid_argument("b_tensor: i must be tangential");
  const QuadResult h = h_tangential(i, p.x_prime, t, cfg);
  return h * gauss1d(1, p.x_n, t);
}

APotential a_potential(int i, const HalfSpacePoint& p, double t, const QuadConfig& cfg) {
  p.validate();
  check_time(t);
  cfg.validate();
  const int d = static_cast<int>(p.x_prime.size()), n = d + 1;
  if (i < 1 || i > d) throw std::invalid_argument("a_potential: i must be tangential");
  const double area = sphere_area(n);
  const Vecd X = p.x_prime;
  const double R = X.norm() + cfg.tail_sigma * std::sqrt(2 * t);
  const int I = i - 1;
  const double sq = std::sqrt(t);
  std::vector<double> brk{sq / 4, sq, X.norm()};
  auto newton_part = [&](const Vecd& z, double r) { return z[I] / (area * std::pow(r, n)); };
  const QuadResult h = polar_integral(
      [&](const Vecd& z, double r) { return gaussian(MultiIndex{}, Vecd(X - z), t) * newton_part(z, r); }, d, R, brk,
      cfg);
  const QuadResult h_t = polar_integral(
      [&](const Vecd& z, double r) { return kernels::gaussian_dt(Vecd(X - z), t) * newton_part(z, r); }, d, R, brk,
      cfg);
  const QuadResult h_lap = polar_integral(
      [&](const Vecd& z, double r) {
        double lap = 0;
        for (int k = 0; k < d; ++k) lap += gaussian(MultiIndex::unit(k, 2), Vecd(X - z), t);
        return lap * newton_part(z, r);
      },
      d, R, brk, cfg);
  const double xn = p.x_n;
  const double g0 = gauss1d(0, xn, t), g1 = gauss1d(1, xn, t), g2 = gauss1d(2, xn, t);
  // d/dt of the 1-D heat kernel, written out from its definition.
  const double gt = g0 * (xn * xn / (4 * t * t) - 1 / (2 * t));
  APotential out;
  out.value = h * g0;
  out.dxn = h * g1;
  out.dxn2 = h * g2;
  out.caloric.value = gt * h.value + g0 * h_t.value - g2 * h.value - g0 * h_lap.value;
  out.caloric.err_estimate = (std::abs(gt) + std::abs(g2)) * h.err_estimate + std::abs(g0) * (h_t.err_estimate + h_lap.err_estimate);
  out.caloric.evaluations = h.evaluations + h_t.evaluations + h_lap.evaluations;
  out.caloric.converged = h.converged && h_t.converged && h_lap.converged;
  return out;
}

GammaDecomposition gamma_convolution_decomposition(const Vecd& X, double x_n, double t, const QuadConfig& cfg) {
  if (X.size() != 1 && X.size() != 2) throw std::invalid_argument("gamma_convolution_decomposition: bad dimension");
  if (!(X.norm() >= 1)) throw std::invalid_argument("gamma_convolution_decomposition: need |X'| >= 1");
  if (!(x_n > 0 && x_n < 0.5)) throw std::invalid_argument("gamma_convolution_decomposition: need 0 < x_n < 1/2");
  check_time(t);
  cfg.validate();
  const int d = static_cast<int>(X.size()), n = d + 1;
  const double area = sphere_area(n);
  GammaDecomposition out;
  out.total = h_normal(X, x_n, t, cfg);
  Vecd full(n);
  full.head(d) = X;
  full[d] = x_n;
  out.newtonian_part = newtonian(MultiIndex::unit(d), full);
  const double R = X.norm() / 10;
  auto f = [&](const Vecd& z, double r) {
    return gaussian(MultiIndex{}, Vecd(X - z), t) * x_n / (area * std::pow(r * r + x_n * x_n, 0.5 * n));
  };
  out.i_part = polar_integral(f, d, R, {x_n / 4, x_n, 4 * x_n}, cfg);
  out.j1_residual = out.total.value - out.newtonian_part - out.i_part.value;
  return out;
}

}  // namespace potentials
}  // namespace hsstokes
