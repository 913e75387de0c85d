#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsstokes {

// Points in R^d for d <= 3 without heap allocation.
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 3, 1>;
using Vecd = Vec<double>;

// Per-coordinate derivative orders.
struct MultiIndex {
  std::array<int, 3> k{0, 0, 0};

  MultiIndex() = default;
  MultiIndex(int a, int b = 0, int c = 0) : k{a, b, c} {}
  static MultiIndex unit(int coord, int order = 1) {
    MultiIndex m;
    m.k.at(static_cast<std::size_t>(coord)) = order;
    return m;
  }
  int total() const { return k[0] + k[1] + k[2]; }
  int operator[](int i) const { return k[static_cast<std::size_t>(i)]; }
  MultiIndex operator+(const MultiIndex& o) const {
    return {k[0] + o.k[0], k[1] + o.k[1], k[2] + o.k[2]};
  }
};

namespace kernels {

// One-dimensional heat kernel G(x,t) = (4 pi t)^{-1/2} exp(-x^2/4t) and its
// x-derivatives up to order 3. Zero for t <= 0.
template <class Scalar>
Scalar gauss1d(int order, Scalar x, Scalar t) {
  using std::exp;
  using std::sqrt;
  if (order < 0 || order > 3) throw std::invalid_argument("gauss1d: derivative order must be in [0,3]");
  if (!(t > Scalar(0))) return Scalar(0);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar g = exp(-x * x / (4 * t)) / sqrt(4 * pi * t);
  switch (order) {
    case 0: return g;
    case 1: return -x / (2 * t) * g;
    case 2: return (x * x / (4 * t * t) - 1 / (2 * t)) * g;
    default: return (-x * x * x / (8 * t * t * t) + 3 * x / (4 * t * t)) * g;
  }
}

// Time derivative of the 1-D heat kernel.
template <class Scalar>
Scalar gauss1d_dt(Scalar x, Scalar t) {
  return gauss1d<Scalar>(2, x, t);
}

// Heat kernel Gamma_d(x,t) in R^d, d = x.size(), with spatial derivative orders
// m (each entry <= 3, total <= 3). Zero for t <= 0.
template <class Scalar>
Scalar gaussian(const MultiIndex& m, const Vec<Scalar>& x, Scalar t) {
  const int d = static_cast<int>(x.size());
  if (d < 1 || d > 3) throw std::invalid_argument("gaussian: dimension must be 1, 2 or 3");
  if (m.total() > 3) throw std::invalid_argument("gaussian: total derivative order must be <= 3");
  for (int i = d; i < 3; ++i)
    if (m[i] != 0) throw std::invalid_argument("gaussian: derivative along a missing coordinate");
  Scalar v(1);
  for (int i = 0; i < d; ++i) v *= gauss1d<Scalar>(m[i], x[i], t);
  return v;
}

// D_t Gamma_d(x,t), used to check the heat equation independently of the Laplacian.
template <class Scalar>
Scalar gaussian_dt(const Vec<Scalar>& x, Scalar t) {
  using std::exp;
  using std::pow;
  if (!(t > Scalar(0))) return Scalar(0);
  const Scalar d = static_cast<Scalar>(x.size());
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar r2 = x.squaredNorm();
  const Scalar g = pow(4 * pi * t, -d / 2) * exp(-r2 / (4 * t));
  return g * (r2 / (4 * t * t) - d / (2 * t));
}

// Volume of the unit ball in R^n.
template <class Scalar>
Scalar unit_ball_volume(int n) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  switch (n) {
    case 1: return Scalar(2);
    case 2: return pi;
    case 3: return 4 * pi / 3;
    default: throw std::invalid_argument("unit_ball_volume: n must be 1, 2 or 3");
  }
}

// Newtonian potential N with Delta N = delta, n = x.size() in {2,3}:
// n = 2: (1/2pi) ln|x|;  n = 3: -1/(4 pi |x|). Derivative orders up to 2 in total.
template <class Scalar>
Scalar newtonian(const MultiIndex& m, const Vec<Scalar>& x) {
  using std::log;
  using std::pow;
  using std::sqrt;
  const int n = static_cast<int>(x.size());
  if (n != 2 && n != 3) throw std::invalid_argument("newtonian: dimension must be 2 or 3");
  if (m.total() > 2) throw std::invalid_argument("newtonian: total derivative order must be <= 2");
  for (int i = n; i < 3; ++i)
    if (m[i] != 0) throw std::invalid_argument("newtonian: derivative along a missing coordinate");
  const Scalar r2 = x.squaredNorm();
  if (!(r2 > Scalar(0))) throw std::domain_error("newtonian: singular at the origin");
  const Scalar area = n * unit_ball_volume<Scalar>(n);  // n omega_n
  const Scalar r = sqrt(r2);
  if (m.total() == 0) {
    if (n == 2) return log(r) / area;
    return -1 / (area * r);
  }
  const Scalar rn = pow(r, n);
  if (m.total() == 1) {
    int i = m[0] ? 0 : (m[1] ? 1 : 2);
    return x[i] / (area * rn);
  }
  int i = -1, j = -1;
  for (int c = 0; c < n; ++c) {
    for (int rep = 0; rep < m[c]; ++rep) (i < 0 ? i : j) = c;
  }
  const Scalar delta = (i == j) ? Scalar(1) : Scalar(0);
  return (delta * r2 - n * x[i] * x[j]) / (area * rn * r2);
}

}  // namespace kernels
}  // namespace hsstokes
