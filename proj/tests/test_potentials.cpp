#include "hsstokes/chebyshev.hpp"
#include "hsstokes/normal_factors.hpp"
#include "hsstokes/potentials.hpp"
#include "hsstokes/tangential.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hsstokes;
using potentials::b_tensor;
using potentials::l_tensor;
using potentials::l_tensor_direct;

namespace {

HalfSpacePoint point(double x1, double x2, double xn) {
  HalfSpacePoint p;
  p.x_prime = Vecd(2);
  p.x_prime << x1, x2;
  p.x_n = xn;
  return p;
}

bool close(const quad::QuadResult& a, const quad::QuadResult& b, double rel) {
  const double scale = std::max(std::abs(a.value), std::abs(b.value));
  return std::abs(a.value - b.value) <= std::max(rel * scale, 3 * (a.err_estimate + b.err_estimate)) + 1e-300;
}

}  // namespace

TEST_CASE("Chebyshev interpolation") {
  ChebyshevBundle c([](double x, Eigen::Ref<Eigen::VectorXd> out) { out[0] = std::exp(x), out[1] = std::sin(3 * x); },
                    2, -1, 2, 40);
  for (double x = -1; x <= 2; x += 0.137) {
    CHECK(c(0, x) == doctest::Approx(std::exp(x)).epsilon(1e-13));
    CHECK(std::abs(c(1, x) - std::sin(3 * x)) < 1e-13);
  }
  CHECK(c.tail_ratio(0) < 1e-14);
  GradedChebyshev g([](double x, Eigen::Ref<Eigen::VectorXd> out) { out[0] = std::sqrt(x); }, 1, 1e-8, 1, 24);
  double v;
  for (double x : {1e-7, 1e-4, 0.3}) {
    g.eval(x, &v);
    CHECK(v == doctest::Approx(std::sqrt(x)).epsilon(1e-9));
  }
}

TEST_CASE("normal factors against frozen high-precision values") {
  // tests/oracles/frozen_values.py
  struct Case {
    int k;
    double x, theta, tau, ref;
  };
  const Case cases[] = {
      {0, 0.3, 0.01, 0.02, -3.7656806843905598183},  {0, 0.05, 1e-4, 0.5, -11.225886543244200955},
      {0, 0.2, 0.3, 1e-3, -0.068837988155907310133}, {1, 0.3, 0.01, 0.02, 11.98315829929782391},
      {1, 0.05, 1e-4, 0.5, 0.36307468441929199287},  {1, 0.2, 0.3, 1e-3, 1.0812067513318609069},
      {2, 0.3, 0.01, 0.02, 45.044682164442949187},   {2, 0.05, 1e-4, 0.5, 11.213206654878802176},
      {2, 0.2, 0.3, 1e-3, 7.2508486869496436552},
  };
  for (const auto& c : cases) {
    CAPTURE(c.k);
    CAPTURE(c.x);
    CHECK(normal::E(c.k, c.x, c.theta, c.tau) == doctest::Approx(c.ref).epsilon(1e-9));
  }
}

TEST_CASE("tangential tables match direct quadrature") {
  data::BumpSpec bump;
  for (double x : {-1.2, -0.3, 0.4}) {
    tangential::BumpGaussTable table(x, bump);
    for (double sigma : {1e-6, 1e-3, 0.05, 0.7, 5.0}) {
      if (sigma < table.sigma_floor()) continue;
      double a[4], b[4];
      table.eval(sigma, a);
      tangential::bump_gauss_direct(x, sigma, bump, b);
      for (int m = 0; m < 4; ++m) CHECK(std::abs(a[m] - b[m]) <= 1e-9 * (1 + std::abs(b[m])));
    }
  }
}

TEST_CASE("L tensor: semigroup route against the direct integral") {
  quad::QuadConfig cfg;
  const auto p = point(0.2, -0.1, 0.3);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(close(l_tensor({i, j}, p, 0.1, cfg), l_tensor_direct({i, j}, p, 0.1, cfg), 1e-6));
    }
}

TEST_CASE("L tensor identities at the reference point") {
  quad::QuadConfig cfg;
  const auto p = point(0.2, -0.1, 0.3);
  const double t = 0.1;
  double trace = 0, scale = 0;
  for (int i = 1; i <= 3; ++i) {
    const double v = l_tensor({i, i}, p, t, cfg).value;
    trace += v;
    scale += std::abs(v);
  }
  const double half = 0.5 * kernels::gaussian<double>(MultiIndex::unit(2), p.full(), t);
  CHECK(std::abs(trace - half) <= 1e-7 * scale);
  CHECK(close(l_tensor({1, 2}, p, t, cfg), l_tensor({2, 1}, p, t, cfg), 1e-9));
  for (int i : {1, 2}) {
    const double lhs = l_tensor({i, 3}, p, t, cfg).value - l_tensor({3, i}, p, t, cfg).value;
    const double b = b_tensor(i, p, t, cfg).value;
    CHECK(std::abs(lhs - b) <= 1e-7 * std::max(std::abs(lhs), std::abs(b)));
  }
}

TEST_CASE("L tensor magnitude bound with one fitted constant") {
  quad::QuadConfig cfg;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.5, 1.5), Xn(0.01, 1.5), T(0.01, 1);
  double C = 0;
  for (int s = 0; s < 50; ++s) {
    const auto p = point(U(rng), U(rng), Xn(rng));
    const double t = T(rng);
    const double bound = 1 / (std::sqrt(t) * std::pow(p.full().squaredNorm() + t, 1.5));
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) {
        if (!TensorIndex{i, j}.has_decay_bound(3)) continue;
        C = std::max(C, std::abs(l_tensor({i, j}, p, t, cfg).value) / bound);
      }
  }
  CHECK(std::isfinite(C));
  CHECK(C < 1.0);
}

TEST_CASE("B tensor: odd symmetry and self-refinement") {
  quad::QuadConfig cfg;
  const double a = b_tensor(1, point(0.4, 0, 0.2), 0.05, cfg).value;
  const double b = b_tensor(1, point(-0.4, 0, 0.2), 0.05, cfg).value;
  CHECK(a == doctest::Approx(-b).epsilon(1e-10));
  CHECK(close(b_tensor(1, point(1, 0, 0.2), 0.05, cfg), b_tensor(1, point(1, 0, 0.2), 0.05, cfg.scaled(0.1)), 1e-7));
}

TEST_CASE("H convolutions: both routes agree") {
  quad::QuadConfig cfg;
  Vecd X(2);
  X << 1.1, -0.4;
  for (double theta : {1e-3, 0.02, 0.3}) {
    for (int i : {1, 2})
      CHECK(close(potentials::h_tangential(i, X, theta, cfg), potentials::h_tangential_semigroup(i, X, theta, cfg), 1e-6));
    for (double xn : {0.01, 0.2})
      CHECK(close(potentials::h_normal(X, xn, theta, cfg), potentials::h_normal_direct(X, xn, theta, cfg), 1e-6));
  }
}

TEST_CASE("A potential: normal derivative, caloric identity and decay") {
  quad::QuadConfig cfg;
  const auto p = point(0.3, -0.2, 0.15);
  for (int i : {1, 2}) {
    const auto A = potentials::a_potential(i, p, 0.2, cfg);
    CHECK(close(A.dxn, b_tensor(i, p, 0.2, cfg), 1e-7));
    CHECK(std::abs(A.caloric.value) <= 1e-6 * std::abs(A.dxn2.value) + 3 * A.caloric.err_estimate);
  }
  double prev = 1e300;
  for (double r : {2.0, 4.0, 8.0}) {
    const double v = std::abs(potentials::a_potential(1, point(r, 0, 0.1), 0.2, cfg).value.value);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("Gamma-convolution decomposition") {
  quad::QuadConfig cfg;
  Vecd X(2);
  X << 0.8, 0.6;
  // t -> 0: the convolution tends to the Newtonian value
  const auto g = potentials::gamma_convolution_decomposition(X, 0.1, 1e-5, cfg);
  CHECK(g.total.value == doctest::Approx(g.newtonian_part).epsilon(1e-3));
  // the small-disc part stays within the exponential band of Definition 2.1
  double lo = 1e300, hi = 0;
  for (double t : {0.01, 0.02, 0.05, 0.1}) {
    const auto d = potentials::gamma_convolution_decomposition(X, 0.1, t, cfg);
    const double I = std::abs(d.i_part.value);
    lo = std::min(lo, I / (std::exp(-X.squaredNorm() / t) / t));
    hi = std::max(hi, I / (std::exp(-X.squaredNorm() / (8 * t)) / t));
  }
  CHECK(lo > 1.0 / 20);
  CHECK(hi < 20);
  CHECK_THROWS_AS(potentials::gamma_convolution_decomposition(X * 0.5, 0.1, 0.1, cfg), std::invalid_argument);
}
