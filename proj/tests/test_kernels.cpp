#include "hsstokes/kernels.hpp"
#include "hsstokes/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hsstokes;
using kernels::gaussian;
using kernels::newtonian;

namespace {

Vecd vec(std::initializer_list<double> v) {
  Vecd x(static_cast<long>(v.size()));
  long i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

// Richardson-extrapolated central difference of f along coordinate c.
template <class F>
double fd(F f, Vecd x, int c, double h) {
  auto central = [&](double s) {
    Vecd p = x, m = x;
    p[c] += s;
    m[c] -= s;
    return (f(p) - f(m)) / (2 * s);
  };
  return (4 * central(h / 2) - central(h)) / 3;
}

}  // namespace

TEST_CASE("heat kernel point values") {
  CHECK(kernels::gauss1d(0, 0.0, 1 / (4 * std::numbers::pi)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gaussian<double>(MultiIndex(1), vec({1.0}), 1.0) == doctest::Approx(-0.5 / std::sqrt(4 * std::numbers::pi) * std::exp(-0.25)));
  CHECK(gaussian<double>(MultiIndex(), vec({0.3, 0.1}), 0.0) == 0.0);
  CHECK(gaussian<double>(MultiIndex(), vec({0.3, 0.1}), -1.0) == 0.0);
}

TEST_CASE("heat kernel normalization in d = 1, 2, 3") {
  quad::QuadConfig cfg;
  for (int d = 1; d <= 3; ++d)
    for (double t : {0.1, 1.0}) {
      quad::Box box{Eigen::VectorXd::Constant(d, -quad::kInf), Eigen::VectorXd::Constant(d, quad::kInf)};
      const auto r = quad::integrate_nd(
          [&](const Eigen::VectorXd& x) { return gaussian<double>(MultiIndex(), Vecd(x), t); }, box,
          Eigen::VectorXd::Zero(d), std::sqrt(2 * t), cfg);
      CHECK(r.value == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("heat equation: analytic time derivative equals the Laplacian") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.5, 1.5), T(0.05, 2);
  for (int s = 0; s < 50; ++s) {
    const Vecd x = vec({U(rng), U(rng), U(rng)});
    const double t = T(rng);
    double lap = 0;
    for (int c = 0; c < 3; ++c) lap += gaussian<double>(MultiIndex::unit(c, 2), x, t);
    const double dt = kernels::gaussian_dt<double>(x, t);
    CHECK(std::abs(dt - lap) <= 1e-12 * (std::abs(dt) + std::abs(lap)) + 1e-300);
  }
}

TEST_CASE("Newtonian potential values and harmonicity") {
  CHECK(newtonian<double>(MultiIndex(), vec({1, 0, 0})) == doctest::Approx(-1 / (4 * std::numbers::pi)));
  CHECK(newtonian<double>(MultiIndex(), vec({0.6, 0.8})) == doctest::Approx(0.0));
  CHECK(3 * 1 * kernels::unit_ball_volume<double>(3) == doctest::Approx(4 * std::numbers::pi));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int n : {2, 3})
    for (int s = 0; s < 30; ++s) {
      Vecd x(n);
      for (int c = 0; c < n; ++c) x[c] = U(rng);
      double tr = 0, scale = 0;
      for (int c = 0; c < n; ++c) {
        const double v = newtonian<double>(MultiIndex::unit(c, 2), x);
        tr += v;
        scale += std::abs(v);
      }
      CHECK(std::abs(tr) <= 1e-12 * scale);
    }
  CHECK_THROWS_AS(newtonian<double>(MultiIndex(), vec({0, 0, 0})), std::domain_error);
}

TEST_CASE("first derivatives match Richardson finite differences") {
  const Vecd x = vec({0.4, -0.3, 0.7});
  for (int c = 0; c < 3; ++c) {
    for (double t : {0.2, 1.0}) {
      auto g = [&](const Vecd& y) { return gaussian<double>(MultiIndex(), y, t); };
      const double exact = gaussian<double>(MultiIndex::unit(c), x, t);
      CHECK(fd(g, x, c, 1e-3) == doctest::Approx(exact).epsilon(1e-8));
      // second-order derivative from the first
      auto g1 = [&](const Vecd& y) { return gaussian<double>(MultiIndex::unit(c), y, t); };
      CHECK(fd(g1, x, c, 1e-3) == doctest::Approx(gaussian<double>(MultiIndex::unit(c, 2), x, t)).epsilon(1e-7));
    }
    auto N = [](const Vecd& y) { return newtonian<double>(MultiIndex(), y); };
    CHECK(fd(N, x, c, 1e-3) == doctest::Approx(newtonian<double>(MultiIndex::unit(c), x)).epsilon(1e-8));
  }
}

TEST_CASE("kernel argument validation") {
  CHECK_THROWS_AS(kernels::gauss1d(4, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian<double>(MultiIndex(2, 2), vec({0.1, 0.2}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian<double>(MultiIndex(0, 0, 1), vec({0.1, 0.2}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(newtonian<double>(MultiIndex(1, 1, 1), vec({1, 1, 1})), std::invalid_argument);
}
