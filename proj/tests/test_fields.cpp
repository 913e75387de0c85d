#include "hsstokes/fields.hpp"
#include "hsstokes/residuals.hpp"

#include <doctest.h>

#include <cmath>

using namespace hsstokes;
using fields::Solution;
using fields::SpaceTimePoint;

namespace {

SpaceTimePoint at(double x1, double x2, double xn, double t) {
  SpaceTimePoint q;
  q.p.x_prime = Vecd(2);
  q.p.x_prime << x1, x2;
  q.p.x_n = xn;
  q.t = t;
  return q;
}

Solution make(double a = 0.3, double alpha = 1.0) {
  data::PhiSpec phi;
  phi.a = a;
  phi.alpha_scale = alpha;
  return Solution(phi, data::BumpSpec{}, quad::QuadConfig{});
}

}  // namespace

TEST_CASE("zero data gives a zero field") {
  auto sol = make(0.3, 0.0);
  const auto q = at(0.1, 0.2, 0.2, 0.9);
  const auto b = sol.evaluate(q);
  for (const auto& v : b.w) {
    CHECK(v.wL.value == 0.0);
    CHECK(v.wB.value == 0.0);
    CHECK(v.wN.value == 0.0);
  }
  CHECK(sol.pressure(q).total.value == 0.0);
}

TEST_CASE("velocity parts") {
  auto sol = make();
  const auto q = at(0.1, -0.2, 0.2, 0.8);
  const auto v3 = sol.velocity(3, q);
  CHECK(v3.wB.value == 0.0);
  const auto v1 = sol.velocity(1, q);
  CHECK(v1.total.value == doctest::Approx(v1.wL.value + v1.wB.value + v1.wN.value));
  CHECK_THROWS_AS(sol.velocity(4, q), std::invalid_argument);
}

TEST_CASE("trace vanishes off the data support") {
  auto sol = make();
  for (double t : {0.7, 1.3}) {
    double prev = 1e300, parts = 0;
    for (int k = 3; k <= 12; k += 3) {
      const auto v = sol.velocity(1, at(0.2, 0.1, std::ldexp(1.0, -k), t));
      parts = std::max({parts, std::abs(v.wL.value), std::abs(v.wB.value), std::abs(v.wN.value)});
      CHECK(std::abs(v.total.value) < prev);
      prev = std::abs(v.total.value);
    }
    CHECK(prev < 1e-2 * parts);
  }
}

TEST_CASE("lower bound and sign before t = 1") {
  auto sol = make(0.5);
  const double d = 0.01;
  const double w = sol.velocity(1, at(0, 0, 0.05, 1 - d)).total.value;
  CHECK(w > 0);
  const double ratio = w / data::phi(0, d, sol.phi());
  CHECK(ratio > 1e-4);
  CHECK(ratio < 20);
}

TEST_CASE("normal derivative matches finite differences of the velocity") {
  auto sol = make();
  const auto q = at(0.1, 0.1, 0.2, 0.8);
  const double h = 1e-3;
  auto w = [&](double xn) { return sol.velocity(1, at(0.1, 0.1, xn, 0.8)).total; };
  const auto wp = w(0.2 + h), wm = w(0.2 - h), wp2 = w(0.2 + h / 2), wm2 = w(0.2 - h / 2);
  const double coarse = (wp.value - wm.value) / (2 * h), fine = (wp2.value - wm2.value) / h;
  const double fd = (4 * fine - coarse) / 3;
  const auto dn = sol.normal_derivative(1, q).total;
  const double err = std::max({wp.err_estimate, wm.err_estimate, wp2.err_estimate, wm2.err_estimate});
  CHECK(std::abs(fd - dn.value) <= std::max(10 * (err / h + dn.err_estimate), 1e-5 * std::abs(dn.value)));

  const auto id = sol.normal_derivative_identity(1, q);
  CHECK(std::abs(id.lhs - id.rhs) <= std::max(1e-6 * std::abs(id.lhs), 3 * id.err_estimate));
}

TEST_CASE("normal derivative in the thin layer after t = 1") {
  auto sol = make();
  double prev = 0;
  for (int k = 7; k <= 15; k += 4) {
    const double d = std::ldexp(1.0, -k);
    const double v = sol.normal_derivative(1, at(0, 0, 0.05 * std::sqrt(d), 1 + d)).total.value;
    CHECK(v < 0);
    CHECK(std::abs(v) > prev);
    prev = std::abs(v);
  }
}

TEST_CASE("pressure parts after t = 1") {
  auto sol = make();
  const auto p = sol.pressure(at(0.1, 0, 0.1, 1.05));
  CHECK(p.p1.value == 0.0);
  CHECK(p.p3.value == 0.0);
  CHECK(p.total.value == doctest::Approx(p.p1.value + p.p21.value + p.p22.value + p.p3.value));
}

TEST_CASE("w^N brackets phi(1-t) before t = 1") {
  auto sol = make();
  double lo = 1e300, hi = 0;
  for (int k = 4; k <= 20; k += 4) {
    const double d = std::ldexp(1.0, -k);
    const double r = sol.velocity(1, at(0.2, -0.1, 0.1, 1 - d)).wN.value / data::phi(0, d, sol.phi());
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  // one fitted constant c = sqrt(hi lo); the bracket constant is then sqrt(hi / lo)
  CHECK(lo > 0);
  CHECK(std::sqrt(hi / lo) <= 20);
}

TEST_CASE("PDE residuals at an interior point and linearity in the amplitude") {
  auto sol = make();
  const auto q = at(0.1, 0.1, 0.2, 0.8);
  const auto r = fields::pde_residuals(sol, q, 1e-2);
  CHECK(r.verdict != fields::Verdict::Fail);
  CHECK(std::abs(r.divergence) <= r.divergence_budget);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.momentum[i]) <= r.momentum_budget[i]);

  auto sol2 = make(0.3, 2.0);
  const auto r2 = fields::pde_residuals(sol2, q, 1e-2);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(r2.momentum[i] - 2 * r.momentum[i]) <= r2.momentum_budget[i] + 2 * r.momentum_budget[i]);
  CHECK(std::abs(r2.divergence - 2 * r.divergence) <= r2.divergence_budget + 2 * r.divergence_budget);

  CHECK_THROWS_AS(fields::pde_residuals(sol, at(0, 0, 0.02, 0.8), 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(fields::pde_residuals(sol, at(0, 0, 0.2, 0.999), 1e-2), std::invalid_argument);
}

TEST_CASE("test field: divergence free, vanishing on the boundary") {
  Vecd c(2);
  c << -0.7, -0.7;
  fields::TestField tf(3, c, 0.3, 0.3, 0.7, 0.15);
  for (double x1 : {-0.85, -0.7, -0.5})
    for (double xn : {0.05, 0.15, 0.25})
      for (double t : {0.6, 0.7, 0.8}) {
        Vecd x(3);
        x << x1, -0.65, xn;
        const Vecd v = tf.value(x, t);
        CHECK(std::abs(tf.divergence(x, t)) <= 1e-12 * (1 + v.norm()));
      }
  Vecd b(3);
  b << -0.7, -0.6, 0.0;
  CHECK(tf.value(b, 0.7).norm() == 0.0);
  Vecd out(3);
  out << 0.0, 0.0, 0.2;
  CHECK(tf.value(out, 0.7).norm() == 0.0);
}
