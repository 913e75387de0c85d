#include "hsstokes/quadrature.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace hsstokes;
using quad::integrate_1d;

TEST_CASE("closed-form 1-D integrals") {
  quad::QuadConfig cfg;
  CHECK(integrate_1d([](double) { return 1.0; }, 0, 1, cfg).value == doctest::Approx(1.0).epsilon(1e-12));

  auto hinted = cfg;
  hinted.singular_endpoint_map = {{0.0, -0.5}};
  const auto r = integrate_1d([](double s) { return 1 / std::sqrt(s); }, 0, 1, hinted);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));

  CHECK(integrate_1d([](double s) { return std::exp(-s); }, 0, quad::kInf, cfg).value ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("singular product against the frozen high-precision value") {
  // u^{-0.7} (0.01+u)^{-1/2} on [0,1], i.e. (1-s)^{-0.7} (1.01-s)^{-1/2};
  // reference from tests/oracles/frozen_values.py
  constexpr double reference = 14.467454983394181624;
  quad::QuadConfig cfg;
  cfg.singular_endpoint_map = {{0.0, -0.7}};
  const auto breaks = quad::geometric_points(0.0, 1.0, 1e-6);
  const auto r = integrate_1d([](double u) { return std::pow(u, -0.7) / std::sqrt(0.01 + u); }, 0, 1, cfg, breaks);
  CHECK(r.converged);
  CHECK(std::abs(r.value - reference) <= std::max(10 * r.err_estimate, 1e-10 * reference));

  // Same integral with the singularity at s = 1 and a piece of length 1e-6
  // next to it: nodes there round onto the endpoint, so the result is either
  // accurate or flagged with an error estimate that covers the miss.
  cfg.singular_endpoint_map = {{1.0, -0.7}};
  std::vector<double> mirrored;
  for (double p : breaks) mirrored.push_back(1 - p);
  std::sort(mirrored.begin(), mirrored.end());
  const auto m = integrate_1d([](double s) { return std::pow(1 - s, -0.7) / std::sqrt(1.01 - s); }, 0, 1, cfg, mirrored);
  CHECK(std::abs(m.value - reference) <= m.err_estimate);
  if (m.converged) CHECK(std::abs(m.value - reference) <= 1e-6 * reference);
}

TEST_CASE("odd integrand over a symmetric truncated box") {
  quad::QuadConfig cfg;
  quad::Box box{Eigen::Vector2d(-quad::kInf, 0), Eigen::Vector2d(quad::kInf, 1)};
  const auto r = quad::integrate_nd(
      [](const Eigen::VectorXd& z) { return z[0] * std::exp(-z[0] * z[0]) * (1 + z[1]); }, box, Eigen::Vector2d(0, 0.5),
      1.0, cfg);
  CHECK(std::abs(r.value) <= 1e-9);
}

TEST_CASE("tolerance refinement stays within the error estimates") {
  auto f = [](double s) { return std::pow(s, -0.3) * std::cos(5 * s); };
  quad::QuadConfig cfg;
  cfg.singular_endpoint_map = {{0.0, -0.3}};
  const auto coarse = integrate_1d(f, 0, 2, cfg);
  const auto fine = integrate_1d(f, 0, 2, cfg.scaled(0.1));
  CHECK(std::abs(coarse.value - fine.value) <= coarse.err_estimate + fine.err_estimate + 1e-14);
}

TEST_CASE("Gaussian tail truncation is below abs_tol") {
  quad::QuadConfig a, b;
  a.tail_sigma = 8;
  b.tail_sigma = 12;
  auto f = [](const Eigen::VectorXd& z) { return std::exp(-z.squaredNorm() / 4) * (1 + 0.1 * z[0]); };
  quad::Box box{Eigen::Vector2d::Constant(-quad::kInf), Eigen::Vector2d::Constant(quad::kInf)};
  const double va = quad::integrate_nd(f, box, Eigen::Vector2d::Zero(), std::sqrt(2.0), a).value;
  const double vb = quad::integrate_nd(f, box, Eigen::Vector2d::Zero(), std::sqrt(2.0), b).value;
  CHECK(std::abs(va - vb) < a.abs_tol);
}

TEST_CASE("linearity") {
  quad::QuadConfig cfg;
  auto f = [](double s) { return std::sin(3 * s) / (1 + s * s); };
  auto g = [](double s) { return std::exp(-s) * s; };
  const auto rf = integrate_1d(f, 0, 4, cfg), rg = integrate_1d(g, 0, 4, cfg);
  const auto rc = integrate_1d([&](double s) { return 2.5 * f(s) - 1.5 * g(s); }, 0, 4, cfg);
  CHECK(std::abs(rc.value - (2.5 * rf.value - 1.5 * rg.value)) <=
        rc.err_estimate + 2.5 * rf.err_estimate + 1.5 * rg.err_estimate + 1e-14);
}

TEST_CASE("NaN is fatal, non-convergence is reported") {
  quad::QuadConfig cfg;
  CHECK_THROWS_AS(integrate_1d([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0, 1, cfg),
                  std::runtime_error);
  cfg.max_subdivisions = 1;
  cfg.rel_tol = 1e-14;
  cfg.abs_tol = 0;
  const auto r = integrate_1d([](double s) { return std::sin(200 * s); }, 0, 10, cfg);
  CHECK_FALSE(r.converged);
}

TEST_CASE("vector integration and Gauss-Legendre rules") {
  quad::QuadConfig cfg;
  const auto r = quad::integrate_1d_vec(
      [](double s, Eigen::Ref<Eigen::VectorXd> out) {
        out[0] = s;
        out[1] = s * s;
      },
      2, 0, 1, cfg);
  CHECK(r.value[0] == doctest::Approx(0.5));
  CHECK(r.value[1] == doctest::Approx(1.0 / 3));
  const auto& gl = quad::gauss_legendre(5);
  double s = 0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 8);
  CHECK(s == doctest::Approx(2.0 / 9).epsilon(1e-14));
  CHECK_THROWS_AS(quad::gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("config validation") {
  quad::QuadConfig cfg;
  cfg.rel_tol = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.singular_endpoint_map = {{0.0, -1.0}};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
