#include "hsstokes/asymptotics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hsstokes;
using namespace hsstokes::asymptotics;

namespace {

PsiQuery query(double a, double alpha, int k, double t, double x_n = 0.1) {
  PsiQuery q;
  q.phi.a = a;
  q.alpha = alpha;
  q.k = k;
  q.t = t;
  q.x_n = x_n;
  return q;
}

}  // namespace

TEST_CASE("time integral of a constant profile") {
  PsiIntegrand f;
  f.profile = [](double) { return 1.0; };
  const auto r = psi_integral(f, 0.5, 2.0, 0.1, false, false, quad::QuadConfig{});
  CHECK(r.value == doctest::Approx(2 * (std::sqrt(2.0) - 1)).epsilon(1e-10));
}

TEST_CASE("time integral against the frozen high-precision value") {
  // Power a = 0.7, alpha = 0.5, k = 0, t = 1.01; tests/oracles/frozen_values.py
  const auto r = psi_numeric(query(0.7, 0.5, 0, 1.01), false, quad::QuadConfig{});
  CHECK(r.value == doctest::Approx(13.974965566876562004).epsilon(1e-7));
}

TEST_CASE("sign of the derivative integral") {
  for (double t : {0.9, 0.99, 1.01})
    CHECK(psi_numeric(query(0.3, 0.5, 1, t), false, quad::QuadConfig{}).value < 0);
}

TEST_CASE("predicted regimes") {
  const double e = 1e-4;
  // alpha + a > 1: (t-1)^{1-alpha} phi(t-1)
  const double r1 = psi_predicted(query(0.7, 0.5, 0, 1 + e), false).value /
                    psi_predicted(query(0.7, 0.5, 0, 1 + 2 * e), false).value;
  CHECK(r1 == doctest::Approx(std::pow(2.0, 0.2)));
  // alpha + a < 1: bounded
  CHECK(psi_predicted(query(0.3, 0.5, 0, 1 + e), false).value ==
        doctest::Approx(psi_predicted(query(0.3, 0.5, 0, 1 + 2 * e), false).value));
  // k = 1, t < 1: (1-t)^{1-alpha} phi'(1-t)
  const auto q = query(0.3, 0.5, 1, 1 - e);
  CHECK(psi_predicted(q, false).value / (std::pow(e, 0.5) * data::phi(1, e, q.phi)) ==
        doctest::Approx(psi_predicted(query(0.3, 0.5, 1, 1 - 4 * e), false).value /
                        (std::pow(4 * e, 0.5) * data::phi(1, 4 * e, q.phi))));
}

TEST_CASE("query validation") {
  CHECK_THROWS_AS(query(0.3, 0.5, 2, 0.9).validate(), std::invalid_argument);
  CHECK_THROWS_AS(query(0.3, 1.0, 0, 0.9).validate(), std::invalid_argument);
  CHECK_THROWS_AS(query(0.5, 0.5, 0, 0.9).validate(), std::invalid_argument);
  CHECK_THROWS_AS(query(0.3, 0.5, 0, 0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(query(0.3, 0.5, 0, 0.9, 0.6).validate(), std::invalid_argument);
  CHECK_NOTHROW(query(0.3, 0.5, 0, 0.9).validate());
}

TEST_CASE("region labels") {
  RegionParams p{0.125, 0.0625, 0.2, 10};
  CHECK(classify_region(0.01, 0.99, p) == Region::TildeDPlus);
  CHECK(classify_region(0.3, 1.0004, p) == Region::TildeDMinus);
  CHECK(classify_region(0.7 * std::sqrt(0.01), 1.01, p) == Region::DZero);
  CHECK(classify_region(0.3, 1.5, p) == Region::Outside);
}

TEST_CASE("regions partition and nest on a random sample") {
  RegionParams p{1.0 / 32, 1.0 / 64, 0.1, 10};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> X(1e-4, 0.5), T(1 - 0.04, 1 + 0.04);
  for (int s = 0; s < 10000; ++s) {
    const double x = X(rng), t = T(rng);
    if (t == 1) continue;
    const bool base = std::abs(t - 1) < p.t0;
    const bool plus = in_region(Region::DPlus, x, t, p), minus = in_region(Region::DMinus, x, t, p);
    CHECK((plus != minus) == base);
    CHECK(in_region(Region::Outside, x, t, p) == !base);
    if (in_region(Region::TildeDPlus, x, t, p)) CHECK(plus);
    if (in_region(Region::DZero, x, t, p)) CHECK(plus);
    if (in_region(Region::TildeDMinus, x, t, p)) CHECK(minus);
    const Region r = classify_region(x, t, p);
    CHECK(in_region(r, x, t, p));
  }
}

TEST_CASE("rate predictions") {
  data::PhiSpec phi;
  const auto a = predicted_rate(Quantity::DxnW, Region::TildeDPlus, Side::Before, phi);
  CHECK(a.kind == RateKind::Power);
  CHECK(a.exponent == doctest::Approx(-0.8));
  CHECK(a.variable == Variable::OneMinusT);
  const auto b = predicted_rate(Quantity::P, Region::DZero, Side::After, phi);
  CHECK(b.exponent == doctest::Approx(-0.3));
  CHECK(b.sign == -1);
  phi.family = data::PhiFamily::LogDecay;
  CHECK(predicted_rate(Quantity::W, Region::DPlus, Side::Before, phi).kind == RateKind::Bounded);
  CHECK_FALSE(predicted_rate(Quantity::W, Region::Outside, Side::Before, phi).covered());
}

TEST_CASE("profile inequalities on the wedge") {
  data::PhiSpec phi;
  double c = 0;
  for (int j = 1; j < 40; ++j)
    for (int k = 8; k < 60; ++k) {
      const double x = std::ldexp(std::pow(2.0, -0.25 * j), -2), t = std::pow(2.0, -0.5 * k);
      if (std::sqrt(t) < x) c = std::max(c, profile_decay_ratio(0, t, x, 0.25, phi));
    }
  CHECK(c < 2);
  CHECK(profile_smallness_ratio(1e-6, 0.01, 0.25, phi) > profile_smallness_ratio(1e-6, 0.02, 0.25, phi));
}
