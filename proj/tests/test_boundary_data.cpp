#include "hsstokes/boundary_data.hpp"
#include "hsstokes/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace hsstokes;
using data::PhiFamily;
using data::PhiSpec;

namespace {

PhiSpec spec(PhiFamily f, double a = 0.3) {
  PhiSpec p;
  p.family = f;
  p.a = a;
  return p;
}

}  // namespace

TEST_CASE("profile point values") {
  CHECK(data::phi(0, 0.25, spec(PhiFamily::Power, 0.5)) == doctest::Approx(2.0));
  CHECK(data::phi(0, std::exp(-2.0), spec(PhiFamily::LogGrowth)) == doctest::Approx(2.0));
  CHECK(data::phi(1, 0.1, spec(PhiFamily::Power, 0.3)) == doctest::Approx(-0.3 * std::pow(0.1, -1.3)));
  CHECK(data::phi(0, 0.8, spec(PhiFamily::Power)) == 0.0);
  CHECK_THROWS_AS(data::phi(0, 0.0, spec(PhiFamily::Power)), std::domain_error);
  CHECK_THROWS_AS(data::phi(3, 0.1, spec(PhiFamily::Power)), std::invalid_argument);
}

TEST_CASE("temporal factor of the data") {
  const auto p = spec(PhiFamily::Power, 0.5);
  CHECK(data::g_temporal(0, 1.2, p) == 0.0);
  CHECK(data::g_temporal(0, 0.75, p) == doctest::Approx(2.0));
  CHECK(data::g_temporal(1, 0.75, p) == doctest::Approx(0.5 * std::pow(0.25, -1.5)));
}

TEST_CASE("doubling: phi^(k)(s) / phi^(k)(2s) stays in a fixed bracket") {
  for (auto f : {PhiFamily::Power, PhiFamily::LogGrowth, PhiFamily::LogDecay})
    for (int k : {0, 1}) {
      double lo = 1e300, hi = 0;
      for (int j = 2; j <= 40; ++j) {
        const double s = std::ldexp(1.0, -j);
        const double r = data::phi(k, s, spec(f)) / data::phi(k, 2 * s, spec(f));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      CHECK(lo > 0);
      CHECK(hi / lo < 4);  // empirical c: at most 2^{1+a} for the power family
    }
}

TEST_CASE("sign structure and smooth matching across the cutoff") {
  for (auto f : {PhiFamily::Power, PhiFamily::LogGrowth, PhiFamily::LogDecay}) {
    const auto p = spec(f);
    const int expected = f == PhiFamily::LogDecay ? 1 : -1;
    for (double s = 1e-6; s < 1; s *= 1.3) {
      CHECK(data::phi(0, s, p) >= 0);
      if (s < p.cutoff_inner) CHECK(data::phi(1, s, p) * expected > 0);
    }
    for (double edge : {p.cutoff_inner, p.cutoff_outer})
      for (int k : {0, 1}) {
        const double l = data::phi(k, edge - 1e-9, p), r = data::phi(k, edge + 1e-9, p);
        CHECK(std::abs(l - r) <= 1e-6 * (1 + std::abs(l)));
      }
  }
}

TEST_CASE("integral laws for the profiles") {
  quad::QuadConfig cfg;
  for (auto f : {PhiFamily::Power, PhiFamily::LogGrowth, PhiFamily::LogDecay})
    for (double al : {0.3, 0.5, 1.5}) {
      const auto p = spec(f);
      if (f == PhiFamily::Power && std::abs(al + p.a - 1) < 1e-12) continue;
      double lo0 = 1e300, hi0 = 0, lo1 = 1e300, hi1 = 0, lo2 = 1e300, hi2 = 0;
      // the LogDecay derivative law only takes over below about 2^-12
      for (int j = 12; j <= 40; j += 2) {
        const double e = std::ldexp(1.0, -j);
        auto cut = cfg;
        const double i0 = quad::integrate_1d([&](double s) { return std::pow(s, -al) * data::phi(0, s, p); }, e, 1, cut,
                                             std::vector<double>{p.cutoff_inner, p.cutoff_outer})
                              .value;
        const double i1 = quad::integrate_1d([&](double s) { return std::pow(s, -al) * data::phi(1, s, p); }, e, 1, cut,
                                             std::vector<double>{p.cutoff_inner, p.cutoff_outer})
                              .value;
        auto hinted = cfg;
        hinted.singular_endpoint_map = {{0.0, f == PhiFamily::Power ? -p.a : 0.0}};
        const double i2 = quad::integrate_1d([&](double s) { return data::phi(0, s, p); }, 0, e, hinted).value;
        const double r0 = i0 / std::max(1.0, std::pow(e, 1 - al) * data::phi(0, e, p));
        const double r1 = i1 / (std::pow(e, 1 - al) * data::phi(1, e, p));
        const double r2 = i2 / (e * data::phi(0, e, p));
        lo0 = std::min(lo0, r0), hi0 = std::max(hi0, r0);
        lo1 = std::min(lo1, r1), hi1 = std::max(hi1, r1);
        lo2 = std::min(lo2, r2), hi2 = std::max(hi2, r2);
      }
      CAPTURE(al);
      CAPTURE(static_cast<int>(f));
      CHECK(lo0 > 0);
      CHECK(hi0 / lo0 < 20);
      CHECK(lo2 > 0);
      CHECK(hi2 / lo2 < 20);
      CHECK(lo1 > 0);
      CHECK(hi1 / lo1 < 20);
    }
}

TEST_CASE("spatial bump") {
  data::BumpSpec b;
  const int dim = b.tangential_dim();
  Vecd center = Vecd::Constant(dim, -b.center());
  Vecd far = Vecd::Constant(dim, 0.5);
  CHECK(data::g_spatial(MultiIndex(), far, b) == 0.0);
  CHECK(data::g_spatial(MultiIndex(1), far, b) == 0.0);
  CHECK(data::g_spatial(MultiIndex(), center, b) > 0);
  CHECK(std::abs(data::g_spatial(MultiIndex(1), center, b)) < 1e-12);
  CHECK(std::abs(data::g_spatial(MultiIndex(0, 1), center, b)) < 1e-12);
  data::SupportSetA A{b.n};
  CHECK(A.contains(center));
  CHECK_FALSE(A.contains(far));

  // integral over the support by iterated quadrature at two tolerances
  quad::QuadConfig cfg;
  const double c = -b.center(), hw = b.half_width();
  quad::Box box{Eigen::VectorXd::Constant(dim, c - hw), Eigen::VectorXd::Constant(dim, c + hw)};
  auto f = [&](const Eigen::VectorXd& y) { return data::g_spatial(MultiIndex(), Vecd(y), b); };
  const auto r1 = quad::integrate_nd(f, box, Eigen::VectorXd::Constant(dim, c), hw, cfg);
  const auto r2 = quad::integrate_nd(f, box, Eigen::VectorXd::Constant(dim, c), hw, cfg.scaled(0.5));
  CHECK(r1.value > 0);
  CHECK(std::abs(r1.value - r2.value) <= r1.err_estimate + r2.err_estimate + 1e-12);
}

TEST_CASE("spec validation") {
  auto p = spec(PhiFamily::Power, 1.2);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(data::phi_family_from_string("Linear"), std::invalid_argument);
  CHECK(data::phi_family_from_string(data::to_string(PhiFamily::LogDecay)) == PhiFamily::LogDecay);
}
