#include "hsstokes/verify.hpp"

#include <doctest.h>

#include <cmath>

using namespace hsstokes;
using namespace hsstokes::verify;
using asymptotics::Quantity;

namespace {

std::vector<Sample> power_law(double c, double e, int n = 12, double lo = 1e-6, double hi = 1e-1) {
  std::vector<Sample> s;
  for (int i = 0; i < n; ++i) {
    const double x = lo * std::pow(hi / lo, double(i) / (n - 1));
    s.push_back({x, c * std::pow(x, e)});
  }
  return s;
}

}  // namespace

TEST_CASE("fit_rate is exact on pure power laws") {
  for (double e : {-1.6, -0.3, 0.0, 0.8}) {
    const auto f = fit_rate(power_law(-2.5, e), e);
    CHECK(std::abs(f.slope - e) < 1e-12);
    CHECK(f.pass);
    CHECK(f.n_points == 12);
  }
  CHECK(fit_rate(power_law(1, -1.6), -1.6).r_squared == doctest::Approx(1.0));
}

TEST_CASE("fit_rate preconditions") {
  CHECK_THROWS_AS(fit_rate(power_law(1, -1, 5), -1), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(power_law(1, -1, 12, 1e-3, 1e-1), -1), std::invalid_argument);
  auto s = power_law(1, -1);
  s[3].second = -s[3].second;
  CHECK_THROWS_AS(fit_rate(s, -1), std::invalid_argument);
  s = power_law(1, -1);
  s[2].second = 0;
  CHECK_THROWS_AS(fit_rate(s, -1), std::invalid_argument);
  CHECK_FALSE(fit_rate(power_law(1, -1.3), -1.6).pass);
}

TEST_CASE("bracket_check") {
  auto model = [](double x) { return std::pow(x, -0.5); };
  std::vector<Sample> s;
  for (double x : {1e-4, 1e-3, 1e-2}) s.push_back({x, model(x)});
  auto r = bracket_check(s, model);
  CHECK(r.C == doctest::Approx(1.0));
  CHECK(r.pass);

  std::vector<Sample> wobble;
  for (double x : {1e-4, 1e-3, 1e-2, 1e-1}) wobble.push_back({x, model(x) * (1 + 3 * x)});
  const double C = bracket_check(wobble, model).C;
  for (double k : {1e-3, 7.0, 1e5}) {
    std::vector<Sample> scaled;
    for (auto [x, v] : wobble) scaled.push_back({x, k * v});
    CHECK(bracket_check(scaled, [&](double x) { return k * model(x); }).C == doctest::Approx(C));
  }

  s[1].second = -s[1].second;
  r = bracket_check(s, model);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.sign_ok);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK_THROWS_AS(bracket_check(s, [](double x) { return x - 1e-3; }), std::invalid_argument);
}

TEST_CASE("term classification") {
  LpScanConfig cfg;
  std::vector<double> grow, decay, slow;
  for (int k = 0; k < 40; ++k) {
    grow.push_back(std::pow(1.3, k));
    decay.push_back(std::pow(0.7, k));
    slow.push_back(1 / std::sqrt(k + 1.0));
  }
  CHECK(classify_terms(1, grow, cfg).verdict == LpVerdict::Diverging);
  CHECK(classify_terms(1, decay, cfg).verdict == LpVerdict::Converging);
  CHECK(classify_terms(1, slow, cfg).verdict == LpVerdict::Diverging);
}

TEST_CASE("L^p scans: critical exponents and monotone verdicts") {
  data::PhiSpec phi;
  LpScanConfig cfg;
  const double crit = 3 / (1 + 2 * phi.a);
  std::vector<double> ps;
  for (double f : {0.5, 0.9, 1.1, 2.0}) ps.push_back(f * crit);
  const auto r = lp_scan(Quantity::DxnW, ps, phi, cfg);
  CHECK(r.monotone);
  CHECK(r.critical_p == doctest::Approx(crit).epsilon(0.05));
  const auto rp = lp_scan(Quantity::P, std::vector<double>{0.5, 0.7, 0.85, 1.2}, phi, cfg);
  CHECK(rp.monotone);
  CHECK(rp.critical_p == doctest::Approx(1 / (1 + phi.a)).epsilon(0.05));

  phi.family = data::PhiFamily::LogGrowth;
  const auto g = lp_scan(Quantity::DxnW, std::vector<double>{2.5, 3.0}, phi, cfg);
  CHECK(g.points[0].verdict == LpVerdict::Converging);
  CHECK(g.points[1].verdict == LpVerdict::Diverging);
  CHECK(g.monotone);
}

TEST_CASE("L^p profile models") {
  data::PhiSpec phi;
  CHECK(lp_profile(Quantity::W, phi, 0.1, 1e-4, asymptotics::Side::Before) == doctest::Approx(std::pow(1e-4, -0.3)));
  phi.family = data::PhiFamily::LogDecay;
  CHECK(lp_profile(Quantity::W, phi, 0.1, 1e-4, asymptotics::Side::After) == 1.0);
  CHECK(lp_source_from_string(to_string(LpSource::Measured)) == LpSource::Measured);
  CHECK_THROWS(lp_source_from_string("guess"));
}
