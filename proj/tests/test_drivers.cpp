#include "hsstokes/drivers.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace hsstokes;
using namespace hsstokes::drivers;

TEST_CASE("named random streams") {
  auto a = make_rng(5, "kernel"), b = make_rng(5, "kernel"), c = make_rng(5, "residuals");
  const double x = uniform(a, 0, 1);
  CHECK(x == uniform(b, 0, 1));
  CHECK(x != uniform(c, 0, 1));
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform(a, -2, 3);
    CHECK(u >= -2);
    CHECK(u < 3);
  }
}

TEST_CASE("usage errors") {
  config::RunConfig cfg;
  std::ostringstream log;
  CHECK_THROWS_AS(run("eval", cfg, log), UsageError);
  CHECK_THROWS_AS(run("plot", cfg, log), UsageError);
  cfg.quad.rel_tol = -1;
  CHECK_THROWS_AS(run("rates", cfg, log), config::ConfigError);
}

TEST_CASE("eval writes one row per component") {
  config::RunConfig cfg;
  cfg.output_dir = (std::filesystem::temp_directory_path() / "hsstokes_eval_test").string();
  cfg.eval_points = config::parse_points("0.1,0,0.2,0.9", 3);
  std::ostringstream log;
  CHECK(run("eval", cfg, log) == 0);
  const auto body = csv::read_body(cfg.output_dir + "/eval.csv");
  CHECK(std::count(body.begin(), body.end(), '\n') == 1 + 6);
  std::filesystem::remove_all(cfg.output_dir);
}

TEST_CASE("kernel identities on a small sample") {
  config::RunConfig cfg;
  cfg.kernel_points = 2;
  const auto checks = kernel_identities(cfg);
  REQUIRE(checks.size() == 2);
  for (const auto& c : checks) CHECK(c.pass);
}
