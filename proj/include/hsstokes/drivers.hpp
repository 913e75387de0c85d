#pragma once

#include "hsstokes/asymptotics.hpp"
#include "hsstokes/config.hpp"
#include "hsstokes/csv.hpp"
#include "hsstokes/fields.hpp"
#include "hsstokes/residuals.hpp"
#include "hsstokes/verify.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsstokes::drivers {

using config::RunConfig;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Independent deterministic stream per named check.
std::mt19937_64 make_rng(std::uint64_t seed, const std::string& check);
// Uniform in [lo, hi) from the top 53 bits, identical on every platform.
double uniform(std::mt19937_64& rng, double lo, double hi);

// One row of the generic check tables.
struct Check {
  std::string check;
  std::string item;
  double value = 0;
  double limit = 0;
  bool pass = false;
};

// Trace, symmetry and L_in = L_ni + B_in at random (x, t), x in B+_2,
// t in (0.01, 1); L from the direct n-dimensional integral. value is the
// largest relative deviation at the point.
std::vector<Check> kernel_identities(const RunConfig& cfg);

enum class PsiVariant { Plain, TildeTime, TildeNormal };
std::string to_string(PsiVariant v);

struct PsiCell {
  data::PhiSpec phi;
  double alpha = 0;
  int k = 0;
  asymptotics::Side side = asymptotics::Side::Before;
  PsiVariant variant = PsiVariant::Plain;
  bool gated = true;
  double slope = 0;
  double predicted_slope = 0;
  double C = 0;
  double delta = 0;
  bool pass = false;
  std::string label() const;
};

// Ratio and slope tests of the model time integrals over |t-1| = 2^-6..2^-20.
// The plain variant (or the tilde one on x_n^2 = |t-1|/16 where the plain one
// is undefined) and the tilde variant on x_n^2 = |t-1|/16 are gated; the tilde
// variant on x_n^2 = 4|t-1| is reported only.
std::vector<PsiCell> psi_cells(const RunConfig& cfg);

// Elementary profile inequalities on the wedge sqrt(t) < x_n < 1/4.
std::vector<Check> profile_inequalities(const RunConfig& cfg);

struct J1Fit {
  double C_a = 0, C_b = 0;
  double spread = 0;  // |C_a - C_b| / max(C_a, C_b)
  bool pass = false;
};
// |J1| <= C x_n t^{1/2}: C fitted on two disjoint grids over x_n in [0.05, 0.4],
// t in [0.01, 0.2].
J1Fit j1_constant(const RunConfig& cfg);

struct ConvolutionBrackets {
  double t0 = 0;
  double c1_tangential = 0, c2_tangential = 0;
  double c1_normal = 0, c2_normal = 0;
  int samples = 0;
  double worst_ratio() const;
};
// Two-sided bounds of the tangential convolutions for |x'| <= 1/2, y' in the
// data support and 0 < t - s < t0; the normal one relative to
// x_n + tau^{-(n-1)/2} exp(-1/tau).
ConvolutionBrackets convolution_brackets(const RunConfig& cfg, double t0);

struct Calibration {
  asymptotics::RegionParams params;
  std::vector<ConvolutionBrackets> t0_trials;
  std::vector<std::pair<double, double>> eps1_trials;  // (eps1, margin)
  bool t0_found = false;
  bool eps1_found = false;
};
// Largest dyadic t0 <= 1/4 with c2/c1 <= 10, t1 = t0/2, and the smallest eps1 in
// {10, 20, 40, 80} whose lower bound for t < 1 holds with margin 0.05.
Calibration calibrate_regions(fields::Solution& sol, const RunConfig& cfg);

// Upper bound, sign and magnitude statements for w and the boundedness
// dichotomy of the logarithmic families on a blow-up sample.
std::vector<Check> theorem_bounds(fields::Solution& sol, const RunConfig& cfg);

struct RateSweep {
  asymptotics::Region region = asymptotics::Region::Outside;
  bool any_region = false;
  asymptotics::Quantity quantity = asymptotics::Quantity::W;
  asymptotics::Side side = asymptotics::Side::Before;
  asymptotics::Variable variable = asymptotics::Variable::None;
  double predicted = 0;  // exponent, or the fitted slope of the predicted expression
  verify::RateFit fit;
  int expected_sign = 0;
  bool sign_ok = true;
  bool pass = false;
  std::vector<verify::Sample> samples;
  std::string error;
  std::string region_label() const;
};
std::vector<RateSweep> rate_sweeps(fields::Solution& sol, const RunConfig& cfg);

struct LpCase {
  asymptotics::Quantity quantity = asymptotics::Quantity::W;
  std::vector<double> p_list;
  std::map<double, verify::LpVerdict> expected_verdicts;
  double expected_critical = 0;  // 0 when no critical exponent is asserted
  verify::LpScanResult result;
  bool pass = false;
};
std::vector<LpCase> lp_cases(const RunConfig& cfg, fields::Solution* sol);

struct ResidualCheck {
  fields::SpaceTimePoint q;
  double h = 0;
  fields::ResidualReport report;
};
// Random interior points with parabolic distance >= residuals.min_distance
// from x_n = 0 and t = 1; a point with a loose budget is redone at h/2.
std::vector<ResidualCheck> residual_checks(fields::Solution& sol, const RunConfig& cfg);
fields::TestField weak_test_field(int n);
fields::WeakIdentityReport weak_identity_check(fields::Solution& sol, const RunConfig& cfg);

struct TableResult {
  csv::Table table;
  int executed = 0;
  int passed = 0;
};

TableResult eval_table(fields::Solution& sol, const RunConfig& cfg);
TableResult rates_table(fields::Solution& sol, const RunConfig& cfg);
TableResult lemmas_table(fields::Solution& sol, const RunConfig& cfg, const Calibration* calibration);
TableResult residuals_table(fields::Solution& sol, const RunConfig& cfg);
TableResult lp_table(fields::Solution& sol, const RunConfig& cfg);

// Runs eval, rates, lemmas, residuals, lp-scan or report and writes
// <output_dir>/<name>.csv (report: all tables plus report.txt). Returns 0 when
// every executed check passes and 2 otherwise. Throws UsageError or
// config::ConfigError for invalid input.
int run(const std::string& subcommand, RunConfig cfg, std::ostream& log);

const std::vector<std::string>& subcommands();

}  // namespace hsstokes::drivers
