#pragma once

#include "hsstokes/asymptotics.hpp"
#include "hsstokes/boundary_data.hpp"

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hsstokes::verify {

// (scale, value) pairs.
using Sample = std::pair<double, double>;

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  int n_points = 0;
  double predicted = 0;
  double tol_slope = 0;
  bool pass = false;
};

struct FitOptions {
  double tol_slope = 0.1;
  double min_r_squared = 0.98;
  int min_points = 6;
  double min_decades = 3.0;  // log10(max scale / min scale)
};

// Least-squares line through (log scale, log |value|). Throws
// std::invalid_argument on too few samples, a short scale range, non-positive
// scales, zero values or values of both signs.
RateFit fit_rate(std::span<const Sample> samples, double predicted, const FitOptions& opt = {});

struct BracketReport {
  double C = std::numeric_limits<double>::infinity();
  double min_ratio = 0;
  double max_ratio = 0;
  double C_max = 20;
  int n_points = 0;
  bool sign_ok = true;
  bool pass = false;
  std::string diagnostic;
};

// Smallest C with value / model(scale) in [1/C, C] for every sample. The model
// must keep one sign on the sample (std::invalid_argument otherwise); a sample
// of the opposite sign fails the check.
BracketReport bracket_check(std::span<const Sample> samples, const std::function<double(double)>& model,
                            double C_max = 20);

enum class LpVerdict { Converging, Diverging, Inconclusive };
std::string to_string(LpVerdict v);

enum class LpSource { Profile, Measured };
std::string to_string(LpSource s);
LpSource lp_source_from_string(const std::string& s);

// Pointwise model of |f| on Q from the theorem's bounds, as a function of
// x_n and d = |t - 1| (d rather than t keeps shells below 1e-16 resolvable).
double lp_profile(asymptotics::Quantity q, const data::PhiSpec& phi, double x_n, double d, asymptotics::Side side);

struct LpScanConfig {
  double t1 = 1.0 / 64;  // Q = B+_{1/2} x (1 - t1, 1 + t1)
  int shells = 120;
  int tail_window = 8;
  double tail_tol = 0.05;  // Cauchy tail estimate relative to the partial sum
  int points_per_dim = 3;
  LpSource source = LpSource::Profile;
  int bisection_steps = 40;
  void validate() const;
};

struct LpPoint {
  double p = 0;                      // +inf for the sup proxy
  std::vector<double> shell_terms;   // contribution of shell k = 0..K-1
  std::vector<double> partial_sums;
  double growth_rate = 0;            // fitted d ln(term) / dk over the tail window
  double decay_power = 0;            // fitted -d ln(term) / d ln k over the tail window
  double tail_estimate = 0;
  LpVerdict verdict = LpVerdict::Inconclusive;
};

struct LpScanResult {
  asymptotics::Quantity quantity = asymptotics::Quantity::W;
  double t1 = 0;
  std::vector<LpPoint> points;
  bool monotone = true;  // diverging set is an up-set in p
  // Largest converging / smallest diverging p in the list, refined by
  // bisection on the shell growth rate; NaN when not bracketed.
  double critical_lo = std::numeric_limits<double>::quiet_NaN();
  double critical_hi = std::numeric_limits<double>::quiet_NaN();
  double critical_p = std::numeric_limits<double>::quiet_NaN();
  bool all_inconclusive = false;
};

// Field source for the measured mode: |f|(x, t) for x = (x', x_n).
using FieldFunction = std::function<double(const Vecd& x, double t)>;

// Estimates int_Q |f|^p over double-dyadic cells x_n in (2^{-j-2}, 2^{-j-1}],
// |t-1| in t1 (4^{-m-1}, 4^{-m}], grouped into parabolic shells
// k = max(j, m) shrinking to {t = 1} u {x_n = 0}, both sides of t = 1. Each cell
// uses points_per_dim Gauss-Legendre points per dimension.
LpScanResult lp_scan(asymptotics::Quantity quantity, std::span<const double> p_list, const data::PhiSpec& phi,
                     const LpScanConfig& cfg, const FieldFunction& measured = {}, int n = 3);

// Verdict of one partial-sum sequence: diverging when the terms stop decaying
// faster than 1/k, converging when the Cauchy tail estimate is within tail_tol.
LpPoint classify_terms(double p, std::vector<double> terms, const LpScanConfig& cfg);

}  // namespace hsstokes::verify
