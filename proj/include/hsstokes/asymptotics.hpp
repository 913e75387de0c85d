#pragma once

#include "hsstokes/boundary_data.hpp"
#include "hsstokes/fields.hpp"
#include "hsstokes/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hsstokes::asymptotics {

// Psi_{phi,k}(t) = int_0^{min(1,t)} (t-s)^{-alpha} phi^{(k)}(1-s) ds and the
// variant with the extra factor exp(-x_n^2 / 4(t-s)).
struct PsiQuery {
  int k = 0;
  double alpha = 0.5;
  double t = 0.9;
  double x_n = 0.1;  // used by the tilde variant only
  data::PhiSpec phi;

  // Rejects k outside {0,1}, t outside (3/4, 5/4), x_n outside (0, 1/2),
  // alpha <= 0, alpha = 1 and alpha + a = 1.
  void validate() const;
};

// The same integrals for an arbitrary profile f = phi^{(k)} supported in
// (0, support_end]. f may behave like u^{singular_exponent} at u = 0 (0 for a
// logarithmic or bounded profile); `breaks` are extra non-smooth points in u.
// `truncate` stops the t > 1 integral at s = 2 - t.
struct PsiIntegrand {
  std::function<double(double)> profile;
  double support_end = 1.0;
  double singular_exponent = 0.0;
  std::vector<double> breaks;
};
quad::QuadResult psi_integral(const PsiIntegrand& f, double alpha, double t, double x_n, bool tilde, bool truncate,
                              const quad::QuadConfig& cfg);

// For t > 1 and k = 1 the integral over s near 1 diverges (phi' is not
// integrable at 0). Both variants then stop at s = 2 - t, which is the part
// the asymptotic statement describes. For t < 1 the plain variant needs
// alpha < 1.
quad::QuadResult psi_numeric(const PsiQuery& q, bool tilde, const quad::QuadConfig& cfg);

struct PsiPrediction {
  double value = 0;
  std::string regime;
};

// Right-hand side of the asymptotic equivalence for the applicable case,
// with the unpinned constant delta of the exponential band.
PsiPrediction psi_predicted(const PsiQuery& q, bool tilde, double delta = 0.125);

enum class Region { DPlus, DMinus, DZero, TildeDPlus, TildeDMinus, Outside };
std::string to_string(Region r);

struct RegionParams {
  double t0 = 0.125;
  double t1 = 0.0625;
  double eps0 = 0.1;
  double eps1 = 10.0;
  void validate() const;
};

// Membership in one region, with the regions overlapping as defined:
// TildeDPlus within DPlus, DZero within DPlus, TildeDMinus within DMinus.
bool in_region(Region r, double x_n, double t, const RegionParams& params);

// Most specific label: TildeDPlus, DZero, DPlus, TildeDMinus, DMinus, in that
// order; Outside when |t - 1| >= t0 or x_n outside (0, 1/2).
Region classify_region(double x_n, double t, const RegionParams& params);
Region classify_region(const fields::SpaceTimePoint& q, const RegionParams& params);

enum class Quantity { W, DxnW, P };
std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

enum class Side { Before, After };  // t < 1, t > 1
std::string to_string(Side s);

enum class Variable { OneMinusT, TMinusOne, Xn, None };
std::string to_string(Variable v);

enum class RateKind { Power, Expression, Bounded, NoPrediction };

struct RatePrediction {
  RateKind kind = RateKind::NoPrediction;
  Variable variable = Variable::None;
  double exponent = 0;  // meaningful for the Power family
  int sign = 0;         // sign of the quantity, 0 when not asserted
  std::string expression;
  // Predicted leading behaviour at (x_n, t), up to a constant factor.
  std::function<double(double, double)> profile;

  bool covered() const { return kind != RateKind::NoPrediction; }
};

// Leading behaviour of w_i, D_{x_n} w_i or p (i < n) near the boundary and
// t = 1. Combinations without an asymptotic statement give NoPrediction.
// For p with t > 1 the variable is t - 1 along x_n = (t - 1)^{1/2}.
RatePrediction predicted_rate(Quantity quantity, Region region, Side side, const data::PhiSpec& phi);

// Ratios behind the elementary profile inequalities for 0 < t < x_n^2 < 1/16:
// phi^{(k)}(t) exp(-delta1 x_n^2 / t) / phi^{(k)}(x_n^2), with the sign of phi'
// absorbed for k = 1.
double profile_decay_ratio(int k, double t, double x_n, double delta1, const data::PhiSpec& phi);

// t^{-1/2} exp(-delta1 x_n^2 / t) phi(t) / (x_n sgn(phi') phi'(x_n^2)).
double profile_smallness_ratio(double t, double x_n, double delta1, const data::PhiSpec& phi);

}  // namespace hsstokes::asymptotics
