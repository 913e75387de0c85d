#include "hsstokes/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsstokes::asymptotics {

using data::PhiFamily;

void PsiQuery::validate() const {
  if (k != 0 && k != 1) throw std::invalid_argument("PsiQuery: k must be 0 or 1");
  if (!(t > 0.75 && t < 1.25) || t == 1) throw std::invalid_argument("PsiQuery: t must lie in (3/4, 5/4), t != 1");
  if (!(x_n > 0 && x_n < 0.5)) throw std::invalid_argument("PsiQuery: x_n must lie in (0, 1/2)");
  if (!(alpha > 0)) throw std::invalid_argument("PsiQuery: alpha must be positive");
  if (std::abs(alpha - 1) < 1e-12) throw std::invalid_argument("PsiQuery: alpha = 1 is resonant");
  if (phi.family == PhiFamily::Power && std::abs(alpha + phi.a - 1) < 1e-12)
    throw std::invalid_argument("PsiQuery: alpha + a = 1 is resonant");
  phi.validate();
}

namespace {

double profile(int k, double s, const data::PhiSpec& phi) { return data::phi(k, s, phi); }

int sign_of_derivative(const data::PhiSpec& phi) { return phi.family == PhiFamily::LogDecay ? 1 : -1; }

}  // namespace

quad::QuadResult psi_integral(const PsiIntegrand& f, double alpha, double t, double x_n, bool tilde, bool truncate,
                              const quad::QuadConfig& cfg) {
  if (!f.profile) throw std::invalid_argument("psi_integral: profile is empty");
  if (!(t > 0) || t == 1) throw std::invalid_argument("psi_integral: t must be positive and different from 1");
  if (!(alpha > 0)) throw std::invalid_argument("psi_integral: alpha must be positive");
  if (tilde && !(x_n > 0)) throw std::invalid_argument("psi_integral: x_n must be positive");
  const double eps = std::abs(t - 1);
  const double X = tilde ? x_n * x_n : 0.0;
  const double top = f.support_end;
  quad::QuadConfig c = cfg;
  std::vector<double> bps;
  auto scales = [&](double lo, double hi) {
    for (double s : {eps, X}) {
      if (s == 0) continue;
      for (double m : {0.0625, 0.25, 1.0, 4.0, 16.0}) bps.push_back(lo + m * s);
    }
    const double finest = tilde ? std::min(eps, X) : eps;
    for (double p : quad::geometric_points(lo, hi, finest / 16)) bps.push_back(p);
  };
  if (t < 1) {
    if (!tilde && alpha >= 1) throw std::invalid_argument("psi_integral: the plain variant needs alpha < 1 for t < 1");
    // v = t - s, with 1 - s = eps + v; s runs over (max(0, 1 - top), t).
    const double hi = std::min(top, 1.0) - eps;
    const double v_hi = std::min(hi, t);
    if (!(v_hi > 0)) return {};
    if (!tilde) c.singular_endpoint_map.push_back({0.0, -alpha});
    scales(0.0, v_hi);
    for (double b : f.breaks) bps.push_back(b - eps);
    auto g = [&](double v) {
      if (!(v > 0)) return 0.0;
      double r = std::pow(v, -alpha) * f.profile(eps + v);
      if (tilde) r *= std::exp(-X / (4 * v));
      return r;
    };
    return quad::integrate_1d(g, 0.0, v_hi, c, bps);
  }
  // u = 1 - s over (0, min(top, 1)); truncation stops at u = eps (s = 2 - t).
  const double lo = truncate ? eps : 0.0;
  const double hi = std::min(top, 1.0);
  if (!(hi > lo)) return {};
  if (lo == 0) c.singular_endpoint_map.push_back({0.0, f.singular_exponent});
  scales(lo, hi);
  for (double b : f.breaks) bps.push_back(b);
  auto g = [&](double u) {
    if (!(u > 0)) return 0.0;
    const double th = eps + u;
    double r = std::pow(th, -alpha) * f.profile(u);
    if (tilde) r *= std::exp(-X / (4 * th));
    return r;
  };
  return quad::integrate_1d(g, lo, hi, c, bps);
}

quad::QuadResult psi_numeric(const PsiQuery& q, bool tilde, const quad::QuadConfig& cfg) {
  q.validate();
  if (!tilde && q.t < 1 && q.alpha > 1)
    throw std::invalid_argument("psi_numeric: the plain variant needs alpha < 1 for t < 1");
  PsiIntegrand f;
  const data::PhiSpec phi = q.phi;
  const int k = q.k;
  f.profile = [phi, k](double u) { return profile(k, u, phi); };
  f.support_end = phi.cutoff_outer;
  f.singular_exponent = k == 0 ? -phi.growth_exponent() : 0.0;
  f.breaks = {phi.cutoff_inner};
  return psi_integral(f, q.alpha, q.t, q.x_n, tilde, q.k == 1, cfg);
}

PsiPrediction psi_predicted(const PsiQuery& q, bool tilde, double delta) {
  q.validate();
  const double a = q.phi.growth_exponent(), al = q.alpha;
  const double eps = std::abs(q.t - 1), X = q.x_n * q.x_n;
  const bool strong = al + a > 1;
  auto phik = [&](double s) { return profile(q.k, s, q.phi); };
  if (!tilde || q.t > 1) {
    if (!tilde && q.t < 1 && al > 1) throw std::invalid_argument("psi_predicted: plain variant needs alpha < 1 for t < 1");
    const double m = tilde ? std::max(eps, X) : eps;
    if (q.k == 1) return {std::pow(m, 1 - al) * phik(m), "power"};
    if (strong) return {std::pow(m, 1 - al) * phik(m), "power"};
    return {1.0, "bounded"};
  }
  if (eps < X) {
    const double layer = phik(eps) * std::pow(eps, 2 - al) / X * std::exp(-delta * X / eps);
    if (q.k == 0) return {std::max(1.0, std::pow(X, 1 - al) * phik(X)) + layer, "normal-dominated"};
    return {std::pow(X, 1 - al) * phik(X) + layer, "normal-dominated"};
  }
  if (al > 1) return {phik(eps) * std::pow(X, 1 - al), "time-dominated, alpha > 1"};
  if (q.k == 0) return {std::max(1.0, std::pow(eps, 1 - al) * phik(eps)), "time-dominated, alpha < 1"};
  return {std::pow(eps, 1 - al) * phik(eps), "time-dominated, alpha < 1"};
}

std::string to_string(Region r) {
  switch (r) {
    case Region::DPlus: return "DPlus";
    case Region::DMinus: return "DMinus";
    case Region::DZero: return "DZero";
    case Region::TildeDPlus: return "TildeDPlus";
    case Region::TildeDMinus: return "TildeDMinus";
    case Region::Outside: return "Outside";
  }
  return "?";
}

void RegionParams::validate() const {
  if (!(t0 > 0 && t0 < 0.25)) throw std::invalid_argument("RegionParams: t0 must lie in (0, 1/4)");
  if (!(t1 > 0 && t1 < t0)) throw std::invalid_argument("RegionParams: t1 must lie in (0, t0)");
  if (!(eps0 > 0 && eps0 < 0.5)) throw std::invalid_argument("RegionParams: eps0 must lie in (0, 1/2)");
  if (!(eps1 > 1)) throw std::invalid_argument("RegionParams: eps1 must exceed 1");
}

bool in_region(Region r, double x_n, double t, const RegionParams& params) {
  const double d = std::abs(t - 1);
  const bool base = d < params.t0 && x_n > 0 && x_n < 0.5;
  const double root = std::sqrt(d);
  const bool plus = base && root >= x_n;
  const bool minus = base && root < x_n;
  switch (r) {
    case Region::DPlus: return plus;
    case Region::DMinus: return minus;
    case Region::DZero: return base && x_n > 0.5 * root && x_n < root;
    case Region::TildeDPlus: return plus && x_n <= params.eps0 * root;
    case Region::TildeDMinus: return minus && params.eps1 * root <= x_n;
    case Region::Outside: return !base;
  }
  return false;
}

Region classify_region(double x_n, double t, const RegionParams& params) {
  for (Region r : {Region::TildeDPlus, Region::DZero, Region::DPlus, Region::TildeDMinus, Region::DMinus})
    if (in_region(r, x_n, t, params)) return r;
  return Region::Outside;
}

Region classify_region(const fields::SpaceTimePoint& q, const RegionParams& params) {
  return classify_region(q.p.x_n, q.t, params);
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::W: return "w";
    case Quantity::DxnW: return "dxn_w";
    case Quantity::P: return "p";
  }
  return "?";
}

Quantity quantity_from_string(const std::string& s) {
  if (s == "w") return Quantity::W;
  if (s == "dxn_w") return Quantity::DxnW;
  if (s == "p") return Quantity::P;
  throw std::invalid_argument("unknown quantity '" + s + "' (expected w, dxn_w or p)");
}

std::string to_string(Side s) { return s == Side::Before ? "t<1" : "t>1"; }

std::string to_string(Variable v) {
  switch (v) {
    case Variable::OneMinusT: return "1-t";
    case Variable::TMinusOne: return "t-1";
    case Variable::Xn: return "x_n";
    case Variable::None: return "none";
  }
  return "?";
}

RatePrediction predicted_rate(Quantity quantity, Region region, Side side, const data::PhiSpec& phi) {
  RatePrediction r;
  if (region == Region::Outside) return r;
  const bool power = phi.family == PhiFamily::Power;
  const double a = phi.growth_exponent();
  const int sd = sign_of_derivative(phi);
  auto f = [phi](int k, double s) { return data::phi(k, s, phi); };
  auto set = [&](Variable v, double exponent, int sign, std::string expr, std::function<double(double, double)> prof) {
    r.kind = power ? RateKind::Power : RateKind::Expression;
    r.variable = v;
    r.exponent = power ? exponent : 0;
    r.sign = sign;
    r.expression = std::move(expr);
    r.profile = std::move(prof);
  };
  const bool before = side == Side::Before;
  switch (quantity) {
    case Quantity::W:
      if (phi.family == PhiFamily::LogDecay) {
        r.kind = RateKind::Bounded;
        r.expression = "1";
        r.profile = [](double, double) { return 1.0; };
        return r;
      }
      if (before && region == Region::TildeDMinus)
        set(Variable::OneMinusT, -a, 1, "phi(1-t)", [f](double, double t) { return f(0, 1 - t); });
      else if (!before && (region == Region::TildeDMinus || region == Region::DZero))
        set(Variable::TMinusOne, -a, -1, "-phi(t-1)", [f](double, double t) { return -f(0, t - 1); });
      return r;
    case Quantity::DxnW:
      if (region == Region::TildeDPlus) {
        if (before)
          set(Variable::OneMinusT, -0.5 - a, -sd, "-(1-t)^{1/2} phi'(1-t)",
              [f](double, double t) { return -std::sqrt(1 - t) * f(1, 1 - t); });
        else
          set(Variable::TMinusOne, -0.5 - a, -1, "-(t-1)^{-1/2} phi(t-1)",
              [f](double, double t) { return -f(0, t - 1) / std::sqrt(t - 1); });
      } else if (region == Region::TildeDMinus) {
        if (before || power) {
          set(Variable::Xn, -1 - 2 * a, -sd, "-x_n phi'(x_n^2)",
              [f](double x, double) { return -x * f(1, x * x); });
        } else {
          const int sign = phi.family == PhiFamily::LogGrowth ? 1 : 0;
          set(Variable::Xn, 0, sign, "-x_n phi'(x_n^2) + (t-1)^{-3/2} x_n^2 exp(-x_n^2/4(t-1)) phi(t-1)",
              [f](double x, double t) {
                const double d = t - 1;
                return -x * f(1, x * x) + std::pow(d, -1.5) * x * x * std::exp(-x * x / (4 * d)) * f(0, d);
              });
        }
      }
      return r;
    case Quantity::P:
      if (before) {
        set(Variable::OneMinusT, -1 - a, -sd, "-phi'(1-t)", [f](double, double t) { return -f(1, 1 - t); });
      } else if (phi.family == PhiFamily::LogDecay) {
        r.kind = RateKind::Bounded;
        r.expression = "1";
        r.profile = [](double, double) { return 1.0; };
      } else {
        set(Variable::TMinusOne, -a, -1, "-x_n (t-1)^{-1/2} phi(t-1) along x_n = (t-1)^{1/2}",
            [f](double x, double t) { return -x * f(0, t - 1) / std::sqrt(t - 1); });
      }
      return r;
  }
  return r;
}

double profile_decay_ratio(int k, double t, double x_n, double delta1, const data::PhiSpec& phi) {
  if (k != 0 && k != 1) throw std::invalid_argument("profile_decay_ratio: k must be 0 or 1");
  if (!(t > 0 && x_n > 0)) throw std::invalid_argument("profile_decay_ratio: t and x_n must be positive");
  return profile(k, t, phi) * std::exp(-delta1 * x_n * x_n / t) / profile(k, x_n * x_n, phi);
}

double profile_smallness_ratio(double t, double x_n, double delta1, const data::PhiSpec& phi) {
  if (!(t > 0 && x_n > 0)) throw std::invalid_argument("profile_smallness_ratio: t and x_n must be positive");
  const double num = std::exp(-delta1 * x_n * x_n / t) * profile(0, t, phi) / std::sqrt(t);
  return num / (x_n * std::abs(profile(1, x_n * x_n, phi)));
}

}  // namespace hsstokes::asymptotics
