#include "hsstokes/drivers.hpp"

#include "hsstokes/potentials.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hsstokes::drivers {

using asymptotics::Quantity;
using asymptotics::Region;
using asymptotics::Side;
using asymptotics::Variable;
using csv::format_double;
using data::PhiFamily;

std::mt19937_64 make_rng(std::uint64_t seed, const std::string& check) {
  return std::mt19937_64(seed ^ csv::fnv1a(check));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
  return lo + (hi - lo) * u;
}

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

std::string fmt(double v) { return format_double(v); }

std::string phi_label(const data::PhiSpec& phi) {
  std::string s = data::to_string(phi.family);
  if (phi.family == PhiFamily::Power) s += " a=" + fmt(phi.a);
  return s;
}

fields::SpaceTimePoint point_on_axis(int n, double x_n, double t) {
  fields::SpaceTimePoint q;
  q.p.x_prime = Vecd::Zero(n - 1);
  q.p.x_n = x_n;
  q.t = t;
  return q;
}

// Random point of the open disc (interval for n = 2) of the given radius.
Vecd random_in_ball(std::mt19937_64& rng, int dim, double radius) {
  Vecd v(dim);
  do {
    for (int k = 0; k < dim; ++k) v[k] = uniform(rng, -radius, radius);
  } while (v.norm() >= radius);
  return v;
}

// First k with 2^-k strictly below t1.
int first_exponent(double t1) {
  int k = 0;
  while (std::ldexp(1.0, -k) >= t1) ++k;
  return k;
}

double relative_gap(double a, double b, double scale) { return scale > 0 ? std::abs(a - b) / scale : std::abs(a - b); }

Check make_check(std::string check, std::string item, double value, double limit, bool pass) {
  return Check{std::move(check), std::move(item), value, limit, pass};
}

}  // namespace

// ---------------------------------------------------------------- kernels

std::vector<Check> kernel_identities(const RunConfig& cfg) {
  const int n = cfg.n;
  auto rng = make_rng(cfg.seed, "kernel_identities");
  std::vector<Check> out;
  for (int s = 0; s < cfg.kernel_points; ++s) {
    HalfSpacePoint p;
    Vecd x(n);
    do {
      for (int k = 0; k < n - 1; ++k) x[k] = uniform(rng, -2, 2);
      x[n - 1] = uniform(rng, 0.02, 2);
    } while (x.norm() >= 2);
    p.x_prime = x.head(n - 1);
    p.x_n = x[n - 1];
    const double t = uniform(rng, 0.01, 1);

    std::vector<std::vector<double>> L(n, std::vector<double>(n));
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) L[i - 1][j - 1] = potentials::l_tensor_direct({i, j}, p, t, cfg.quad).value;

    double worst = 0;
    double trace = 0, trace_scale = 0;
    for (int i = 0; i < n; ++i) {
      trace += L[i][i];
      trace_scale += std::abs(L[i][i]);
    }
    const double half_dn_gamma = 0.5 * kernels::gaussian<double>(MultiIndex::unit(n - 1), x, t);
    worst = std::max(worst, relative_gap(trace, half_dn_gamma, std::max(trace_scale, std::abs(half_dn_gamma))));
    for (int i = 0; i < n - 1; ++i)
      for (int j = i + 1; j < n - 1; ++j)
        worst = std::max(worst, relative_gap(L[i][j], L[j][i], std::max(std::abs(L[i][j]), std::abs(L[j][i]))));
    for (int i = 0; i < n - 1; ++i) {
      const double b = potentials::b_tensor(i + 1, p, t, cfg.quad).value;
      const double scale = std::max({std::abs(L[i][n - 1]), std::abs(L[n - 1][i]), std::abs(b)});
      worst = std::max(worst, relative_gap(L[i][n - 1], L[n - 1][i] + b, scale));
    }
    std::ostringstream item;
    item << "x=(";
    for (int k = 0; k < n; ++k) item << (k ? " " : "") << fmt(x[k]);
    item << ") t=" << fmt(t);
    out.push_back(make_check("kernel_identity", item.str(), worst, cfg.kernel_tol, worst <= cfg.kernel_tol));
  }
  return out;
}

// ---------------------------------------------------------------- Psi

std::string to_string(PsiVariant v) {
  switch (v) {
    case PsiVariant::Plain: return "plain";
    case PsiVariant::TildeTime: return "tilde x_n^2=|t-1|/16";
    case PsiVariant::TildeNormal: return "tilde x_n^2=4|t-1|";
  }
  return "?";
}

std::string PsiCell::label() const {
  return phi_label(phi) + " alpha=" + fmt(alpha) + " k=" + std::to_string(k) + " " + asymptotics::to_string(side) +
         " " + to_string(variant);
}

std::vector<PsiCell> psi_cells(const RunConfig& cfg) {
  std::vector<std::pair<data::PhiSpec, double>> families;
  for (double a : {0.3, 0.7})
    for (double alpha : {0.5, 1.5}) {
      data::PhiSpec phi;
      phi.a = a;
      families.push_back({phi, alpha});
    }
  for (PhiFamily f : {PhiFamily::LogGrowth, PhiFamily::LogDecay}) {
    data::PhiSpec phi;
    phi.family = f;
    families.push_back({phi, 0.5});
  }

  std::vector<double> deltas;
  for (int j = 0; j <= 12; ++j) deltas.push_back(0.125 * std::pow(2.0, 0.25 * j));

  verify::FitOptions fit_opt;
  fit_opt.tol_slope = cfg.psi_tol_slope;
  fit_opt.min_r_squared = 0;

  std::vector<PsiCell> out;
  for (const auto& [phi, alpha] : families)
    for (int k : {0, 1})
      for (Side side : {Side::Before, Side::After})
        for (PsiVariant variant : {PsiVariant::Plain, PsiVariant::TildeTime, PsiVariant::TildeNormal}) {
          const bool tilde = variant != PsiVariant::Plain;
          if (!tilde && side == Side::Before && alpha > 1) continue;
          PsiCell cell;
          cell.phi = phi;
          cell.alpha = alpha;
          cell.k = k;
          cell.side = side;
          cell.variant = variant;
          cell.gated = variant != PsiVariant::TildeNormal;

          std::vector<asymptotics::PsiQuery> queries;
          std::vector<verify::Sample> numeric;
          bool ok = true;
          for (int j = 6; j <= 20; ++j) {
            const double eps = std::ldexp(1.0, -j);
            asymptotics::PsiQuery q;
            q.k = k;
            q.alpha = alpha;
            q.t = side == Side::Before ? 1 - eps : 1 + eps;
            q.x_n = variant == PsiVariant::TildeTime ? std::sqrt(eps / 16)
                    : variant == PsiVariant::TildeNormal ? std::sqrt(4 * eps)
                                                         : 0.1;
            q.phi = phi;
            const auto r = asymptotics::psi_numeric(q, tilde, cfg.quad);
            ok = ok && r.converged && std::isfinite(r.value);
            queries.push_back(q);
            numeric.push_back({eps, r.value});
          }

          double best = kInfD;
          bool fitted = false;
          for (double delta : deltas) {
            std::vector<verify::Sample> predicted;
            for (std::size_t s = 0; s < queries.size(); ++s)
              predicted.push_back({numeric[s].first, asymptotics::psi_predicted(queries[s], tilde, delta).value});
            double slope = 0, pred_slope = 0, C = kInfD;
            try {
              pred_slope = verify::fit_rate(predicted, 0, fit_opt).slope;
              slope = verify::fit_rate(numeric, pred_slope, fit_opt).slope;
              std::map<double, double> model(predicted.begin(), predicted.end());
              const auto br = verify::bracket_check(numeric, [&](double e) { return model.at(e); }, cfg.c_max);
              C = br.sign_ok ? br.C : kInfD;
            } catch (const std::invalid_argument&) {
              continue;
            }
            fitted = true;
            if (std::abs(slope - pred_slope) < best) {
              best = std::abs(slope - pred_slope);
              cell.slope = slope;
              cell.predicted_slope = pred_slope;
              cell.C = C;
              cell.delta = delta;
            }
          }
          cell.pass = ok && fitted && best <= cfg.psi_tol_slope && cell.C <= cfg.c_max;
          out.push_back(cell);
        }
  return out;
}

// ---------------------------------------------------------------- profile inequalities

std::vector<Check> profile_inequalities(const RunConfig& cfg) {
  constexpr double delta1 = 0.25;
  std::vector<data::PhiSpec> specs(3);
  specs[0].family = PhiFamily::Power;
  specs[0].a = cfg.phi.family == PhiFamily::Power ? cfg.phi.a : 0.3;
  specs[1].family = PhiFamily::LogGrowth;
  specs[2].family = PhiFamily::LogDecay;

  // Wedge sample: x_n = 2^{-2-j/4}, t = 2^{-k/2}.
  auto wedge = [](double ratio, auto&& visit) {
    for (int j = 1; j <= 60; ++j) {
      const double x_n = std::ldexp(std::pow(2.0, -0.25 * j), -2);
      for (int k = 8; k <= 100; ++k) {
        const double t = std::pow(2.0, -0.5 * k);
        if (ratio * std::sqrt(t) < x_n) visit(x_n, t);
      }
    }
  };

  std::vector<Check> out;
  for (const auto& phi : specs) {
    for (int k : {0, 1}) {
      double c = 0;
      wedge(1.0, [&](double x_n, double t) { c = std::max(c, asymptotics::profile_decay_ratio(k, t, x_n, delta1, phi)); });
      out.push_back(make_check("profile_decay", phi_label(phi) + " k=" + std::to_string(k), c, cfg.c_max,
                               std::isfinite(c) && c <= cfg.c_max));
    }
    double previous = kInfD;
    for (double eps1 : {5.0, 10.0, 20.0}) {
      double e = 0;
      wedge(eps1, [&](double x_n, double t) {
        e = std::max(e, asymptotics::profile_smallness_ratio(t, x_n, delta1, phi));
      });
      out.push_back(make_check("profile_smallness", phi_label(phi) + " eps1=" + fmt(eps1), e, previous,
                               std::isfinite(e) && e < previous));
      previous = e;
    }
  }
  return out;
}

// ---------------------------------------------------------------- J1 and brackets

J1Fit j1_constant(const RunConfig& cfg) {
  std::vector<Vecd> xs;
  if (cfg.n == 3) {
    Vecd a(2), b(2);
    a << 0.8, 0.6;
    b << 1.5, 1.0;
    xs = {a, b};
  } else {
    Vecd a(1), b(1);
    a << 1.0;
    b << 2.0;
    xs = {a, b};
  }
  auto fit = [&](const std::vector<double>& xns, const std::vector<double>& ts) {
    double C = 0;
    for (const auto& X : xs)
      for (double x_n : xns)
        for (double t : ts) {
          const auto g = potentials::gamma_convolution_decomposition(X, x_n, t, cfg.quad);
          C = std::max(C, std::abs(g.j1_residual) / (x_n * std::sqrt(t)));
        }
    return C;
  };
  J1Fit r;
  r.C_a = fit({0.05, 0.1, 0.2, 0.4}, {0.01, 0.02, 0.05, 0.1, 0.2});
  r.C_b = fit({0.055, 0.11, 0.22, 0.38}, {0.012, 0.025, 0.06, 0.12, 0.19});
  r.spread = std::abs(r.C_a - r.C_b) / std::max(r.C_a, r.C_b);
  r.pass = std::isfinite(r.spread) && r.spread <= 0.2;
  return r;
}

double ConvolutionBrackets::worst_ratio() const {
  auto ratio = [](double lo, double hi) { return lo > 0 ? hi / lo : kInfD; };
  return std::max(ratio(c1_tangential, c2_tangential), ratio(c1_normal, c2_normal));
}

ConvolutionBrackets convolution_brackets(const RunConfig& cfg, double t0) {
  const int dim = cfg.n - 1;
  auto rng = make_rng(cfg.seed, "convolution_brackets");
  const double c = -cfg.bump.center(), hw = cfg.bump.half_width();
  ConvolutionBrackets r;
  r.t0 = t0;
  r.c1_tangential = r.c1_normal = kInfD;
  for (int s = 0; s < 40; ++s) {
    const Vecd x = random_in_ball(rng, dim, 0.5);
    Vecd y(dim);
    for (int k = 0; k < dim; ++k) y[k] = c + uniform(rng, -hw, hw);
    const Vecd X = x - y;
    for (double fraction : {1.0 / 64, 0.125, 0.5, 0.999}) {
      const double tau = fraction * t0;
      for (int i = 1; i <= dim; ++i) {
        const double h = potentials::h_tangential(i, X, tau, cfg.quad).value;
        r.c1_tangential = std::min(r.c1_tangential, h);
        r.c2_tangential = std::max(r.c2_tangential, h);
      }
      const double floor = std::pow(tau, -0.5 * dim) * std::exp(-1 / tau);
      for (double x_n : {0.01, 0.1, 0.4}) {
        const double h = potentials::h_normal(X, x_n, tau, cfg.quad).value / (x_n + floor);
        r.c1_normal = std::min(r.c1_normal, h);
        r.c2_normal = std::max(r.c2_normal, h);
      }
      ++r.samples;
    }
  }
  return r;
}

// ---------------------------------------------------------------- blow-up sample of w

namespace {

struct WSample {
  double x_n, d;
  Side side;
  double w;
};

std::vector<WSample> blowup_sample(fields::Solution& sol, double t1) {
  std::vector<WSample> out;
  for (double x_n : {0.3, 0.1, 0.03})
    for (int k = first_exponent(t1); k <= 25; k += 2) {
      const double d = std::ldexp(1.0, -k);
      for (Side side : {Side::Before, Side::After}) {
        const double t = side == Side::Before ? 1 - d : 1 + d;
        out.push_back({x_n, d, side, sol.velocity(1, point_on_axis(sol.n(), x_n, t)).total.value});
      }
    }
  return out;
}

double phi_at(const data::PhiSpec& phi, double d) { return data::phi(0, d, phi); }

// Smallest w / phi(1-t) over t < 1 samples of TildeDMinus(eps1), relative to
// the largest |w| / phi(|t-1|).
double lower_margin(const std::vector<WSample>& s, const data::PhiSpec& phi, double eps1) {
  double upper = 0, lower = kInfD;
  for (const auto& w : s) upper = std::max(upper, std::abs(w.w) / phi_at(phi, w.d));
  for (const auto& w : s)
    if (w.side == Side::Before && eps1 * std::sqrt(w.d) <= w.x_n) lower = std::min(lower, w.w / phi_at(phi, w.d));
  return upper > 0 && std::isfinite(lower) ? lower / upper : 0;
}

// Growth of sup |value| from the coarser two thirds of a line to its finest third.
double tail_growth(const std::vector<WSample>& s, const std::function<double(const WSample&)>& value) {
  double worst = 0;
  for (double x_n : {0.3, 0.1, 0.03})
    for (Side side : {Side::Before, Side::After}) {
      std::vector<double> line;
      for (const auto& w : s)
        if (w.x_n == x_n && w.side == side) line.push_back(std::abs(value(w)));
      if (line.size() < 3) continue;
      const std::size_t cut = line.size() - line.size() / 3;
      const double coarse = *std::max_element(line.begin(), line.begin() + static_cast<long>(cut));
      const double fine = *std::max_element(line.begin() + static_cast<long>(cut), line.end());
      worst = std::max(worst, coarse > 0 ? fine / coarse : kInfD);
    }
  return worst;
}

}  // namespace

Calibration calibrate_regions(fields::Solution& sol, const RunConfig& cfg) {
  Calibration c;
  c.params = cfg.regions;
  for (double t0 = 0.125; t0 >= 1.0 / 1024; t0 /= 2) {
    c.t0_trials.push_back(convolution_brackets(cfg, t0));
    if (c.t0_trials.back().worst_ratio() <= 10) {
      c.params.t0 = t0;
      c.params.t1 = t0 / 2;
      c.t0_found = true;
      break;
    }
  }
  // No lower bound for t < 1 is asserted for the decaying profile.
  if (cfg.phi.family == PhiFamily::LogDecay) return c;
  const auto s = blowup_sample(sol, c.params.t1);
  for (double eps1 : {10.0, 20.0, 40.0, 80.0}) {
    const double m = lower_margin(s, cfg.phi, eps1);
    c.eps1_trials.push_back({eps1, m});
    if (m >= 0.05) {
      c.params.eps1 = eps1;
      c.eps1_found = true;
      break;
    }
  }
  return c;
}

std::vector<Check> theorem_bounds(fields::Solution& sol, const RunConfig& cfg) {
  const auto& phi = cfg.phi;
  const auto& rp = cfg.regions;
  const auto s = blowup_sample(sol, rp.t1);
  const std::string tag = phi_label(phi);
  std::vector<Check> out;

  if (phi.family == PhiFamily::LogDecay) {
    double sup = 0;
    for (const auto& w : s) sup = std::max(sup, std::abs(w.w));
    out.push_back(make_check("w_bounded", tag + " sup|w|", sup, cfg.c_max, sup <= cfg.c_max));
    const double g = tail_growth(s, [](const WSample& w) { return w.w; });
    out.push_back(make_check("w_bounded", tag + " sup|w| finest third / rest", g, 1.5, g <= 1.5));
    // Convergence as t -> 1-: successive increments along each line shrink
    // (a logarithmic blow-up keeps them constant).
    double worst = 0;
    for (double x_n : {0.3, 0.1, 0.03}) {
      std::vector<double> line;
      for (const auto& w : s)
        if (w.x_n == x_n && w.side == Side::Before) line.push_back(w.w);
      if (line.size() < 4) continue;
      double largest = 0;
      for (std::size_t i = 1; i < line.size(); ++i) largest = std::max(largest, std::abs(line[i] - line[i - 1]));
      const double last = std::abs(line.back() - line[line.size() - 2]);
      worst = std::max(worst, largest > 0 ? last / largest : kInfD);
    }
    out.push_back(make_check("w_bounded", tag + " t<1 last/largest increment", worst, 0.5, worst <= 0.5));
    return out;
  }

  double upper = 0;
  for (const auto& w : s) upper = std::max(upper, std::abs(w.w) / phi_at(phi, w.d));
  out.push_back(make_check("w_upper_bound", tag + " sup|w|/phi(|t-1|)", upper, cfg.c_max, upper <= cfg.c_max));
  const double g = tail_growth(s, [&](const WSample& w) { return w.w / phi_at(phi, w.d); });
  out.push_back(make_check("w_upper_bound", tag + " sup|w|/phi(|t-1|) finest third / rest", g, 1.5, g <= 1.5));

  const double margin = lower_margin(s, phi, rp.eps1);
  out.push_back(make_check("w_lower_bound", tag + " t<1 TildeDMinus min(w/phi)/sup", margin, 0.05, margin >= 0.05));

  double sign = -kInfD, magnitude = kInfD;
  for (const auto& w : s) {
    if (w.side != Side::After) continue;
    const double t = 1 + w.d;
    if (!asymptotics::in_region(Region::TildeDMinus, w.x_n, t, rp) && !asymptotics::in_region(Region::DZero, w.x_n, t, rp))
      continue;
    const double r = w.w / phi_at(phi, w.d);
    sign = std::max(sign, r);
    magnitude = std::min(magnitude, -r / upper);
  }
  if (std::isfinite(sign)) {
    out.push_back(make_check("w_sign", tag + " t>1 TildeDMinus+DZero max(w/phi)", sign, 0, sign < 0));
    out.push_back(
        make_check("w_lower_bound", tag + " t>1 TildeDMinus+DZero min(-w/phi)/sup", magnitude, 0.05, magnitude >= 0.05));
  }

  if (phi.family == PhiFamily::LogGrowth) {
    const double lg = tail_growth(s, [](const WSample& w) { return w.w / std::abs(std::log(w.d)); });
    out.push_back(make_check("w_log_ratio", tag + " sup|w|/|ln|t-1|| finest third / rest", lg, 1.5, lg <= 1.5));
    // Unbounded growth: w increases linearly in |ln(1-t)| on each TildeDMinus line.
    for (double x_n : {0.3, 0.1, 0.03}) {
      std::vector<double> u, v;
      for (const auto& w : s)
        if (w.x_n == x_n && w.side == Side::Before && rp.eps1 * std::sqrt(w.d) <= x_n) {
          u.push_back(std::abs(std::log(w.d)));
          v.push_back(w.w);
        }
      if (u.size() < 3) continue;
      Eigen::MatrixXd A(static_cast<long>(u.size()), 2);
      Eigen::VectorXd b(static_cast<long>(u.size()));
      for (std::size_t i = 0; i < u.size(); ++i) {
        A(static_cast<long>(i), 0) = u[i];
        A(static_cast<long>(i), 1) = 1;
        b[static_cast<long>(i)] = v[i];
      }
      const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
      const double mean = b.mean();
      const double ss_tot = (b.array() - mean).square().sum();
      const double ss_res = (A * coef - b).squaredNorm();
      const double r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 0;
      const bool increasing = std::is_sorted(v.begin(), v.end());
      out.push_back(make_check("w_unbounded", tag + " x_n=" + fmt(x_n) + " slope in |ln(1-t)| (r2=" + fmt(r2) + ")",
                               coef[0], 0, coef[0] > 0 && r2 >= 0.98 && increasing));
    }
  }
  return out;
}

// ---------------------------------------------------------------- rates

std::string RateSweep::region_label() const { return any_region ? "any" : asymptotics::to_string(region); }

std::vector<RateSweep> rate_sweeps(fields::Solution& sol, const RunConfig& cfg) {
  const auto& rp = cfg.regions;
  const auto& phi = cfg.phi;
  const int n = sol.n();
  const int k0 = first_exponent(rp.t1);

  struct Plan {
    Quantity quantity;
    Region region;
    bool any;
    Side side;
    std::vector<std::pair<double, double>> points;  // (x_n, d)
  };
  std::vector<Plan> plans;
  auto d_line = [&](int k_first, int k_last, const std::function<double(double)>& x_of_d) {
    std::vector<std::pair<double, double>> pts;
    for (int k = k_first; k <= k_last; ++k) {
      const double d = std::ldexp(1.0, -k);
      pts.push_back({x_of_d(d), d});
    }
    return pts;
  };
  {
    int k = k0;
    while (rp.eps1 * std::sqrt(std::ldexp(1.0, -k)) > 0.3) ++k;
    plans.push_back({Quantity::W, Region::TildeDMinus, false, Side::Before, d_line(k, 24, [](double) { return 0.3; })});
  }
  for (Side side : {Side::Before, Side::After})
    plans.push_back({Quantity::DxnW, Region::TildeDPlus, false, side,
                     d_line(k0, 22, [&](double d) { return 0.5 * rp.eps0 * std::sqrt(d); })});
  for (Side side : {Side::Before, Side::After}) {
    std::vector<std::pair<double, double>> pts;
    for (int j = 5; j <= 15; ++j) {
      const double x_n = std::ldexp(1.0, -j);
      pts.push_back({x_n, std::min(x_n * x_n / (4 * rp.eps1 * rp.eps1), 0.5 * rp.t1)});
    }
    plans.push_back({Quantity::DxnW, Region::TildeDMinus, false, side, pts});
  }
  plans.push_back({Quantity::P, Region::DMinus, true, Side::Before, d_line(k0, 22, [](double) { return 0.1; })});
  {
    auto pts = d_line(k0, 22, [](double d) { return std::sqrt(d); });
    plans.push_back({Quantity::P, asymptotics::classify_region(pts.front().first, 1 + pts.front().second, rp), false,
                     Side::After, pts});
  }

  std::vector<RateSweep> out;
  for (const auto& plan : plans) {
    RateSweep sw;
    sw.quantity = plan.quantity;
    sw.region = plan.region;
    sw.any_region = plan.any;
    sw.side = plan.side;
    const auto pred = asymptotics::predicted_rate(plan.quantity, plan.any ? Region::DPlus : plan.region, plan.side, phi);
    if (pred.kind != asymptotics::RateKind::Power && pred.kind != asymptotics::RateKind::Expression) continue;
    sw.variable = pred.variable;
    sw.expected_sign = pred.sign;

    std::vector<verify::Sample> model;
    for (const auto& [x_n, d] : plan.points) {
      const double t = plan.side == Side::Before ? 1 - d : 1 + d;
      if (!plan.any && !asymptotics::in_region(plan.region, x_n, t, rp)) {
        sw.error = "sample outside " + asymptotics::to_string(plan.region);
        break;
      }
      const auto q = point_on_axis(n, x_n, t);
      double v = 0;
      switch (plan.quantity) {
        case Quantity::W: v = sol.velocity(1, q).total.value; break;
        case Quantity::DxnW: v = sol.normal_derivative(1, q).total.value; break;
        case Quantity::P: v = sol.pressure(q).total.value; break;
      }
      const double scale = pred.variable == Variable::Xn ? x_n : d;
      sw.samples.push_back({scale, v});
      model.push_back({scale, pred.profile(x_n, t)});
      if (sw.expected_sign != 0 && v * sw.expected_sign <= 0) sw.sign_ok = false;
    }

    verify::FitOptions opt;
    opt.tol_slope = cfg.rates_tol_slope;
    opt.min_r_squared = cfg.rates_min_r2;
    if (sw.error.empty()) {
      try {
        sw.predicted = pred.kind == asymptotics::RateKind::Power ? pred.exponent
                                                                 : verify::fit_rate(model, 0, {0, 0, 6, 3}).slope;
        sw.fit = verify::fit_rate(sw.samples, sw.predicted, opt);
      } catch (const std::invalid_argument& e) {
        sw.error = e.what();
      }
    }
    sw.pass = sw.error.empty() && sw.fit.pass && sw.sign_ok;
    out.push_back(std::move(sw));
  }
  return out;
}

// ---------------------------------------------------------------- L^p scans

std::vector<LpCase> lp_cases(const RunConfig& cfg, fields::Solution* sol) {
  using verify::LpVerdict;
  const auto& phi = cfg.phi;
  verify::LpScanConfig lc = cfg.lp;
  lc.t1 = cfg.regions.t1;

  std::vector<LpCase> cases;
  auto add = [&](Quantity q, std::map<double, LpVerdict> verdicts, double critical) {
    LpCase c;
    c.quantity = q;
    c.expected_verdicts = std::move(verdicts);
    c.expected_critical = critical;
    if (critical > 0)
      for (double f : {0.5, 0.75, 0.9, 1.1, 1.5, 2.0}) c.p_list.push_back(critical * f);
    else
      for (const auto& kv : c.expected_verdicts) c.p_list.push_back(kv.first);
    cases.push_back(std::move(c));
  };
  switch (phi.family) {
    case PhiFamily::Power: {
      const double a = phi.a;
      add(Quantity::W, {}, 3 / (2 * a));
      add(Quantity::DxnW, {}, 3 / (1 + 2 * a));
      add(Quantity::P, {}, 1 / (1 + a));
      break;
    }
    case PhiFamily::LogGrowth:
      add(Quantity::W, {{kInfD, LpVerdict::Diverging}}, 0);
      add(Quantity::DxnW, {{2.5, LpVerdict::Converging}, {3.0, LpVerdict::Diverging}}, 0);
      add(Quantity::P, {{1.0, LpVerdict::Diverging}}, 0);
      break;
    case PhiFamily::LogDecay:
      add(Quantity::W, {{kInfD, LpVerdict::Converging}}, 0);
      add(Quantity::DxnW, {{3.0, LpVerdict::Converging}, {4.0, LpVerdict::Diverging}}, 0);
      add(Quantity::P, {{1.0, LpVerdict::Converging}}, 0);
      break;
  }

  for (auto& c : cases) {
    verify::FieldFunction measured;
    if (lc.source == verify::LpSource::Measured) {
      if (!sol) throw UsageError("lp.source=measured needs a field solution");
      const Quantity q = c.quantity;
      measured = [sol, q](const Vecd& x, double t) {
        fields::SpaceTimePoint pt;
        pt.p.x_prime = x.head(x.size() - 1);
        pt.p.x_n = x[x.size() - 1];
        pt.t = t;
        switch (q) {
          case Quantity::W: return std::abs(sol->velocity(1, pt).total.value);
          case Quantity::DxnW: return std::abs(sol->normal_derivative(1, pt).total.value);
          case Quantity::P: break;
        }
        return std::abs(sol->pressure(pt).total.value);
      };
    }
    c.result = verify::lp_scan(c.quantity, c.p_list, phi, lc, measured, cfg.n);
    bool ok = c.result.monotone;
    if (c.expected_critical > 0) {
      ok = ok && std::isfinite(c.result.critical_p) &&
           std::abs(c.result.critical_p - c.expected_critical) <= cfg.lp_tol * c.expected_critical;
    } else {
      for (const auto& pt : c.result.points) {
        const auto it = c.expected_verdicts.find(pt.p);
        if (it != c.expected_verdicts.end()) ok = ok && pt.verdict == it->second;
      }
    }
    c.pass = ok;
  }
  return cases;
}

// ---------------------------------------------------------------- residuals

std::vector<ResidualCheck> residual_checks(fields::Solution& sol, const RunConfig& cfg) {
  const int n = sol.n();
  auto rng = make_rng(cfg.seed, "residuals");
  const double md = cfg.residual_min_distance;
  const double min_dt = std::max(md * md, 25 * cfg.residual_h * cfg.residual_h);
  std::vector<ResidualCheck> out;
  for (int s = 0; s < cfg.residual_points; ++s) {
    fields::SpaceTimePoint q;
    q.p.x_prime = random_in_ball(rng, n - 1, 0.5);
    q.p.x_n = uniform(rng, std::max({md, 5 * cfg.residual_h, 0.1}), 0.45);
    do {
      q.t = uniform(rng, 0.5, 1.25);
    } while (std::abs(q.t - 1) < min_dt);
    // An inconclusive budget is refined once at half the step.
    double h = cfg.residual_h;
    auto report = fields::pde_residuals(sol, q, h, 1e-2);
    if (report.verdict == fields::Verdict::Inconclusive) {
      h /= 2;
      report = fields::pde_residuals(sol, q, h, 1e-2);
    }
    out.push_back({q, h, report});
  }
  return out;
}

fields::TestField weak_test_field(int n) {
  Vecd c = Vecd::Constant(n - 1, -0.7);
  return fields::TestField(n, c, 0.3, 0.3, 0.7, 0.15);
}

fields::WeakIdentityReport weak_identity_check(fields::Solution& sol, const RunConfig& cfg) {
  return fields::weak_identity(sol, weak_test_field(sol.n()), cfg.weak_nodes, 1e-4);
}

// ---------------------------------------------------------------- tables

namespace {

void add_common_notes(csv::Table& t, const RunConfig& cfg) {
  t.add_note("phi=" + phi_label(cfg.phi) + " n=" + std::to_string(cfg.n) + " seed=" + std::to_string(cfg.seed));
  const auto& r = cfg.regions;
  t.add_note("regions t0=" + fmt(r.t0) + " t1=" + fmt(r.t1) + " eps0=" + fmt(r.eps0) + " eps1=" + fmt(r.eps1) +
             (cfg.calibrate_regions ? " (calibrated)" : " (fixed)"));
}

std::string pass_str(bool p) { return p ? "pass" : "fail"; }

void add_check_rows(TableResult& tr, const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    tr.table.add_row({c.check, c.item, fmt(c.value), fmt(c.limit), pass_str(c.pass)});
    ++tr.executed;
    tr.passed += c.pass;
  }
}

}  // namespace

TableResult eval_table(fields::Solution& sol, const RunConfig& cfg) {
  const int n = sol.n();
  std::vector<std::string> cols;
  for (int k = 1; k <= n; ++k) cols.push_back("x" + std::to_string(k));
  for (const char* c : {"t", "component", "value", "err"}) cols.emplace_back(c);
  TableResult tr{csv::Table(cols)};
  add_common_notes(tr.table, cfg);
  for (const auto& q : cfg.eval_points) {
    q.validate();
    std::vector<std::string> head;
    for (int k = 0; k < n - 1; ++k) head.push_back(fmt(q.p.x_prime[k]));
    head.push_back(fmt(q.p.x_n));
    head.push_back(fmt(q.t));
    auto row = [&](const std::string& name, const fields::FieldSample& s) {
      auto r = head;
      r.push_back(name);
      r.push_back(fmt(s.value));
      r.push_back(fmt(s.err_estimate));
      tr.table.add_row(std::move(r));
    };
    const auto bundle = sol.evaluate(q, true);
    for (int i = 0; i < n; ++i) row("w" + std::to_string(i + 1), bundle.w[static_cast<std::size_t>(i)].total);
    for (int i = 0; i < n - 1; ++i) row("dxn_w" + std::to_string(i + 1), bundle.dxn_w[static_cast<std::size_t>(i)].total);
    row("p", sol.pressure(q).total);
  }
  return tr;
}

TableResult rates_table(fields::Solution& sol, const RunConfig& cfg) {
  TableResult tr{csv::Table({"region", "quantity", "side", "predicted", "slope", "r2", "pass"})};
  add_common_notes(tr.table, cfg);
  for (const auto& s : rate_sweeps(sol, cfg)) {
    if (!s.error.empty()) tr.table.add_note(s.region_label() + " " + asymptotics::to_string(s.quantity) + " " +
                                            asymptotics::to_string(s.side) + ": " + s.error);
    if (!s.sign_ok)
      tr.table.add_note(s.region_label() + " " + asymptotics::to_string(s.quantity) + " " +
                        asymptotics::to_string(s.side) + ": sign differs from the prediction");
    tr.table.add_row({s.region_label(), asymptotics::to_string(s.quantity), asymptotics::to_string(s.side),
                      fmt(s.predicted), fmt(s.fit.slope), fmt(s.fit.r_squared), pass_str(s.pass)});
    ++tr.executed;
    tr.passed += s.pass;
  }
  return tr;
}

TableResult lemmas_table(fields::Solution& sol, const RunConfig& cfg, const Calibration* calibration) {
  TableResult tr{csv::Table({"check", "case", "value", "limit", "pass"})};
  add_common_notes(tr.table, cfg);
  if (calibration) {
    for (const auto& b : calibration->t0_trials)
      tr.table.add_row({"calibrate_t0", "t0=" + fmt(b.t0), fmt(b.worst_ratio()), "10", pass_str(b.worst_ratio() <= 10)});
    for (const auto& [eps1, m] : calibration->eps1_trials)
      tr.table.add_row({"calibrate_eps1", "eps1=" + fmt(eps1), fmt(m), "0.05", pass_str(m >= 0.05)});
    const bool ok = calibration->t0_found && (calibration->eps1_found || cfg.phi.family == PhiFamily::LogDecay);
    tr.table.add_row({"calibration", "regions", ok ? "1" : "0", "1", pass_str(ok)});
    ++tr.executed;
    tr.passed += ok;
  }
  {
    const auto ids = kernel_identities(cfg);
    double worst = 0;
    for (const auto& c : ids) worst = std::max(worst, c.value);
    add_check_rows(tr, {make_check("kernel_identities", "max over " + std::to_string(ids.size()) + " points", worst,
                                   cfg.kernel_tol, worst <= cfg.kernel_tol)});
    add_check_rows(tr, ids);
  }
  for (const auto& cell : psi_cells(cfg)) {
    const bool counted = cell.gated;
    tr.table.add_row({counted ? "psi_slope" : "psi_slope_supplementary", cell.label() + " predicted=" + fmt(cell.predicted_slope),
                      fmt(cell.slope), fmt(cfg.psi_tol_slope), pass_str(std::abs(cell.slope - cell.predicted_slope) <= cfg.psi_tol_slope)});
    tr.table.add_row({counted ? "psi_bracket" : "psi_bracket_supplementary", cell.label() + " delta=" + fmt(cell.delta),
                      fmt(cell.C), fmt(cfg.c_max), pass_str(cell.C <= cfg.c_max)});
    if (counted) {
      ++tr.executed;
      tr.passed += cell.pass;
    }
  }
  add_check_rows(tr, profile_inequalities(cfg));
  {
    const auto j = j1_constant(cfg);
    tr.table.add_row({"j1_constant", "grid A", fmt(j.C_a), "", ""});
    tr.table.add_row({"j1_constant", "grid B", fmt(j.C_b), "", ""});
    add_check_rows(tr, {make_check("j1_constant", "spread |C_A-C_B|/max", j.spread, 0.2, j.pass)});
  }
  {
    const auto b = convolution_brackets(cfg, cfg.regions.t0);
    add_check_rows(tr, {make_check("convolution_bracket", "tangential c2/c1 t0=" + fmt(b.t0),
                                   b.c2_tangential / b.c1_tangential, 50, b.c1_tangential > 0 && b.c2_tangential <= 50 * b.c1_tangential),
                        make_check("convolution_bracket", "normal c2/c1 t0=" + fmt(b.t0), b.c2_normal / b.c1_normal, 50,
                                   b.c1_normal > 0 && b.c2_normal <= 50 * b.c1_normal)});
  }
  add_check_rows(tr, theorem_bounds(sol, cfg));
  return tr;
}

TableResult residuals_table(fields::Solution& sol, const RunConfig& cfg) {
  const int n = sol.n();
  std::vector<std::string> cols{"check"};
  for (int k = 1; k <= n; ++k) cols.push_back("x" + std::to_string(k));
  for (const char* c : {"t", "h", "residual", "budget", "largest", "relative", "verdict"}) cols.emplace_back(c);
  TableResult tr{csv::Table(cols)};
  add_common_notes(tr.table, cfg);
  tr.table.add_note("budget limit 1e-2 of the largest term; h is halved once when the budget is too loose");
  for (const auto& rc : residual_checks(sol, cfg)) {
    std::vector<std::string> head;
    for (int k = 0; k < n - 1; ++k) head.push_back(fmt(rc.q.p.x_prime[k]));
    head.push_back(fmt(rc.q.p.x_n));
    head.push_back(fmt(rc.q.t));
    head.push_back(fmt(rc.h));
    auto row = [&](const std::string& name, double res, double budget, double largest) {
      const bool ok = std::abs(res) <= budget;
      const bool tight = budget <= 1e-2 * largest;
      const auto v = !ok ? fields::Verdict::Fail : (tight ? fields::Verdict::Pass : fields::Verdict::Inconclusive);
      std::vector<std::string> r{name};
      r.insert(r.end(), head.begin(), head.end());
      for (double x : {res, budget, largest, largest > 0 ? std::abs(res) / largest : 0.0}) r.push_back(fmt(x));
      r.push_back(fields::to_string(v));
      tr.table.add_row(std::move(r));
    };
    for (int i = 0; i < n; ++i)
      row("momentum" + std::to_string(i + 1), rc.report.momentum[i], rc.report.momentum_budget[i],
          rc.report.largest_momentum_term);
    row("divergence", rc.report.divergence, rc.report.divergence_budget, rc.report.largest_divergence_term);
    ++tr.executed;
    tr.passed += rc.report.verdict == fields::Verdict::Pass;
  }
  if (cfg.weak_nodes > 0) {
    const auto w = weak_identity_check(sol, cfg);
    const double largest = std::max({std::abs(w.time_term), std::abs(w.laplacian_term), std::abs(w.boundary_term)});
    std::vector<std::string> r{"weak_identity"};
    for (int k = 0; k <= n; ++k) r.emplace_back("");
    r.emplace_back("");
    for (double x : {w.residual, w.budget, largest, w.relative}) r.push_back(fmt(x));
    r.push_back(fields::to_string(w.verdict));
    tr.table.add_row(std::move(r));
    tr.table.add_note("weak identity terms: time " + fmt(w.time_term) + " laplacian " + fmt(w.laplacian_term) +
                      " boundary " + fmt(w.boundary_term) + " nodes " + std::to_string(w.nodes));
    ++tr.executed;
    tr.passed += w.verdict == fields::Verdict::Pass;
  }
  return tr;
}

TableResult lp_table(fields::Solution& sol, const RunConfig& cfg) {
  TableResult tr{csv::Table(
      {"quantity", "p", "verdict", "growth_rate", "partial_sum", "tail_estimate", "expected", "pass"})};
  add_common_notes(tr.table, cfg);
  tr.table.add_note("source=" + verify::to_string(cfg.lp.source) + " shells=" + std::to_string(cfg.lp.shells) +
                    " t1=" + fmt(cfg.regions.t1));
  for (const auto& c : lp_cases(cfg, &sol)) {
    const std::string q = asymptotics::to_string(c.quantity);
    for (const auto& pt : c.result.points) {
      const auto it = c.expected_verdicts.find(pt.p);
      const std::string expected = it != c.expected_verdicts.end() ? verify::to_string(it->second) : "";
      const std::string pass = expected.empty() ? "" : pass_str(pt.verdict == it->second);
      tr.table.add_row({q, fmt(pt.p), verify::to_string(pt.verdict), fmt(pt.growth_rate),
                        fmt(pt.partial_sums.empty() ? 0.0 : pt.partial_sums.back()), fmt(pt.tail_estimate), expected,
                        pass});
    }
    if (c.expected_critical > 0)
      tr.table.add_row({q, "critical", fmt(c.result.critical_p), "", "", "", fmt(c.expected_critical), pass_str(c.pass)});
    if (!c.result.monotone) tr.table.add_note(q + ": verdicts are not monotone in p");
    if (c.result.all_inconclusive) tr.table.add_note(q + ": every p inconclusive, review lp.tail_tol");
    ++tr.executed;
    tr.passed += c.pass;
  }
  return tr;
}

// ---------------------------------------------------------------- run

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"eval", "rates", "lemmas", "residuals", "lp-scan", "report"};
  return names;
}

int run(const std::string& subcommand, RunConfig cfg, std::ostream& log) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    throw UsageError("unknown subcommand '" + subcommand + "'");
  cfg.validate();
  if (subcommand == "eval" && cfg.eval_points.empty())
    throw UsageError("eval needs at least one point: set eval.points = x1,...,xn,t;...");

  std::filesystem::create_directories(cfg.output_dir);
  fields::Solution sol(cfg.phi, cfg.bump, cfg.quad);

  std::optional<Calibration> calibration;
  if (cfg.calibrate_regions && subcommand != "eval") {
    log << "calibrating regions\n";
    calibration = calibrate_regions(sol, cfg);
    cfg.regions = calibration->params;
    log << "  t0=" << fmt(cfg.regions.t0) << " t1=" << fmt(cfg.regions.t1) << " eps1=" << fmt(cfg.regions.eps1) << '\n';
  }
  cfg.lp.t1 = cfg.regions.t1;
  const std::uint64_t hash = config::config_hash(cfg);

  int executed = 0, passed = 0;
  std::vector<std::string> summary;
  auto emit = [&](const std::string& name, TableResult tr) {
    const std::string path = (std::filesystem::path(cfg.output_dir) / (name + ".csv")).string();
    tr.table.write_file(path, hash);
    executed += tr.executed;
    passed += tr.passed;
    summary.push_back(name + ": " + std::to_string(tr.passed) + "/" + std::to_string(tr.executed) + " passed");
    log << summary.back() << " -> " << path << '\n';
  };

  const bool all = subcommand == "report";
  if (subcommand == "eval" || (all && !cfg.eval_points.empty())) emit("eval", eval_table(sol, cfg));
  if (all || subcommand == "rates") emit("rates", rates_table(sol, cfg));
  if (all || subcommand == "lemmas") emit("lemmas", lemmas_table(sol, cfg, calibration ? &*calibration : nullptr));
  if (all || subcommand == "residuals") emit("residuals", residuals_table(sol, cfg));
  if (all || subcommand == "lp-scan") emit("lp-scan", lp_table(sol, cfg));

  if (all) {
    std::ofstream f(std::filesystem::path(cfg.output_dir) / "report.txt");
    f << csv::kVersion << "\nconfig_hash=" << csv::hex64(hash) << "\nphi=" << phi_label(cfg.phi) << '\n';
    for (const auto& s : summary) f << s << '\n';
    f << "total: " << passed << "/" << executed << " passed\n";
    if (!f) throw std::runtime_error("cannot write report.txt");
  }
  return passed == executed ? 0 : 2;
}

}  // namespace hsstokes::drivers
