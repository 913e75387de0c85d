#include "hsstokes/verify.hpp"

#include "hsstokes/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsstokes::verify {

using asymptotics::Quantity;
using asymptotics::Side;

namespace {

struct Line {
  double slope = 0, intercept = 0, r_squared = 1;
};

Line least_squares(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd A(x.size(), 2);
  A.col(0) = x;
  A.col(1).setOnes();
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (A * c - y).squaredNorm();
  Line l{c[0], c[1], 1.0};
  if (ss_tot > 0) l.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  return l;
}

}  // namespace

RateFit fit_rate(std::span<const Sample> samples, double predicted, const FitOptions& opt) {
  const int m = static_cast<int>(samples.size());
  if (m < opt.min_points)
    throw std::invalid_argument("fit_rate: need at least " + std::to_string(opt.min_points) + " samples, got " +
                                std::to_string(m));
  double lo = samples[0].first, hi = samples[0].first;
  int positive = 0, negative = 0;
  for (const auto& [s, v] : samples) {
    if (!(s > 0)) throw std::invalid_argument("fit_rate: scales must be positive");
    if (v == 0 || !std::isfinite(v)) throw std::invalid_argument("fit_rate: values must be finite and nonzero");
    (v > 0 ? positive : negative)++;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (positive && negative)
    throw std::invalid_argument("fit_rate: values change sign (sample crosses a region boundary)");
  if (std::log10(hi / lo) < opt.min_decades - 1e-12)
    throw std::invalid_argument("fit_rate: scales span fewer than " + std::to_string(opt.min_decades) + " decades");
  Eigen::VectorXd x(m), y(m);
  for (int k = 0; k < m; ++k) {
    x[k] = std::log(samples[static_cast<std::size_t>(k)].first);
    y[k] = std::log(std::abs(samples[static_cast<std::size_t>(k)].second));
  }
  const Line l = least_squares(x, y);
  RateFit r;
  r.slope = l.slope;
  r.intercept = l.intercept;
  r.r_squared = l.r_squared;
  r.n_points = m;
  r.predicted = predicted;
  r.tol_slope = opt.tol_slope;
  r.pass = std::abs(l.slope - predicted) <= opt.tol_slope && l.r_squared >= opt.min_r_squared;
  return r;
}

BracketReport bracket_check(std::span<const Sample> samples, const std::function<double(double)>& model,
                            double C_max) {
  if (samples.empty()) throw std::invalid_argument("bracket_check: empty sample");
  BracketReport r;
  r.C_max = C_max;
  r.n_points = static_cast<int>(samples.size());
  int model_sign = 0;
  for (const auto& [s, v] : samples) {
    const double m = model(s);
    const int sg = m > 0 ? 1 : (m < 0 ? -1 : 0);
    if (sg == 0 || (model_sign != 0 && sg != model_sign))
      throw std::invalid_argument("bracket_check: model must keep one strict sign on the sample");
    model_sign = sg;
  }
  r.min_ratio = std::numeric_limits<double>::infinity();
  r.max_ratio = 0;
  for (const auto& [s, v] : samples) {
    const double q = v / model(s);
    if (!(q > 0)) {
      if (r.sign_ok)
        r.diagnostic = "sign mismatch at scale " + std::to_string(s) + ": value " + std::to_string(v) +
                       " against model " + std::to_string(model(s));
      r.sign_ok = false;
      continue;
    }
    r.min_ratio = std::min(r.min_ratio, q);
    r.max_ratio = std::max(r.max_ratio, q);
  }
  if (!r.sign_ok) {
    r.pass = false;
    return r;
  }
  r.C = std::max(r.max_ratio, 1.0 / r.min_ratio);
  r.pass = r.C <= C_max;
  if (!r.pass) r.diagnostic = "bracket constant " + std::to_string(r.C) + " exceeds " + std::to_string(C_max);
  return r;
}

std::string to_string(LpVerdict v) {
  switch (v) {
    case LpVerdict::Converging: return "converging";
    case LpVerdict::Diverging: return "diverging";
    case LpVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(LpSource s) { return s == LpSource::Profile ? "profile" : "measured"; }

LpSource lp_source_from_string(const std::string& s) {
  if (s == "profile") return LpSource::Profile;
  if (s == "measured") return LpSource::Measured;
  throw std::invalid_argument("unknown lp source '" + s + "' (expected profile or measured)");
}

double lp_profile(Quantity q, const data::PhiSpec& phi, double x_n, double d, Side side) {
  if (!(d > 0 && x_n > 0)) throw std::invalid_argument("lp_profile: x_n and |t-1| must be positive");
  auto f = [&](int k, double s) { return data::phi(k, s, phi); };
  const bool before = side == Side::Before;
  switch (q) {
    case Quantity::W:
      return phi.family == data::PhiFamily::LogDecay ? 1.0 : std::abs(f(0, d));
    case Quantity::DxnW: {
      const double m = std::max(d, x_n * x_n);
      return before ? std::sqrt(m) * std::abs(f(1, m)) : std::abs(f(0, m)) / std::sqrt(m);
    }
    case Quantity::P:
      return before ? std::abs(f(1, d)) : x_n * std::abs(f(0, d)) / std::sqrt(d) + 1.0;
  }
  return 0;
}

void LpScanConfig::validate() const {
  if (!(t1 > 0 && t1 < 0.25)) throw std::invalid_argument("LpScanConfig: t1 must lie in (0, 1/4)");
  if (tail_window < 3) throw std::invalid_argument("LpScanConfig: tail_window must be at least 3");
  if (shells < tail_window + 2) throw std::invalid_argument("LpScanConfig: shells must exceed tail_window + 1");
  if (!(tail_tol > 0)) throw std::invalid_argument("LpScanConfig: tail_tol must be positive");
  if (points_per_dim < 1 || points_per_dim > 8)
    throw std::invalid_argument("LpScanConfig: points_per_dim must lie in [1, 8]");
  if (bisection_steps < 0) throw std::invalid_argument("LpScanConfig: bisection_steps must be non-negative");
}

LpPoint classify_terms(double p, std::vector<double> terms, const LpScanConfig& cfg) {
  LpPoint r;
  r.p = p;
  const int K = static_cast<int>(terms.size());
  if (K < cfg.tail_window) throw std::invalid_argument("classify_terms: fewer terms than the tail window");
  r.partial_sums.resize(terms.size());
  double s = 0;
  for (int k = 0; k < K; ++k) r.partial_sums[static_cast<std::size_t>(k)] = (s += terms[static_cast<std::size_t>(k)]);
  const int W = cfg.tail_window;
  double floor = 0;
  bool any = false;
  for (int k = K - W; k < K; ++k) {
    const double c = terms[static_cast<std::size_t>(k)];
    if (c > 0) {
      floor = any ? std::min(floor, c) : c;
      any = true;
    }
  }
  r.shell_terms = std::move(terms);
  if (!any) {
    r.growth_rate = -std::numeric_limits<double>::infinity();
    r.decay_power = std::numeric_limits<double>::infinity();
    r.tail_estimate = 0;
    r.verdict = LpVerdict::Converging;
    return r;
  }
  Eigen::VectorXd kk(W), lk(W), y(W);
  for (int w = 0; w < W; ++w) {
    const int k = K - W + w;
    kk[w] = k;
    lk[w] = std::log(k + 1.0);
    y[w] = std::log(std::max(r.shell_terms[static_cast<std::size_t>(k)], floor * 1e-30));
  }
  r.growth_rate = least_squares(kk, y).slope;
  r.decay_power = -least_squares(lk, y).slope;
  const double last = r.shell_terms.back();
  const double total = r.partial_sums.back();
  if (r.growth_rate >= 0 || r.decay_power <= 1) {
    r.tail_estimate = std::numeric_limits<double>::infinity();
    r.verdict = LpVerdict::Diverging;
    return r;
  }
  const double rho = std::exp(r.growth_rate);
  const double geo = last * rho / (1 - rho);
  const double poly = last * K / (r.decay_power - 1);
  r.tail_estimate = std::max(geo, poly);
  r.verdict = r.tail_estimate <= cfg.tail_tol * total ? LpVerdict::Converging : LpVerdict::Inconclusive;
  return r;
}

namespace {

// Cross-section area of the half ball B+_{1/2} at height x_n.
double section_area(int n, double x_n) {
  const double r2 = std::max(0.25 - x_n * x_n, 0.0);
  return n == 3 ? std::numbers::pi * r2 : 2 * std::sqrt(r2);
}

struct Cell {
  double x_lo, x_hi, d_lo, d_hi;
};

// Cells of shell k: x-level j and t-level m with max(j, m) = k.
std::vector<Cell> shell_cells(int k, double t1) {
  std::vector<Cell> cells;
  auto x_range = [](int j) { return std::pair{std::ldexp(1.0, -j - 2), std::ldexp(1.0, -j - 1)}; };
  auto d_range = [t1](int m) { return std::pair{t1 * std::ldexp(1.0, -2 * m - 2), t1 * std::ldexp(1.0, -2 * m)}; };
  for (int j = 0; j <= k; ++j)
    for (int m = 0; m <= k; ++m) {
      if (std::max(j, m) != k) continue;
      const auto [xl, xh] = x_range(j);
      const auto [dl, dh] = d_range(m);
      cells.push_back({xl, xh, dl, dh});
    }
  return cells;
}

// Per-shell integral of |f|^p (p finite) or sup |f| (p infinite).
std::vector<double> shell_terms(Quantity quantity, double p, const data::PhiSpec& phi, const LpScanConfig& cfg,
                                const FieldFunction& measured, int n) {
  const auto& gl = quad::gauss_legendre(cfg.points_per_dim);
  const bool sup = std::isinf(p);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.shells));
  for (int k = 0; k < cfg.shells; ++k) {
    double acc = 0;
    for (const Cell& c : shell_cells(k, cfg.t1)) {
      const double xm = 0.5 * (c.x_lo + c.x_hi), xr = 0.5 * (c.x_hi - c.x_lo);
      const double dm = 0.5 * (c.d_lo + c.d_hi), dr = 0.5 * (c.d_hi - c.d_lo);
      for (Side side : {Side::Before, Side::After}) {
        for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
          const double x_n = xm + xr * gl.nodes[a];
          const double area = section_area(n, x_n);
          for (std::size_t b = 0; b < gl.nodes.size(); ++b) {
            const double d = dm + dr * gl.nodes[b];
            const double w = xr * dr * gl.weights[a] * gl.weights[b];
            if (cfg.source == LpSource::Profile) {
              const double v = lp_profile(quantity, phi, x_n, d, side);
              acc = sup ? std::max(acc, v) : acc + w * area * std::pow(v, p);
              continue;
            }
            // x' on a square of the section's area, points_per_dim nodes per tangential direction.
            const double half = 0.5 * (n == 3 ? std::sqrt(area) : area);
            const double t = side == Side::Before ? 1 - d : 1 + d;
            const int tdim = n - 1;
            const int nn = static_cast<int>(gl.nodes.size());
            const int total = tdim == 2 ? nn * nn : nn;
            double inner = 0;
            for (int idx = 0; idx < total; ++idx) {
              Vecd x(n);
              double wt = 1;
              for (int c2 = 0, rem = idx; c2 < tdim; ++c2, rem /= nn) {
                const auto node = static_cast<std::size_t>(rem % nn);
                x[c2] = half * gl.nodes[node];
                wt *= 0.5 * gl.weights[node];
              }
              x[n - 1] = x_n;
              const double v = std::abs(measured(x, t));
              if (sup) acc = std::max(acc, v);
              else inner += wt * std::pow(v, p);
            }
            if (!sup) acc += w * area * inner;
          }
        }
      }
    }
    out.push_back(acc);
  }
  if (sup) {
    // Increments of the running supremum, so the partial sums are the sup itself.
    double run = 0;
    for (double& v : out) {
      const double next = std::max(run, v);
      v = next - run;
      run = next;
    }
  }
  return out;
}

}  // namespace

LpScanResult lp_scan(Quantity quantity, std::span<const double> p_list, const data::PhiSpec& phi,
                     const LpScanConfig& cfg, const FieldFunction& measured, int n) {
  cfg.validate();
  phi.validate();
  if (p_list.empty()) throw std::invalid_argument("lp_scan: empty exponent list");
  if (n != 2 && n != 3) throw std::invalid_argument("lp_scan: n must be 2 or 3");
  if (cfg.source == LpSource::Measured && !measured)
    throw std::invalid_argument("lp_scan: the measured source needs a field function");
  for (double p : p_list)
    if (!(p > 0)) throw std::invalid_argument("lp_scan: exponents must be positive");
  auto run = [&](double p) { return classify_terms(p, shell_terms(quantity, p, phi, cfg, measured, n), cfg); };

  LpScanResult r;
  r.quantity = quantity;
  r.t1 = cfg.t1;
  for (double p : p_list) r.points.push_back(run(p));

  std::vector<const LpPoint*> sorted;
  for (const auto& pt : r.points) sorted.push_back(&pt);
  std::sort(sorted.begin(), sorted.end(), [](const LpPoint* a, const LpPoint* b) { return a->p < b->p; });
  bool seen_div = false;
  r.all_inconclusive = true;
  for (const LpPoint* pt : sorted) {
    if (pt->verdict != LpVerdict::Inconclusive) r.all_inconclusive = false;
    if (pt->verdict == LpVerdict::Diverging) seen_div = true;
    if (seen_div && pt->verdict == LpVerdict::Converging) r.monotone = false;
  }
  const LpPoint* lo = nullptr;
  const LpPoint* hi = nullptr;
  for (const LpPoint* pt : sorted)
    if (pt->verdict == LpVerdict::Diverging) {
      hi = pt;
      break;
    }
  for (const LpPoint* pt : sorted)
    if (pt->verdict == LpVerdict::Converging && (!hi || pt->p < hi->p)) lo = pt;
  if (!lo || !hi || std::isinf(hi->p)) return r;
  r.critical_lo = lo->p;
  r.critical_hi = hi->p;
  // Bisection on the sign of the shell growth rate when it separates the
  // bracket, otherwise on the verdict itself.
  const bool by_rate = lo->growth_rate < 0 && hi->growth_rate >= 0;
  double a = lo->p, b = hi->p;
  for (int it = 0; it < cfg.bisection_steps && b - a > 1e-6 * b; ++it) {
    const double mid = 0.5 * (a + b);
    const LpPoint m = run(mid);
    const bool up = by_rate ? m.growth_rate >= 0 : m.verdict == LpVerdict::Diverging;
    (up ? b : a) = mid;
  }
  r.critical_p = 0.5 * (a + b);
  return r;
}

}  // namespace hsstokes::verify
