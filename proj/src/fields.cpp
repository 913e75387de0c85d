#include "hsstokes/fields.hpp"

#include "hsstokes/chebyshev.hpp"
#include "hsstokes/detail/adaptive.hpp"
#include "hsstokes/kernels.hpp"
#include "hsstokes/normal_factors.hpp"
#include "hsstokes/tangential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace hsstokes::fields {

using kernels::gauss1d;
using quad::EndpointHint;
using quad::QuadConfig;
using quad::QuadResult;
using quad::VecQuadResult;
using quad::detail::Val;
using Factors = std::array<std::array<double, 4>, 2>;

void SpaceTimePoint::validate() const {
  p.validate();
  if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("SpaceTimePoint: t must be positive");
}

std::string to_string(Component c) {
  switch (c) {
    case Component::wL: return "wL";
    case Component::wB: return "wB";
    case Component::wN: return "wN";
    case Component::w: return "w";
    case Component::dxn_w: return "dxn_w";
    case Component::p1: return "p1";
    case Component::p21: return "p21";
    case Component::p22: return "p22";
    case Component::p3: return "p3";
    case Component::p: return "p";
  }
  return "?";
}

namespace {

constexpr std::size_t kCacheLimit = 48;
constexpr int kChebNodes = 20;
constexpr int kChebPieces = 9;

// Active range of theta = t - s, where 1 - s = theta - shift.
struct Window {
  double t = 0, shift = 0, lo = 0, hi = 0;
  bool empty() const { return !(hi > lo); }
};

Window make_window(double t, const data::PhiSpec& phi) {
  Window w;
  w.t = t;
  w.shift = t - 1;
  w.lo = std::max(0.0, t - 1);
  w.hi = t - (1 - phi.cutoff_outer);
  return w;
}

double phi_at(int k, double theta, const Window& w, const data::PhiSpec& phi) {
  const double u = theta - w.shift;
  return u > 0 ? data::phi(k, u, phi) : 0.0;
}

// Hint at theta = lo combining the blow-up of phi (t >= 1) with a kernel factor
// behaving like theta^kernel_exp at theta = 0 (relevant when lo = 0).
std::vector<EndpointHint> lo_hint(const Window& w, const data::PhiSpec& phi, double kernel_exp) {
  const bool phi_sing = w.t >= 1;
  const bool ker_sing = w.lo == 0 && kernel_exp < 0;
  if (!phi_sing && !ker_sing) return {};
  double e = 0;
  if (phi_sing) e -= phi.growth_exponent();
  if (ker_sing) e += kernel_exp;
  return {{w.lo, e}};
}

void add_geometric(std::vector<double>& b, double from, double first, double to, double ratio) {
  if (!(first > 0)) return;
  for (double h = first; from + h < to; h *= ratio) b.push_back(from + h);
}

std::vector<double> tidy(std::vector<double> b, double lo, double hi) {
  std::erase_if(b, [&](double v) { return !(v > lo && v < hi); });
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// Breakpoints for a time integral over the window at height x_n.
std::vector<double> time_breaks(const Window& w, const data::PhiSpec& phi, double xn, double ratio = 4) {
  std::vector<double> b;
  const double d = std::abs(w.t - 1);
  const double s0 = d > 0 ? std::min(xn * xn, d) : xn * xn;
  add_geometric(b, w.lo, s0 / 8, w.hi, ratio);
  if (w.t < 1) add_geometric(b, 0.0, d, w.hi, ratio);
  add_geometric(b, 0.0, xn * xn / 4, w.hi, ratio);
  b.push_back(w.shift + phi.cutoff_inner);
  return tidy(std::move(b), w.lo, w.hi);
}

// P_m(sigma) products from the per-coordinate factors.
struct Products {
  int d = 0;
  double p0 = 0;
  std::array<double, 2> e{};                   // P_{e_i}
  std::array<std::array<double, 2>, 2> eaa{};  // P_{e_i + 2 e_k}
  std::array<double, 2> aa{};                  // P_{2 e_k}

  Products(const Factors& b, int dim) : d(dim) {
    auto rest = [&](int skip1, int skip2) {
      double v = 1;
      for (int k = 0; k < d; ++k)
        if (k != skip1 && k != skip2) v *= b[k][0];
      return v;
    };
    p0 = rest(-1, -1);
    for (int i = 0; i < d; ++i) {
      e[i] = b[i][1] * rest(i, -1);
      aa[i] = b[i][2] * rest(i, -1);
      for (int k = 0; k < d; ++k) eaa[i][k] = k == i ? b[i][3] * rest(i, -1) : b[i][1] * b[k][2] * rest(i, k);
    }
  }
  bool zero() const {
    if (p0 != 0) return false;
    for (int i = 0; i < d; ++i)
      if (e[i] != 0 || aa[i] != 0) return false;
    return true;
  }
};

// Spatial moments S = int g^S(y') K(x' - y', x_n) dy' for the Newtonian kernel
// and the derivatives needed by w^N and the pressure.
struct Moments {
  double N = 0, Dn = 0, DnDn = 0;
  std::array<double, 2> Di{}, DnDi{};
  double err = 0;  // largest absolute deviation between the two rules
};

Moments tensor_moments(const Vecd& xp, double xn, const data::BumpSpec& bump, int order) {
  const int d = static_cast<int>(xp.size()), n = d + 1;
  const auto& rule = quad::gauss_legendre(order);
  const double c = -bump.center(), r = bump.half_width();
  const int m = static_cast<int>(rule.nodes.size());
  std::vector<double> y(m), wb(m);
  for (int k = 0; k < m; ++k) {
    y[k] = c + r * rule.nodes[k];
    wb[k] = r * rule.weights[k] * data::bump_factor(0, y[k], bump);
  }
  Moments s;
  Vecd x(n);
  x[d] = xn;
  const MultiIndex en = MultiIndex::unit(d), enn = MultiIndex::unit(d, 2);
  auto accumulate = [&](double w) {
    s.N += w * kernels::newtonian(MultiIndex{}, x);
    s.Dn += w * kernels::newtonian(en, x);
    s.DnDn += w * kernels::newtonian(enn, x);
    for (int i = 0; i < d; ++i) {
      s.Di[i] += w * kernels::newtonian(MultiIndex::unit(i), x);
      s.DnDi[i] += w * kernels::newtonian(MultiIndex::unit(i) + en, x);
    }
  };
  for (int a = 0; a < m; ++a) {
    x[0] = xp[0] - y[a];
    if (d == 1) {
      accumulate(wb[a]);
      continue;
    }
    for (int b = 0; b < m; ++b) {
      x[1] = xp[1] - y[b];
      accumulate(wb[a] * wb[b]);
    }
  }
  return s;
}

double moment_distance(const Vecd& xp, double xn, const data::BumpSpec& bump) {
  const double c = -bump.center(), r = bump.half_width();
  double d2 = xn * xn;
  for (int k = 0; k < xp.size(); ++k) {
    const double gap = std::max(0.0, std::abs(xp[k] - c) - r);
    d2 += gap * gap;
  }
  return std::sqrt(d2);
}

Moments spatial_moments(const Vecd& xp, double xn, const data::BumpSpec& bump, const QuadConfig& cfg) {
  const int d = static_cast<int>(xp.size()), n = d + 1;
  if (moment_distance(xp, xn, bump) > 2 * bump.half_width()) {
    Moments hi = tensor_moments(xp, xn, bump, 64);
    const Moments lo = tensor_moments(xp, xn, bump, 48);
    double e = std::max({std::abs(hi.N - lo.N), std::abs(hi.Dn - lo.Dn), std::abs(hi.DnDn - lo.DnDn)});
    for (int i = 0; i < d; ++i) e = std::max({e, std::abs(hi.Di[i] - lo.Di[i]), std::abs(hi.DnDi[i] - lo.DnDi[i])});
    hi.err = e;
    return hi;
  }
  // Close to the support: adaptive integration with breakpoints at x'.
  const double c = -bump.center(), r = bump.half_width();
  Eigen::VectorXd lo(d), up(d), ctr(d);
  std::vector<quad::AxisHints> axes(d);
  for (int k = 0; k < d; ++k) {
    lo[k] = c - r;
    up[k] = c + r;
    ctr[k] = c;
    axes[k].breakpoints = {xp[k] - 4 * xn, xp[k] - xn, xp[k], xp[k] + xn, xp[k] + 4 * xn};
  }
  auto moment = [&](const MultiIndex& mi) {
    auto f = [&](const Eigen::VectorXd& y) {
      Vecd x(n);
      double g = 1;
      for (int k = 0; k < d; ++k) {
        x[k] = xp[k] - y[k];
        g *= data::bump_factor(0, y[k], bump);
      }
      x[d] = xn;
      return g == 0 ? 0.0 : g * kernels::newtonian(mi, x);
    };
    return quad::integrate_nd(f, {lo, up}, ctr, r, cfg, axes);
  };
  Moments s;
  const MultiIndex en = MultiIndex::unit(d);
  auto take = [&](const QuadResult& q) {
    s.err = std::max(s.err, q.err_estimate);
    return q.value;
  };
  s.N = take(moment(MultiIndex{}));
  s.Dn = take(moment(en));
  s.DnDn = take(moment(MultiIndex::unit(d, 2)));
  for (int i = 0; i < d; ++i) {
    s.Di[i] = take(moment(MultiIndex::unit(i)));
    s.DnDi[i] = take(moment(MultiIndex::unit(i) + en));
  }
  return s;
}

QuadConfig table_config() {
  QuadConfig c;
  c.rel_tol = 1e-11;
  c.abs_tol = 1e-16;
  c.max_subdivisions = 400;
  return c;
}

std::vector<double> sigma_scales() { return {0.01, 0.03, 0.1, 0.3, 1, 3, 10, 30}; }

}  // namespace

using InnerTable = std::unordered_map<double, std::array<double, 6>>;

// Per-x' data: tangential factor tables, the B-layer functions M_i(theta) and
// their theta-derivatives, and per-height columns.
struct Solution::Profile {
  struct Column {
    Moments moments;
    GradedChebyshev w;  // W(theta), Laplacian W(theta)
    bool has_w = false;
  };

  tangential::TangentialProfile tp;
  double theta_max = 0;
  GradedChebyshev m;  // M_i for i < d, then dM_i/dtheta
  std::map<double, Column> columns;

  Profile(const Vecd& xp, const data::BumpSpec& bump, double upper) : tp(xp, bump), theta_max(upper) {
    const int d = tp.dim();
    const QuadConfig tc = table_config();
    auto f = [&](double theta, Eigen::Ref<Eigen::VectorXd> out) {
      const double tau0 = std::max(0.0, tp.sigma_floor() - theta);
      std::vector<double> bps;
      for (double s : sigma_scales()) bps.push_back(s - theta);
      const EndpointHint h{0.0, -0.5};
      auto g = [&](double tau, Val& v) {
        Factors b{};
        tp.factors(theta + tau, b);
        const Products p(b, d);
        const double g0 = gauss1d(0, 0.0, tau);
        for (int i = 0; i < d; ++i) {
          double lap = 0;
          for (int k = 0; k < d; ++k) lap += p.eaa[i][k];
          v[i] = -g0 * p.e[i];
          v[d + i] = -g0 * lap;
        }
      };
      const auto r = quad::detail::adaptive(g, 2 * d, tau0, quad::kInf, tc, bps,
                                            tau0 == 0 ? std::span(&h, 1) : std::span<const EndpointHint>{});
      out = r.value;
    };
    m = GradedChebyshev(f, 2 * d, upper / std::ldexp(1.0, kChebPieces - 1), upper, kChebNodes);
  }

  Column& column(double xn, const data::BumpSpec& bump, const QuadConfig& cfg) {
    auto it = columns.find(xn);
    if (it != columns.end()) return it->second;
    if (columns.size() >= kCacheLimit) columns.erase(columns.begin());
    Column c;
    c.moments = spatial_moments(tp.x_prime(), xn, bump, cfg);
    return columns.emplace(xn, std::move(c)).first->second;
  }

  const GradedChebyshev& w_table(Column& c, double xn) {
    if (c.has_w) return c.w;
    const int d = tp.dim();
    const QuadConfig tc = table_config();
    auto f = [&](double theta, Eigen::Ref<Eigen::VectorXd> out) {
      const double tau0 = std::max(0.0, tp.sigma_floor() - theta);
      std::vector<double> bps;
      for (double s : sigma_scales()) bps.push_back(s - theta);
      for (double k : {1.0 / 16, 0.25, 1.0, 4.0, 16.0}) bps.push_back(k * xn * xn);
      auto g = [&](double tau, Val& v) {
        Factors b{};
        tp.factors(theta + tau, b);
        const Products p(b, d);
        const double gx = gauss1d(1, xn, tau);
        double lap = 0;
        for (int k = 0; k < d; ++k) lap += p.aa[k];
        v[0] = -gx * p.p0;
        v[1] = -gx * lap;
      };
      out = quad::detail::adaptive(g, 2, tau0, quad::kInf, tc, bps, {}).value;
    };
    c.w = GradedChebyshev(f, 2, theta_max / std::ldexp(1.0, kChebPieces - 1), theta_max, kChebNodes);
    c.has_w = true;
    return c.w;
  }
};

// Inner theta integrals of the L layer keyed by (x_n, t) and then by sigma.
// They do not depend on x', so points sharing (x_n, t) reuse them.
struct Solution::InnerMemo {
  static constexpr std::size_t kKeys = 256;
  static constexpr std::size_t kEntries = 1 << 15;
  std::map<std::pair<double, double>, InnerTable> tables;
  std::vector<std::pair<double, double>> order;

  InnerTable* table(double xn, double t) {
    const std::pair key{xn, t};
    auto it = tables.find(key);
    if (it != tables.end()) {
      if (it->second.size() > kEntries) it->second.clear();
      return &it->second;
    }
    if (tables.size() >= kKeys) {
      tables.erase(order.front());
      order.erase(order.begin());
    }
    order.push_back(key);
    return &tables[key];
  }
};

Solution::Solution(const data::PhiSpec& phi, const data::BumpSpec& bump, const quad::QuadConfig& cfg)
    : phi_(phi), bump_(bump), cfg_(cfg), memo_(std::make_unique<InnerMemo>()) {
  if (!(phi.alpha_scale >= 0)) throw std::invalid_argument("Solution: alpha must be non-negative");
  data::PhiSpec check = phi;
  check.alpha_scale = 1;
  check.validate();
  bump.validate();
  cfg.validate();
}

Solution::~Solution() = default;
Solution::Solution(Solution&&) noexcept = default;
Solution& Solution::operator=(Solution&&) noexcept = default;

Solution::Profile& Solution::profile(const Vecd& x_prime, double theta_max) {
  if (x_prime.size() != bump_.n - 1) throw std::invalid_argument("Solution: point dimension does not match n");
  std::vector<double> key(x_prime.data(), x_prime.data() + x_prime.size());
  auto it = cache_.find(key);
  if (it != cache_.end() && it->second->theta_max >= theta_max) return *it->second;
  const double upper = std::max({1.0, theta_max, it != cache_.end() ? 2 * it->second->theta_max : 0.0});
  auto fresh = std::make_unique<Profile>(x_prime, bump_, upper);
  if (it != cache_.end()) {
    it->second = std::move(fresh);
    return *it->second;
  }
  if (cache_.size() >= kCacheLimit) {
    cache_.erase(cache_order_.front());
    cache_order_.erase(cache_order_.begin());
  }
  cache_order_.push_back(key);
  return *cache_.emplace(key, std::move(fresh)).first->second;
}

namespace {

struct Request {
  bool normal = false;
  bool identity = false;
};

// Everything computed for one (x, t); index k < n refers to component k+1.
struct Raw {
  int n = 0;
  std::array<QuadResult, 3> wL, wB, wN, dL, dB, dN;
  std::array<double, 2> id_lhs{}, id_rhs{}, id_err{};
};

// Layer integrals over sigma = theta + tau. For each sigma the inner theta
// integral R_k(sigma) = int phi E_k(x_n; theta, sigma - theta) dtheta is shared
// by every output component.
VecQuadResult layer_integrals(const tangential::TangentialProfile& tp, double xn, const Window& w,
                              const data::PhiSpec& phi, const QuadConfig& cfg, const Request& req,
                              InnerTable* memo) {
  const int d = tp.dim();
  const int K = 3 * d + 1;
  QuadConfig inner = cfg;
  inner.rel_tol = std::max(1e-13, 0.01 * cfg.rel_tol);
  inner.abs_tol = 1e-300;
  inner.max_subdivisions = 100;
  const double dt = std::abs(w.t - 1);
  const double s0 = dt > 0 ? std::min(xn * xn, dt) : xn * xn;

  auto R = [&](double sigma, double out[3], double err[3]) {
    const double up = std::min(w.hi, sigma);
    for (int k = 0; k < 3; ++k) out[k] = err[k] = 0;
    if (!(up > w.lo)) return;
    if (memo) {
      if (auto it = memo->find(sigma); it != memo->end()) {
        for (int k = 0; k < 3; ++k) {
          out[k] = it->second[k];
          err[k] = it->second[3 + k];
        }
        return;
      }
    }
    std::vector<double> b;
    add_geometric(b, w.lo, s0 / 8, up, 8);
    if (w.t < 1) add_geometric(b, 0.0, dt, up, 8);
    for (double k : {0.25, 1.0, 4.0, 16.0}) b.push_back(sigma - k * xn * xn);
    b.push_back(w.shift + phi.cutoff_inner);
    b = tidy(std::move(b), w.lo, up);
    std::vector<EndpointHint> hints = lo_hint(w, phi, -0.5);
    if (up == sigma) hints.push_back({sigma, -0.5});
    auto f = [&](double theta, Val& v) {
      const double ph = phi_at(0, theta, w, phi);
      if (ph == 0) return;
      double e[3];
      normal::E_all(xn, theta, sigma - theta, e);
      for (int k = 0; k < 3; ++k) v[k] = ph * e[k];
    };
    const auto r = quad::detail::adaptive(f, 3, w.lo, up, inner, b, hints);
    for (int k = 0; k < 3; ++k) {
      out[k] = r.value[k];
      err[k] = r.err_estimate[k];
    }
    if (memo) memo->emplace(sigma, std::array<double, 6>{out[0], out[1], out[2], err[0], err[1], err[2]});
  };

  auto g = [&](double sigma, Val& v) {
    Factors b{};
    tp.factors(sigma, b);
    const Products p(b, d);
    if (p.zero()) return;
    double r[3], e[3];
    R(sigma, r, e);
    for (int i = 0; i < d; ++i) {
      v[i] = p.e[i] * r[1];
      v[K + i] = std::abs(p.e[i]) * e[1];
      v[d + 1 + i] = p.e[i] * r[2];
      v[K + d + 1 + i] = std::abs(p.e[i]) * e[2];
      double s = 0, se = 0;
      for (int k = 0; k < d; ++k) {
        s += p.eaa[i][k];
        se += std::abs(p.eaa[i][k]);
      }
      v[2 * d + 1 + i] = s * r[0];
      v[K + 2 * d + 1 + i] = se * e[0];
    }
    v[d] = p.p0 * r[2];
    v[K + d] = std::abs(p.p0) * e[2];
  };

  const double a0 = std::max(tp.sigma_floor(), w.lo);
  std::vector<double> bps = sigma_scales();
  bps.push_back(w.hi);
  for (double k : {0.25, 1.0, 4.0, 16.0}) bps.push_back(k * xn * xn);
  add_geometric(bps, w.lo, s0 / 4, w.hi, 4);
  bps = tidy(std::move(bps), a0, quad::kInf);
  std::vector<EndpointHint> hints;
  if (a0 == w.lo) hints.push_back({a0, 0.0});
  std::vector<int> controlled;
  for (int i = 0; i <= d; ++i) controlled.push_back(i);
  if (req.normal)
    for (int i = 0; i < d; ++i) controlled.push_back(d + 1 + i);
  if (req.identity)
    for (int i = 0; i < d; ++i) controlled.push_back(2 * d + 1 + i);
  return quad::detail::adaptive(g, 2 * K, a0, quad::kInf, cfg, bps, hints, controlled);
}

QuadResult scalar_part(const VecQuadResult& r, int k, int K, double scale) {
  QuadResult q;
  q.value = scale * r.value[k];
  q.err_estimate = std::abs(scale) * (r.err_estimate[k] + r.value[K + k] + r.err_estimate[K + k]);
  q.evaluations = r.evaluations;
  q.converged = r.converged;
  return q;
}

QuadResult time_integral(const std::function<void(double, Val&)>& f, int dim, int comp, double a, double b,
                         const QuadConfig& cfg, const std::vector<double>& bps, const std::vector<EndpointHint>& hints,
                         VecQuadResult* all = nullptr) {
  if (!(b > a)) return {};
  const auto r = quad::detail::adaptive(f, dim, a, b, cfg, bps, hints);
  if (all) *all = r;
  return r.component(comp);
}

Raw compute(Solution::Profile& pr, const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
            const QuadConfig& cfg, const Request& req, InnerTable* memo) {
  const int n = q.p.n(), d = n - 1;
  const double xn = q.p.x_n, t = q.t, alpha = phi.alpha_scale;
  Raw out;
  out.n = n;
  const Window w = make_window(t, phi);
  auto& col = pr.column(xn, bump, cfg);

  // Instantaneous Newtonian part.
  if (t < 1 && 1 - t < phi.cutoff_outer) {
    const double c = 2 * alpha * data::phi(0, 1 - t, phi);
    const auto& m = col.moments;
    for (int i = 0; i < d; ++i) {
      out.wN[i] = {c * m.Di[i], std::abs(c) * m.err, 0, true};
      out.dN[i] = {c * m.DnDi[i], std::abs(c) * m.err, 0, true};
    }
    out.wN[d] = {c * m.Dn, std::abs(c) * m.err, 0, true};
  }
  if (w.empty() || alpha == 0) return out;

  const auto& tp = pr.tp;
  const int K = 3 * d + 1;
  const auto L = layer_integrals(tp, xn, w, phi, cfg, req, memo);
  for (int i = 0; i < d; ++i) {
    out.wL[i] = scalar_part(L, i, K, -4 * alpha);
    out.dL[i] = scalar_part(L, d + 1 + i, K, -4 * alpha);
  }
  out.wL[d] = scalar_part(L, d, K, -4 * alpha);

  const auto breaks = time_breaks(w, phi, xn);
  const auto hints = lo_hint(w, phi, 0.0);

  // Heat double layer -2 D_n Gamma * g_n (component n) and D_i F for the identity.
  {
    const double a0 = std::max(w.lo, tp.sigma_floor());
    auto f = [&](double theta, Val& v) {
      const double ph = phi_at(0, theta, w, phi);
      if (ph == 0) return;
      Factors b{};
      tp.factors(theta, b);
      const Products p(b, d);
      const double gx = gauss1d(1, xn, theta);
      v[0] = ph * p.p0 * gx;
      for (int i = 0; i < d; ++i) v[1 + i] = ph * p.e[i] * gx;
    };
    VecQuadResult all;
    const auto dl = time_integral(f, 1 + d, 0, a0, w.hi, cfg, tidy(breaks, a0, w.hi), hints, &all);
    out.wL[d] += dl * (-2 * alpha);
    if (req.identity) {
      const bool has = all.value.size() > 0;
      for (int i = 0; i < d; ++i) {
        const double dF = has ? alpha * all.value[1 + i] : 0.0;
        const double dF_err = has ? alpha * all.err_estimate[1 + i] : 0.0;
        const double wid = -4 * alpha * L.value[2 * d + 1 + i];
        out.id_lhs[i] = out.dL[i].value;
        out.id_rhs[i] = -wid + 2 * dF;
        out.id_err[i] = out.dL[i].err_estimate + 4 * alpha * (L.err_estimate[2 * d + 1 + i] + L.value[K + 2 * d + 1 + i]) +
                        2 * dF_err;
      }
    }
  }

  // B-layer: w^B_i = 4 alpha int phi G_x(x_n, theta) M_i(theta) dtheta.
  const auto& M = pr.m;
  const double mtail = M.tail_ratio();
  {
    auto f = [&](double theta, Val& v) {
      const double ph = phi_at(0, theta, w, phi);
      if (ph == 0) return;
      double mv[4];
      M.eval(theta, mv);
      const double gx = gauss1d(1, xn, theta);
      for (int i = 0; i < d; ++i) v[i] = ph * gx * mv[i];
    };
    VecQuadResult all;
    time_integral(f, d, 0, w.lo, w.hi, cfg, breaks, hints, &all);
    for (int i = 0; i < d; ++i) {
      out.wB[i] = all.component(i) * (4 * alpha);
      out.wB[i].err_estimate += mtail * std::abs(out.wB[i].value);
    }
  }
  if (req.normal) {
    // t < 1: integrate by parts in theta; t > 1: direct near the blow-up, by parts past 2t - 2.
    auto direct = [&](double theta, Val& v) {
      const double ph = phi_at(0, theta, w, phi);
      if (ph == 0) return;
      double mv[4];
      M.eval(theta, mv);
      const double gxx = gauss1d(2, xn, theta);
      for (int i = 0; i < d; ++i) v[i] = ph * gxx * mv[i];
    };
    auto parts = [&](double theta, Val& v) {
      const double ph = phi_at(0, theta, w, phi), dph = phi_at(1, theta, w, phi);
      if (ph == 0 && dph == 0) return;
      double mv[4];
      M.eval(theta, mv);
      const double g0 = gauss1d(0, xn, theta);
      for (int i = 0; i < d; ++i) v[i] = -g0 * (dph * mv[i] + ph * mv[d + i]);
    };
    std::array<QuadResult, 2> acc{};
    auto add = [&](const VecQuadResult& r) {
      if (r.value.size() == 0) return;
      for (int i = 0; i < d; ++i) acc[i] += r.component(i);
    };
    VecQuadResult r1, r2;
    if (t < 1) {
      time_integral(parts, d, 0, w.lo, w.hi, cfg, breaks, {}, &r1);
      add(r1);
    } else {
      const double star = 2 * w.shift;
      const double mid = (t > 1 && star < w.hi) ? star : w.hi;
      time_integral(direct, d, 0, w.lo, mid, cfg, tidy(breaks, w.lo, mid), hints, &r1);
      add(r1);
      if (mid < w.hi) {
        time_integral(parts, d, 0, mid, w.hi, cfg, tidy(breaks, mid, w.hi), {}, &r2);
        add(r2);
        double mv[4];
        M.eval(mid, mv);
        const double edge = phi_at(0, mid, w, phi) * gauss1d(0, xn, mid);
        for (int i = 0; i < d; ++i) acc[i].value -= edge * mv[i];
      }
    }
    for (int i = 0; i < d; ++i) {
      out.dB[i] = acc[i] * (4 * alpha);
      out.dB[i].err_estimate += mtail * std::abs(out.dB[i].value);
    }
  }
  return out;
}

FieldSample sample(Component c, int index, const QuadResult& r) { return {c, index, r.value, r.err_estimate}; }

VelocitySample assemble(Component total_kind, int index, const QuadResult& L, const QuadResult& B,
                        const QuadResult& N) {
  VelocitySample v;
  v.wL = sample(Component::wL, index, L);
  v.wB = sample(Component::wB, index, B);
  v.wN = sample(Component::wN, index, N);
  v.total = {total_kind, index, L.value + B.value + N.value, L.err_estimate + B.err_estimate + N.err_estimate};
  return v;
}

}  // namespace

FieldBundle Solution::evaluate(const SpaceTimePoint& q, bool with_normal_derivatives) {
  q.validate();
  const int n = q.p.n();
  auto& pr = profile(q.p.x_prime, q.t - 1 + phi_.cutoff_outer);
  Request req;
  req.normal = with_normal_derivatives;
  const Raw r = compute(pr, q, phi_, bump_, cfg_, req, memo_->table(q.p.x_n, q.t));
  FieldBundle b;
  for (int i = 0; i < n; ++i) b.w.push_back(assemble(Component::w, i + 1, r.wL[i], r.wB[i], r.wN[i]));
  if (with_normal_derivatives)
    for (int i = 0; i < n - 1; ++i) b.dxn_w.push_back(assemble(Component::dxn_w, i + 1, r.dL[i], r.dB[i], r.dN[i]));
  return b;
}

VelocitySample Solution::velocity(int i, const SpaceTimePoint& q) {
  if (i < 1 || i > q.p.n()) throw std::invalid_argument("velocity: index out of range 1..n");
  auto b = evaluate(q, false);
  return b.w[static_cast<std::size_t>(i - 1)];
}

VelocitySample Solution::normal_derivative(int i, const SpaceTimePoint& q) {
  if (i < 1 || i >= q.p.n()) throw std::invalid_argument("normal_derivative: index must be tangential");
  auto b = evaluate(q, true);
  return b.dxn_w[static_cast<std::size_t>(i - 1)];
}

NormalDerivativeIdentity Solution::normal_derivative_identity(int i, const SpaceTimePoint& q) {
  q.validate();
  if (i < 1 || i >= q.p.n()) throw std::invalid_argument("normal_derivative_identity: index must be tangential");
  auto& pr = profile(q.p.x_prime, q.t - 1 + phi_.cutoff_outer);
  Request req;
  req.normal = true;
  req.identity = true;
  const Raw r = compute(pr, q, phi_, bump_, cfg_, req, memo_->table(q.p.x_n, q.t));
  return {r.id_lhs[i - 1], r.id_rhs[i - 1], r.id_err[i - 1]};
}

PressureSample Solution::pressure(const SpaceTimePoint& q) {
  q.validate();
  const int d = q.p.n() - 1;
  const double xn = q.p.x_n, t = q.t, alpha = phi_.alpha_scale;
  auto& pr = profile(q.p.x_prime, t - 1 + phi_.cutoff_outer);
  auto& col = pr.column(xn, bump_, cfg_);
  QuadResult p1, p21, p22, p3;
  if (t < 1 && 1 - t < phi_.cutoff_outer) {
    const auto& m = col.moments;
    const double f0 = data::phi(0, 1 - t, phi_), f1 = data::phi(1, 1 - t, phi_);
    p1 = {-2 * alpha * f0 * m.DnDn, 2 * alpha * std::abs(f0) * m.err, 0, true};
    p3 = {2 * alpha * f1 * m.N, 2 * alpha * std::abs(f1) * m.err, 0, true};
  }
  const Window w = make_window(t, phi_);
  if (!w.empty() && alpha != 0) {
    const auto& W = pr.w_table(col, xn);
    const double wtail = W.tail_ratio();
    const auto breaks = time_breaks(w, phi_, xn);
    const auto hints = lo_hint(w, phi_, -0.5);
    auto f = [&](double theta, Val& v) {
      const double ph = phi_at(0, theta, w, phi_);
      double wv[2];
      W.eval(theta, wv);
      const double g0 = gauss1d(0, 0.0, theta);
      v[1] = -4 * alpha * ph * g0 * wv[1];
      if (t < 1)
        v[0] = -4 * alpha * phi_at(1, theta, w, phi_) * g0 * wv[0];
      else
        v[0] = 4 * alpha * ph * g0 * (wv[1] - wv[0] / (2 * theta));
    };
    VecQuadResult all;
    time_integral(f, 2, 0, w.lo, w.hi, cfg_, breaks, hints, &all);
    p21 = all.component(0);
    p22 = all.component(1);
    p21.err_estimate += wtail * std::abs(p21.value);
    p22.err_estimate += wtail * std::abs(p22.value);
  }
  (void)d;
  PressureSample s;
  s.p1 = sample(Component::p1, 0, p1);
  s.p21 = sample(Component::p21, 0, p21);
  s.p22 = sample(Component::p22, 0, p22);
  s.p3 = sample(Component::p3, 0, p3);
  s.total = {Component::p, 0, p1.value + p21.value + p22.value + p3.value,
             p1.err_estimate + p21.err_estimate + p22.err_estimate + p3.err_estimate};
  return s;
}

VelocitySample velocity(int i, const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                        const quad::QuadConfig& cfg) {
  Solution s(phi, bump, cfg);
  return s.velocity(i, q);
}

FieldSample normal_derivative(int i, const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                              const quad::QuadConfig& cfg) {
  Solution s(phi, bump, cfg);
  return s.normal_derivative(i, q).total;
}

PressureSample pressure(const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                        const quad::QuadConfig& cfg) {
  Solution s(phi, bump, cfg);
  return s.pressure(q);
}

}  // namespace hsstokes::fields
