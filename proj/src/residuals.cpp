#include "hsstokes/residuals.hpp"

#include "hsstokes/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace hsstokes::fields {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Offsets used by both stencils: h and 2h, each with its +-1, +-2 multiples.
constexpr double kOffsets[6] = {-4.0, -2.0, -1.0, 1.0, 2.0, 4.0};

struct Shifted {
  std::map<double, FieldBundle> w;  // keyed by offset in units of h
  std::map<double, PressureSample> p;
};

// Stencils with step m * unit; f takes the offset in units.
double first(const std::function<double(double)>& f, int m, double unit) {
  const double H = m * unit;
  return (-f(2 * m) + 8 * f(m) - 8 * f(-m) + f(-2 * m)) / (12 * H);
}

double second(const std::function<double(double)>& f, double f0, int m, double unit) {
  const double H = m * unit;
  return (-f(2 * m) + 16 * f(m) - 30 * f0 + 16 * f(-m) - f(-2 * m)) / (12 * H * H);
}

struct Balance {
  Eigen::VectorXd momentum, wt, lap, gp;
  double divergence = 0;
  double largest_div = 0;
};

}  // namespace

ResidualReport pde_residuals(Solution& sol, const SpaceTimePoint& q, double h, double rel_budget_limit) {
  q.validate();
  if (!(h > 0)) throw std::invalid_argument("pde_residuals: h must be positive");
  if (q.p.x_n < 5 * h) throw std::invalid_argument("pde_residuals: point closer than 5h to the boundary");
  if (std::sqrt(std::abs(q.t - 1)) < 5 * h || std::sqrt(q.t) < 5 * h)
    throw std::invalid_argument("pde_residuals: point closer than 5h to t = 0 or t = 1 (parabolic metric)");
  const int n = q.p.n();
  // Time steps follow the parabolic scaling so the stencil stays clear of t = 0 and t = 1.
  const double ht = h * std::min({1.0, std::sqrt(std::abs(q.t - 1)), std::sqrt(q.t)});
  // Directions 0..n-1 are space, n is time.
  std::vector<Shifted> dirs(n + 1);
  auto moved = [&](int dir, double off) {
    SpaceTimePoint r = q;
    if (dir < n - 1)
      r.p.x_prime[dir] += off * h;
    else if (dir == n - 1)
      r.p.x_n += off * h;
    else
      r.t += off * ht;
    return r;
  };
  double werr = 0, perr = 0;
  const FieldBundle center = sol.evaluate(q, false);
  for (const auto& v : center.w) werr = std::max(werr, v.total.err_estimate);
  for (int dir = 0; dir <= n; ++dir) {
    for (double off : kOffsets) {
      auto b = sol.evaluate(moved(dir, off), false);
      for (const auto& v : b.w) werr = std::max(werr, v.total.err_estimate);
      dirs[dir].w.emplace(off, std::move(b));
      if (dir < n) {
        auto p = sol.pressure(moved(dir, off));
        perr = std::max(perr, p.total.err_estimate);
        dirs[dir].p.emplace(off, p);
      }
    }
  }

  auto balance = [&](int m) {
    Balance b;
    b.momentum.resize(n);
    b.wt.resize(n);
    b.lap.resize(n);
    b.gp.resize(n);
    for (int i = 0; i < n; ++i) {
      const double w0 = center.w[i].total.value;
      b.wt[i] = first([&](double o) { return dirs[n].w.at(o).w[i].total.value; }, m, ht);
      double lap = 0;
      for (int k = 0; k < n; ++k) lap += second([&](double o) { return dirs[k].w.at(o).w[i].total.value; }, w0, m, h);
      b.lap[i] = lap;
      b.gp[i] = first([&](double o) { return dirs[i].p.at(o).total.value; }, m, h);
      b.momentum[i] = b.wt[i] - b.lap[i] + b.gp[i];
      const double dk = first([&](double o) { return dirs[i].w.at(o).w[i].total.value; }, m, h);
      b.divergence += dk;
      b.largest_div = std::max(b.largest_div, std::abs(dk));
    }
    return b;
  };
  const Balance coarse = balance(2), fine = balance(1);
  const double H = h;
  // |weights| of the fourth-order stencils: 18/(12H) and 64/(12H^2).
  const double d1 = 1.5 / H, d2 = 64.0 / (12 * H * H);
  ResidualReport r;
  r.momentum = fine.momentum;
  r.momentum_budget.resize(n);
  for (int i = 0; i < n; ++i) {
    r.momentum_budget[i] =
        std::abs(coarse.momentum[i] - fine.momentum[i]) + d1 * h / ht * werr + n * d2 * werr + d1 * perr;
    r.largest_momentum_term =
        std::max({r.largest_momentum_term, std::abs(fine.wt[i]), std::abs(fine.lap[i]), std::abs(fine.gp[i])});
  }
  r.divergence = fine.divergence;
  r.divergence_budget = std::abs(coarse.divergence - fine.divergence) + n * d1 * werr;
  r.largest_divergence_term = fine.largest_div;

  bool ok = std::abs(r.divergence) <= r.divergence_budget;
  bool tight = r.divergence_budget <= rel_budget_limit * r.largest_divergence_term;
  for (int i = 0; i < n; ++i) {
    ok = ok && std::abs(r.momentum[i]) <= r.momentum_budget[i];
    tight = tight && r.momentum_budget[i] <= rel_budget_limit * r.largest_momentum_term;
  }
  r.verdict = !ok ? Verdict::Fail : (tight ? Verdict::Pass : Verdict::Inconclusive);
  return r;
}

ResidualReport pde_residuals(const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                             const quad::QuadConfig& cfg, double h, double rel_budget_limit) {
  Solution s(phi, bump, cfg);
  return pde_residuals(s, q, h, rel_budget_limit);
}

namespace {

// Polynomial in a normalized variable s = (u - shift)/scale on [s_lo, s_hi], zero outside.
struct PolyFactor {
  std::vector<double> coef;  // ascending powers of s
  double shift = 0, scale = 1, s_lo = -1, s_hi = 1, amplitude = 1;

  double operator()(int k, double u) const {
    const double s = (u - shift) / scale;
    if (s < s_lo || s > s_hi) return 0;
    std::vector<double> c = coef;
    for (int d = 0; d < k; ++d) {
      for (std::size_t j = 1; j < c.size(); ++j) c[j - 1] = j * c[j];
      if (!c.empty()) c.pop_back();
    }
    double v = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
    return amplitude * v / std::pow(scale, k);
  }
};

// (1 - s^2)^4
PolyFactor bump(double center, double half) { return {{1, 0, -4, 0, 6, 0, -4, 0, 1}, center, half, -1, 1, 1}; }

// u^2 (1 - u/L)^4 on (0, L)
PolyFactor wall(double L) { return {{0, 0, 1, -4, 6, -4, 1}, 0, L, 0, 1, L * L}; }

}  // namespace

TestField::TestField(int n, const Vecd& center_prime, double half_width, double height, double t_center,
                     double t_half)
    : n_(n), c_(center_prime), r_(half_width), height_(height), tc_(t_center), tr_(t_half) {
  if (n != 2 && n != 3) throw std::invalid_argument("TestField: n must be 2 or 3");
  if (center_prime.size() != n - 1) throw std::invalid_argument("TestField: center has wrong dimension");
  if (!(half_width > 0 && height > 0 && t_half > 0 && t_center - t_half >= 0))
    throw std::invalid_argument("TestField: bad box");
  v_ = Vecd(3);
  v_ << 1, 2, 0;
}

Eigen::VectorXd TestField::lower() const {
  Eigen::VectorXd b(n_ + 1);
  for (int k = 0; k < n_ - 1; ++k) b[k] = c_[k] - r_;
  b[n_ - 1] = 0;
  b[n_] = tc_ - tr_;
  return b;
}

Eigen::VectorXd TestField::upper() const {
  Eigen::VectorXd b(n_ + 1);
  for (int k = 0; k < n_ - 1; ++k) b[k] = c_[k] + r_;
  b[n_ - 1] = height_;
  b[n_] = tc_ + tr_;
  return b;
}

double TestField::chi(const std::array<int, 3>& order, int t_order, const Vecd& x, double t) const {
  double v = bump(tc_, tr_)(t_order, t);
  for (int k = 0; k < n_ - 1 && v != 0; ++k) v *= bump(c_[k], r_)(order[k], x[k]);
  if (v != 0) v *= wall(height_)(order[n_ - 1], x[n_ - 1]);
  return v;
}

Vecd TestField::curl_of(const std::function<double(int)>& g) const {
  Vecd out(n_);
  if (n_ == 2) {
    out << g(1), -g(0);
  } else {
    out << g(1) * v_[2] - g(2) * v_[1], g(2) * v_[0] - g(0) * v_[2], g(0) * v_[1] - g(1) * v_[0];
  }
  return out;
}

Vecd TestField::value(const Vecd& x, double t) const {
  return curl_of([&](int a) {
    std::array<int, 3> o{};
    o[a] = 1;
    return chi(o, 0, x, t);
  });
}

Vecd TestField::time_derivative(const Vecd& x, double t) const {
  return curl_of([&](int a) {
    std::array<int, 3> o{};
    o[a] = 1;
    return chi(o, 1, x, t);
  });
}

Vecd TestField::laplacian(const Vecd& x, double t) const {
  return curl_of([&](int a) {
    double s = 0;
    for (int k = 0; k < n_; ++k) {
      std::array<int, 3> o{};
      o[a] += 1;
      o[k] += 2;
      s += chi(o, 0, x, t);
    }
    return s;
  });
}

double TestField::divergence(const Vecd& x, double t) const {
  double s = 0;
  for (int k = 0; k < n_; ++k) {
    const Vecd e = curl_of([&](int a) {
      std::array<int, 3> o{};
      o[a] += 1;
      o[k] += 1;
      return chi(o, 0, x, t);
    });
    s += e[k];
  }
  return s;
}

double TestField::boundary_normal_derivative(const Vecd& x_prime, double t) const {
  Vecd x(n_);
  x.head(n_ - 1) = x_prime;
  x[n_ - 1] = 0;
  const Vecd e = curl_of([&](int a) {
    std::array<int, 3> o{};
    o[a] += 1;
    o[n_ - 1] += 1;
    return chi(o, 0, x, t);
  });
  return e[n_ - 1];
}

namespace {

struct WeakSums {
  double time = 0, lap = 0, boundary = 0, err = 0;
};

WeakSums weak_sums(Solution& sol, const TestField& tf, int m) {
  const int n = tf.n();
  const auto& rule = quad::gauss_legendre(m);
  const Eigen::VectorXd lo = tf.lower(), hi = tf.upper();
  auto node = [&](int dim, int j) { return 0.5 * (lo[dim] + hi[dim]) + 0.5 * (hi[dim] - lo[dim]) * rule.nodes[j]; };
  auto weight = [&](int dim, int j) { return 0.5 * (hi[dim] - lo[dim]) * rule.weights[j]; };
  const int tangential = n - 1;
  int combos = 1;
  for (int k = 0; k < tangential; ++k) combos *= m;
  WeakSums s;
  for (int c = 0; c < combos; ++c) {
    Vecd xp(tangential);
    double wp = 1;
    for (int k = 0, rest = c; k < tangential; ++k, rest /= m) {
      xp[k] = node(k, rest % m);
      wp *= weight(k, rest % m);
    }
    for (int jt = 0; jt < m; ++jt) {
      const double t = node(n, jt), wt = weight(n, jt);
      const double g = data::g_spatial(MultiIndex{}, xp, sol.bump()) * data::g_temporal(0, t, sol.phi());
      s.boundary += wp * wt * g * tf.boundary_normal_derivative(xp, t);
      for (int jn = 0; jn < m; ++jn) {
        const double xn = node(n - 1, jn), wn = weight(n - 1, jn);
        Vecd x(n);
        x.head(tangential) = xp;
        x[n - 1] = xn;
        const Vecd ft = tf.time_derivative(x, t), fl = tf.laplacian(x, t);
        if (ft.isZero(0) && fl.isZero(0)) continue;
        SpaceTimePoint q;
        q.p.x_prime = xp;
        q.p.x_n = xn;
        q.t = t;
        const FieldBundle b = sol.evaluate(q, false);
        const double W = wp * wt * wn;
        for (int i = 0; i < n; ++i) {
          const double wi = b.w[i].total.value;
          s.time += W * wi * ft[i];
          s.lap += W * wi * fl[i];
          s.err += std::abs(W) * (std::abs(ft[i]) + std::abs(fl[i])) * b.w[i].total.err_estimate;
        }
      }
    }
  }
  return s;
}

}  // namespace

WeakIdentityReport weak_identity(Solution& sol, const TestField& tf, int nodes, double rel_limit) {
  if (nodes < 4) throw std::invalid_argument("weak_identity: need at least 4 nodes per direction");
  if (tf.n() != sol.n()) throw std::invalid_argument("weak_identity: dimension mismatch");
  const WeakSums fine = weak_sums(sol, tf, nodes);
  const WeakSums coarse = weak_sums(sol, tf, nodes - 2);
  WeakIdentityReport r;
  r.nodes = nodes;
  r.time_term = fine.time;
  r.laplacian_term = fine.lap;
  r.boundary_term = fine.boundary;
  r.residual = fine.time + fine.lap + fine.boundary;
  const double coarse_res = coarse.time + coarse.lap + coarse.boundary;
  r.budget = std::abs(r.residual - coarse_res) + fine.err;
  const double largest = std::max({std::abs(r.time_term), std::abs(r.laplacian_term), std::abs(r.boundary_term)});
  r.relative = largest > 0 ? std::abs(r.residual) / largest : 0;
  if (r.relative <= rel_limit)
    r.verdict = Verdict::Pass;
  else
    r.verdict = std::abs(r.residual) <= r.budget ? Verdict::Inconclusive : Verdict::Fail;
  return r;
}

}  // namespace hsstokes::fields
