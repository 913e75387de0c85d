#pragma once

// Header-only adaptive Gauss-Kronrod engine. Lives in a header so hot inner
// integrands (lambdas) inline into the node loop.

#include "hsstokes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hsstokes::quad::detail {

constexpr int kMaxDim = 16;
using Val = Eigen::Array<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

inline constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208745185760, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

// Maps u in [0,1] onto a physical interval, clustering nodes toward singular ends.
struct Piece {
  enum Kind { Linear, Left, Right, Tail };
  double lo = 0, hi = 0;
  Kind kind = Linear;
  double q = 1;

  // Returns false when the node collapses onto a singular endpoint.
  bool map(double u, double& s, double& jac) const {
    const double L = hi - lo;
    switch (kind) {
      case Linear:
        s = lo + L * u;
        jac = L;
        return true;
      case Left: {
        const double uq1 = std::pow(u, q - 1);
        s = lo + L * uq1 * u;
        jac = q * L * uq1;
        return s > lo && jac > 0;
      }
      case Right: {
        const double v = 1 - u;
        const double vq1 = std::pow(v, q - 1);
        s = hi - L * vq1 * v;
        jac = q * L * vq1;
        return s < hi && jac > 0;
      }
      case Tail: {
        // lo is the start, hi holds the length scale
        const double v = 1 - u;
        s = lo + hi * (1 / (v * v) - 1);
        jac = 2 * hi / (v * v * v);
        return std::isfinite(s) && std::isfinite(jac);
      }
    }
    return false;
  }
};

inline double power_map_exponent(double beta) {
  if (!(beta > -1)) throw std::invalid_argument("singular hint exponent must exceed -1");
  return std::clamp(1.0 / (1.0 + std::min(beta, 0.0)), 2.0, 20.0);
}

struct Interval {
  int piece;
  double u0, u1;
  Val value, err;
  double priority;
  bool operator<(const Interval& o) const { return priority < o.priority; }
};

// Returns the number of nodes that collapsed onto a singular endpoint.
template <class F>
int gk21(F& f, int dim, const Piece& pc, double u0, double u1, Val& result, Val& err, long& nev) {
  const double hl = 0.5 * (u1 - u0);
  const double c = 0.5 * (u0 + u1);
  Val fv[21];
  Val tmp(dim);
  int collapsed = 0;
  auto eval = [&](double u, Val& out) {
    double s, jac;
    if (!pc.map(u, s, jac)) {
      out.setZero(dim);
      ++collapsed;
      return;
    }
    tmp.setZero(dim);
    f(s, tmp);
    ++nev;
    if (!tmp.allFinite()) {
      std::ostringstream os;
      os << "non-finite integrand value at s=" << s;
      throw std::runtime_error(os.str());
    }
    out = tmp * jac;
  };
  eval(c, fv[20]);
  Val resk = kWgk[10] * fv[20];
  Val resg = Val::Zero(dim);
  Val resabs = resk.abs();
  for (int j = 0; j < 10; ++j) {
    const double dx = hl * kXgk[j];
    eval(c - dx, fv[2 * j]);
    eval(c + dx, fv[2 * j + 1]);
    const Val sum = fv[2 * j] + fv[2 * j + 1];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (fv[2 * j].abs() + fv[2 * j + 1].abs());
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const Val reskh = resk * 0.5;
  Val resasc = kWgk[10] * (fv[20] - reskh).abs();
  for (int j = 0; j < 10; ++j) resasc += kWgk[j] * ((fv[2 * j] - reskh).abs() + (fv[2 * j + 1] - reskh).abs());
  const double ahl = std::abs(hl);
  result = resk * hl;
  resabs *= ahl;
  resasc *= ahl;
  err = ((resk - resg) * hl).abs();
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < dim; ++i) {
    if (resasc[i] != 0 && err[i] != 0) err[i] = resasc[i] * std::min(1.0, std::pow(200 * err[i] / resasc[i], 1.5));
    if (resabs[i] > std::numeric_limits<double>::min() / (50 * eps)) err[i] = std::max(50 * eps * resabs[i], err[i]);
  }
  return collapsed;
}

// Core engine: hints and breakpoints are given explicitly.
template <class F>
VecQuadResult adaptive(F&& f, int dim, double a, double b, const QuadConfig& cfg, std::span<const double> breakpoints,
                       std::span<const EndpointHint> hints, std::span<const int> controlled = {}) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("adaptive: unsupported integrand dimension");
  VecQuadResult out;
  out.value = Eigen::VectorXd::Zero(dim);
  out.err_estimate = Eigen::VectorXd::Zero(dim);
  if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("adaptive: NaN integration limit");
  if (a == b) return out;
  if (a > b) {
    auto r = adaptive(f, dim, b, a, cfg, breakpoints, hints, controlled);
    r.value = -r.value;
    return r;
  }
  if (std::isinf(a)) throw std::invalid_argument("adaptive: lower limit must be finite");

  // Cut points and their singular exponents.
  struct Cut {
    double at;
    bool singular;
    double beta;
  };
  std::vector<Cut> cuts{{a, false, 0}};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back({p, false, 0});
  for (const auto& h : hints)
    if (h.at >= a && h.at <= b) cuts.push_back({h.at, true, h.exponent});
  if (std::isfinite(b)) cuts.push_back({b, false, 0});
  std::sort(cuts.begin(), cuts.end(), [](const Cut& x, const Cut& y) { return x.at < y.at; });
  // Merge duplicates keeping the most singular exponent.
  std::vector<Cut> merged;
  for (const auto& c : cuts) {
    if (!merged.empty() && merged.back().at == c.at) {
      auto& m = merged.back();
      if (c.singular && (!m.singular || c.beta < m.beta)) {
        m.singular = true;
        m.beta = c.beta;
      }
    } else {
      merged.push_back(c);
    }
  }

  std::vector<Piece> pieces;
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const auto& L = merged[k];
    const auto& R = merged[k + 1];
    if (L.singular && R.singular) {
      const double mid = 0.5 * (L.at + R.at);
      pieces.push_back({L.at, mid, Piece::Left, power_map_exponent(L.beta)});
      pieces.push_back({mid, R.at, Piece::Right, power_map_exponent(R.beta)});
    } else if (L.singular) {
      pieces.push_back({L.at, R.at, Piece::Left, power_map_exponent(L.beta)});
    } else if (R.singular) {
      pieces.push_back({L.at, R.at, Piece::Right, power_map_exponent(R.beta)});
    } else {
      pieces.push_back({L.at, R.at, Piece::Linear, 1});
    }
  }
  if (!std::isfinite(b)) {
    const auto& last = merged.back();
    const double scale = std::max(1.0, std::abs(last.at));
    double start = last.at;
    if (last.singular) {
      pieces.push_back({start, start + scale, Piece::Left, power_map_exponent(last.beta)});
      start += scale;
    }
    pieces.push_back({start, scale, Piece::Tail, 1});
  }

  auto is_controlled = [&](int i) {
    if (controlled.empty()) return true;
    return std::find(controlled.begin(), controlled.end(), i) != controlled.end();
  };

  std::priority_queue<Interval> heap;
  Val total = Val::Zero(dim), total_err = Val::Zero(dim);
  long nev = 0;
  auto priority = [&](const Val& err) {
    double p = 0;
    for (int i = 0; i < dim; ++i) {
      if (!is_controlled(i)) continue;
      const double scale = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total[i]));
      p = std::max(p, err[i] / scale);
    }
    return p;
  };
  std::vector<Interval> initial;
  for (int k = 0; k < static_cast<int>(pieces.size()); ++k) {
    Interval iv{k, 0.0, 1.0, Val(dim), Val(dim), 0};
    gk21(f, dim, pieces[k], 0.0, 1.0, iv.value, iv.err, nev);
    total += iv.value;
    total_err += iv.err;
    initial.push_back(iv);
  }
  for (auto& iv : initial) {
    iv.priority = priority(iv.err);
    heap.push(iv);
  }

  auto converged = [&]() {
    for (int i = 0; i < dim; ++i) {
      if (!is_controlled(i)) continue;
      if (total_err[i] > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total[i]))) return false;
    }
    return true;
  };

  int subdivisions = static_cast<int>(pieces.size());
  bool ok = converged();
  while (!ok && subdivisions < cfg.max_subdivisions && !heap.empty()) {
    Interval worst = heap.top();
    if (worst.priority <= 0) break;
    heap.pop();
    const double um = 0.5 * (worst.u0 + worst.u1);
    if (!(um > worst.u0 && um < worst.u1) || (worst.u1 - worst.u0) < 1e-15) {
      worst.priority = 0;
      heap.push(worst);
      continue;
    }
    Interval l{worst.piece, worst.u0, um, Val(dim), Val(dim), 0};
    Interval r{worst.piece, um, worst.u1, Val(dim), Val(dim), 0};
    // Children with nodes below the floating-point resolution of the endpoint
    // would drop the mass there; keep the parent estimate instead.
    const int lost = gk21(f, dim, pieces[worst.piece], l.u0, l.u1, l.value, l.err, nev) +
                     gk21(f, dim, pieces[worst.piece], r.u0, r.u1, r.value, r.err, nev);
    if (lost > 0) {
      worst.priority = 0;
      heap.push(worst);
      continue;
    }
    total += l.value + r.value - worst.value;
    total_err += l.err + r.err - worst.err;
    l.priority = priority(l.err);
    r.priority = priority(r.err);
    heap.push(l);
    heap.push(r);
    ++subdivisions;
    ok = converged();
  }
  // Re-sum to shed accumulated cancellation from the incremental updates.
  total.setZero();
  total_err.setZero();
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().err;
    heap.pop();
  }
  out.value = total.matrix();
  out.err_estimate = total_err.matrix();
  out.evaluations = nev;
  out.converged = converged();
  return out;
}

template <class F>
QuadResult adaptive_scalar(F&& f, double a, double b, const QuadConfig& cfg, std::span<const double> breakpoints,
                           std::span<const EndpointHint> hints) {
  auto g = [&f](double s, Val& out) { out[0] = f(s); };
  auto r = adaptive(g, 1, a, b, cfg, breakpoints, hints);
  return r.component(0);
}

}  // namespace hsstokes::quad::detail
