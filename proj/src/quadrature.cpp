#include "hsstokes/quadrature.hpp"

#include "hsstokes/detail/adaptive.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hsstokes::quad {

void QuadConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol >= 0)) throw std::invalid_argument("QuadConfig: tolerances must be positive");
  if (max_subdivisions < 1) throw std::invalid_argument("QuadConfig: max_subdivisions must be >= 1");
  if (!(tail_sigma > 0)) throw std::invalid_argument("QuadConfig: tail_sigma must be positive");
  for (const auto& h : singular_endpoint_map)
    if (!(h.exponent > -1)) throw std::invalid_argument("QuadConfig: singular exponent must exceed -1");
}

QuadConfig QuadConfig::scaled(double factor) const {
  QuadConfig c = *this;
  c.rel_tol *= factor;
  c.abs_tol *= factor;
  return c;
}

QuadResult integrate_1d(const Integrand& f, double a, double b, const QuadConfig& cfg,
                        std::span<const double> breakpoints) {
  cfg.validate();
  return detail::adaptive_scalar(f, a, b, cfg, breakpoints, cfg.singular_endpoint_map);
}

VecQuadResult integrate_1d_vec(const VecIntegrand& f, int dim, double a, double b, const QuadConfig& cfg,
                               std::span<const double> breakpoints, std::span<const int> controlled) {
  cfg.validate();
  Eigen::VectorXd buf(dim);
  auto g = [&](double s, detail::Val& out) {
    buf.setZero();
    f(s, buf);
    out = buf.array();
  };
  return detail::adaptive(g, dim, a, b, cfg, breakpoints, cfg.singular_endpoint_map, controlled);
}

QuadResult integrate_nd(const std::function<double(const Eigen::VectorXd&)>& f, const Box& domain,
                        const Eigen::VectorXd& weight_center, double weight_scale, const QuadConfig& cfg,
                        std::span<const AxisHints> axes) {
  cfg.validate();
  const int dim = static_cast<int>(domain.lower.size());
  if (dim < 1 || domain.upper.size() != dim) throw std::invalid_argument("integrate_nd: inconsistent box");
  if (weight_center.size() != dim) throw std::invalid_argument("integrate_nd: weight_center has wrong size");
  if (!axes.empty() && static_cast<int>(axes.size()) != dim)
    throw std::invalid_argument("integrate_nd: one AxisHints entry per dimension expected");
  if (!(weight_scale > 0)) throw std::invalid_argument("integrate_nd: weight_scale must be positive");

  Eigen::VectorXd lo(dim), hi(dim);
  const double reach = cfg.tail_sigma * weight_scale;
  for (int k = 0; k < dim; ++k) {
    lo[k] = std::isinf(domain.lower[k]) ? weight_center[k] - reach : domain.lower[k];
    hi[k] = std::isinf(domain.upper[k]) ? weight_center[k] + reach : domain.upper[k];
    if (!(lo[k] <= hi[k])) throw std::invalid_argument("integrate_nd: empty box");
  }

  Eigen::VectorXd x(dim);
  long evaluations = 0;
  bool all_converged = true;
  // level(k) integrates over coordinates k..dim-1 with x[0..k-1] fixed.
  std::function<QuadResult(int)> level = [&](int k) -> QuadResult {
    const QuadConfig local = cfg.scaled(std::pow(0.1, k));
    static const AxisHints kNone{};
    const AxisHints& ax = axes.empty() ? kNone : axes[static_cast<std::size_t>(k)];
    auto g = [&](double s, detail::Val& out) {
      x[k] = s;
      if (k == dim - 1) {
        out[0] = f(x);
        out[1] = 0;
      } else {
        const QuadResult inner = level(k + 1);
        out[0] = inner.value;
        out[1] = inner.err_estimate;
      }
    };
    static const int kControlled[] = {0};
    auto r = detail::adaptive(g, 2, lo[k], hi[k], local, ax.breakpoints, ax.singular, kControlled);
    evaluations += (k == dim - 1) ? r.evaluations : 0;
    all_converged = all_converged && r.converged;
    return {r.value[0], r.err_estimate[0] + std::abs(r.value[1]), r.evaluations, r.converged};
  };
  QuadResult res = level(0);
  res.evaluations = evaluations;
  res.converged = all_converged;
  return res;
}

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 512) throw std::invalid_argument("gauss_legendre: n must be in [1,512]");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = 0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1, p1 = 0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1);
    const double w = 2 / ((1 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

std::vector<double> geometric_points(double a, double b, double smallest, double ratio) {
  if (!(smallest > 0) || !(ratio > 1)) throw std::invalid_argument("geometric_points: bad spacing");
  std::vector<double> pts;
  for (double h = smallest; a + h < b; h *= ratio) pts.push_back(a + h);
  return pts;
}

}  // namespace hsstokes::quad
