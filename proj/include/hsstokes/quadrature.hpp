#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace hsstokes::quad {

// Integrand behaves like |s - at|^exponent near `at`. exponent must be > -1;
// 0 marks a logarithmic or otherwise non-smooth point.
struct EndpointHint {
  double at = 0.0;
  double exponent = 0.0;
};

struct QuadConfig {
  double rel_tol = 1e-7;
  double abs_tol = 1e-10;
  int max_subdivisions = 2000;
  double tail_sigma = 10.0;
  std::vector<EndpointHint> singular_endpoint_map;

  void validate() const;
  // Same settings with both tolerances scaled by `factor`.
  QuadConfig scaled(double factor) const;
};

struct QuadResult {
  double value = 0.0;
  double err_estimate = 0.0;
  long evaluations = 0;
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    err_estimate += o.err_estimate;
    evaluations += o.evaluations;
    converged = converged && o.converged;
    return *this;
  }
  QuadResult operator*(double c) const {
    QuadResult r = *this;
    r.value *= c;
    r.err_estimate *= std::abs(c);
    return r;
  }
};

struct VecQuadResult {
  Eigen::VectorXd value;
  Eigen::VectorXd err_estimate;
  long evaluations = 0;
  bool converged = true;
  QuadResult component(int i) const { return {value[i], err_estimate[i], evaluations, converged}; }
};

using Integrand = std::function<double(double)>;
// Writes the integrand vector at s into the output (size fixed by the caller).
using VecIntegrand = std::function<void(double, Eigen::Ref<Eigen::VectorXd>)>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Adaptive Gauss-Kronrod (21 point) integration over [a,b]; b may be +inf.
// Hints from cfg.singular_endpoint_map that fall in [a,b] become breakpoints and
// are removed by a power substitution. Extra breakpoints split the initial mesh.
// Throws std::runtime_error when the integrand returns a non-finite value.
QuadResult integrate_1d(const Integrand& f, double a, double b, const QuadConfig& cfg,
                        std::span<const double> breakpoints = {});

// Vector-valued version; convergence requires every component to meet the tolerance
// (components listed in `controlled`, all of them when empty).
VecQuadResult integrate_1d_vec(const VecIntegrand& f, int dim, double a, double b, const QuadConfig& cfg,
                               std::span<const double> breakpoints = {}, std::span<const int> controlled = {});

// Axis-aligned box; infinite bounds are truncated at center +- tail_sigma * scale.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Per-dimension singular hints and breakpoints for integrate_nd.
struct AxisHints {
  std::vector<EndpointHint> singular;
  std::vector<double> breakpoints;
};

// Iterated adaptive integration over a box. Infinite directions are truncated at
// weight_center +- cfg.tail_sigma * weight_scale. Error estimates of inner
// integrals are propagated to the outer ones.
QuadResult integrate_nd(const std::function<double(const Eigen::VectorXd&)>& f, const Box& domain,
                        const Eigen::VectorXd& weight_center, double weight_scale, const QuadConfig& cfg,
                        std::span<const AxisHints> axes = {});

// Gauss-Legendre nodes and weights on [-1,1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Points a + (b-a) r^k, k = 0.., inserted between a and b, accumulating toward a.
std::vector<double> geometric_points(double a, double b, double smallest, double ratio = 2.0);

}  // namespace hsstokes::quad
