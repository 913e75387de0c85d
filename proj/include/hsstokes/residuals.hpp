#pragma once

#include "hsstokes/fields.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <string>

namespace hsstokes::fields {

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

// Stokes residuals w_t - Delta w + grad p and div w from fourth-order central
// differences at steps 2h and h. The reported residual uses h; the budget is
// the Richardson difference between the two steps plus the quadrature error
// amplified by the stencil weights.
struct ResidualReport {
  Eigen::VectorXd momentum;
  Eigen::VectorXd momentum_budget;
  double divergence = 0;
  double divergence_budget = 0;
  double largest_momentum_term = 0;
  double largest_divergence_term = 0;
  Verdict verdict = Verdict::Inconclusive;
};

// Requires x_n >= 5h and |t - 1|^{1/2} >= 5h. A budget above
// rel_budget_limit times the largest term makes the result inconclusive.
ResidualReport pde_residuals(Solution& sol, const SpaceTimePoint& q, double h, double rel_budget_limit = 1e-2);
ResidualReport pde_residuals(const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                             const quad::QuadConfig& cfg, double h, double rel_budget_limit = 1e-2);

// Divergence-free test field Phi = curl(chi v) (n = 3) or the rotated gradient
// of chi (n = 2), with chi a product of polynomial bumps
// chi = prod_k (1 - ((x_k - c_k)/r)^2)^4 * x_n^2 (1 - x_n/height)^4 * (1 - ((t - t_c)/t_r)^2)^4.
// Phi is C^3, vanishes on x_n = 0 and outside the box.
class TestField {
 public:
  TestField(int n, const Vecd& center_prime, double half_width, double height, double t_center, double t_half);

  int n() const { return n_; }
  Eigen::VectorXd lower() const;  // box (x', x_n, t)
  Eigen::VectorXd upper() const;

  Vecd value(const Vecd& x, double t) const;
  Vecd time_derivative(const Vecd& x, double t) const;
  Vecd laplacian(const Vecd& x, double t) const;
  double divergence(const Vecd& x, double t) const;
  // D_{x_n} Phi_n on the boundary x_n = 0.
  double boundary_normal_derivative(const Vecd& x_prime, double t) const;

 private:
  // D^order of chi (orders per space coordinate), optionally time-differentiated.
  double chi(const std::array<int, 3>& order, int t_order, const Vecd& x, double t) const;
  // Phi-type combination of the spatial partials grad(a) = D_a(...) of a scalar.
  Vecd curl_of(const std::function<double(int)>& grad) const;

  int n_;
  Vecd c_;
  double r_, height_, tc_, tr_;
  Vecd v_;
};

struct WeakIdentityReport {
  double time_term = 0;       // int int w . Phi_t
  double laplacian_term = 0;  // int int w . Delta Phi
  double boundary_term = 0;   // int int g_n D_{x_n} Phi_n
  double residual = 0;        // sum of the three
  double budget = 0;          // rule-refinement difference plus quadrature error
  double relative = 0;        // |residual| / largest term
  int nodes = 0;
  Verdict verdict = Verdict::Inconclusive;
};

// Tensor Gauss-Legendre over the test field's space-time box with `nodes`
// points per direction, checked against `nodes - 2` points.
WeakIdentityReport weak_identity(Solution& sol, const TestField& phi, int nodes, double rel_limit = 1e-4);

}  // namespace hsstokes::fields
