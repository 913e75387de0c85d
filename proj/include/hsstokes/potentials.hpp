#pragma once

#include "hsstokes/kernels.hpp"
#include "hsstokes/quadrature.hpp"

namespace hsstokes {

struct HalfSpacePoint {
  Vecd x_prime;  // length n-1
  double x_n = 0;

  int n() const { return static_cast<int>(x_prime.size()) + 1; }
  Vecd full() const {
    Vecd x(x_prime.size() + 1);
    x.head(x_prime.size()) = x_prime;
    x[x_prime.size()] = x_n;
    return x;
  }
  void validate() const;
};

// Indices are 1-based, i, j in 1..n, with n the normal direction.
struct TensorIndex {
  int i = 1;
  int j = 1;
  // (i, n) with i != n has no pointwise decay bound.
  bool has_decay_bound(int n) const { return !(i != n && j == n); }
};

namespace potentials {

// L_ij(x,t) through the heat-semigroup representation of the Newtonian
// derivatives: a single integral over an auxiliary time tau of tangential
// Gaussian derivatives against closed-form normal factors.
quad::QuadResult l_tensor(const TensorIndex& idx, const HalfSpacePoint& p, double t, const quad::QuadConfig& cfg);

// L_ij(x,t) as the original (n)-dimensional integral over R^{n-1} x (0, x_n),
// with the x_j derivative taken inside (Leibniz term included) and polar
// coordinates around the Newtonian singularity. Slow; used as an oracle.
quad::QuadResult l_tensor_direct(const TensorIndex& idx, const HalfSpacePoint& p, double t,
                                 const quad::QuadConfig& cfg);

// H_i(X', theta) = int Gamma'(X' - z', theta) D_i N(z', 0) dz' for i < n by
// polar substitution (principal value folded into a regular integral).
quad::QuadResult h_tangential(int i, const Vecd& X, double theta, const quad::QuadConfig& cfg);

// Same quantity through the semigroup route: -int_0^inf D_i Gamma'(X', theta+tau) G(0,tau) dtau.
quad::QuadResult h_tangential_semigroup(int i, const Vecd& X, double theta, const quad::QuadConfig& cfg);

// H_n(X', x_n, theta) = int Gamma'(X' - z', theta) D_n N(z', x_n) dz' (semigroup route).
quad::QuadResult h_normal(const Vecd& X, double x_n, double theta, const quad::QuadConfig& cfg);

// Same, by polar quadrature around the peak of D_n N(., x_n).
quad::QuadResult h_normal_direct(const Vecd& X, double x_n, double theta, const quad::QuadConfig& cfg);

// B_in(x,t) = G_x(x_n,t) H_i(x',t), i < n.
quad::QuadResult b_tensor(int i, const HalfSpacePoint& p, double t, const quad::QuadConfig& cfg);

struct APotential {
  quad::QuadResult value;     // A_i
  quad::QuadResult dxn;       // D_{x_n} A_i (= B_in)
  quad::QuadResult dxn2;      // D_{x_n}^2 A_i
  quad::QuadResult caloric;   // (D_t - Delta) A_i
};

// A_i(x,t) = int Gamma(x' - z', x_n, t) D_i N(z', 0) dz' with its normal
// derivatives and the heat operator applied (time derivative and Laplacian are
// taken analytically under the integral along separate code paths).
APotential a_potential(int i, const HalfSpacePoint& p, double t, const quad::QuadConfig& cfg);

struct GammaDecomposition {
  quad::QuadResult total;   // H_n(X', x_n, t)
  double newtonian_part = 0;  // D_n N(X', x_n)
  quad::QuadResult i_part;  // integral over |z'| <= |X'|/10
  double j1_residual = 0;   // total - newtonian_part - i_part
};

// Splits int Gamma'(X' - z', t) D_n N(z', x_n) dz' into the Newtonian value, the
// contribution of the small disc |z'| <= |X'|/10, and the remainder J1.
// Requires |X'| >= 1, 0 < x_n < 1/2, t > 0.
GammaDecomposition gamma_convolution_decomposition(const Vecd& X, double x_n, double t, const quad::QuadConfig& cfg);

}  // namespace potentials
}  // namespace hsstokes
