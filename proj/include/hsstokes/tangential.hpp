#pragma once

#include "hsstokes/boundary_data.hpp"
#include "hsstokes/chebyshev.hpp"

#include <array>
#include <vector>

namespace hsstokes::tangential {

// b_m(x; sigma) = int beta(y) d_x^m G(x - y, sigma) dy for m = 0..3, where beta is
// the one-dimensional bump factor. Adaptive quadrature, relative accuracy ~1e-12.
void bump_gauss_direct(double x, double sigma, const data::BumpSpec& bump, double out[4]);

// b_m(x; sigma) for a fixed x as a function of sigma, tabulated with piecewise
// Chebyshev interpolation in ln(sigma).
class BumpGaussTable {
 public:
  BumpGaussTable() = default;
  BumpGaussTable(double x, const data::BumpSpec& bump);

  void eval(double sigma, double out[4]) const;
  // Below this sigma every b_m underflows relative to its maximum (0 when x
  // lies inside the bump support).
  double sigma_floor() const { return sigma_floor_; }

 private:
  double x_ = 0;
  data::BumpSpec bump_;
  double sigma_floor_ = 0;
  double v_lo_ = 0, v_hi_ = 0, dv_ = 1;
  std::vector<ChebyshevBundle> pieces_;
};

// Products P_m(x'; sigma) = prod_k b_{m_k}(x_k; sigma), i.e. the tangential heat
// kernel (and its derivatives) convolved with the spatial boundary data.
class TangentialProfile {
 public:
  TangentialProfile(const Vecd& x_prime, const data::BumpSpec& bump);

  int dim() const { return static_cast<int>(tables_.size()); }
  const Vecd& x_prime() const { return x_prime_; }
  double sigma_floor() const { return sigma_floor_; }

  // Factors b[k][m] = b_m(x_k; sigma).
  void factors(double sigma, std::array<std::array<double, 4>, 2>& b) const;
  double P(const MultiIndex& m, double sigma) const;

 private:
  Vecd x_prime_;
  std::vector<BumpGaussTable> tables_;
  double sigma_floor_ = 0;
};

}  // namespace hsstokes::tangential
