#pragma once

#include "hsstokes/kernels.hpp"

#include <string>

namespace hsstokes::data {

enum class PhiFamily { LogGrowth, LogDecay, Power };

std::string to_string(PhiFamily f);
PhiFamily phi_family_from_string(const std::string& s);

// Temporal profile phi = profile * eta, where profile is |ln s|, 1/|ln s| or
// s^{-a}, and eta is a smooth cutoff equal to 1 on (0, cutoff_inner] and 0 on
// [cutoff_outer, inf).
struct PhiSpec {
  PhiFamily family = PhiFamily::Power;
  double a = 0.3;  // exponent of the Power family, unused otherwise
  double cutoff_inner = 0.5;
  double cutoff_outer = 0.75;
  double alpha_scale = 1.0;  // amplitude alpha of the boundary data

  void validate() const;
  // Growth exponent a of the profile (0 for the logarithmic families).
  double growth_exponent() const { return family == PhiFamily::Power ? a : 0.0; }
};

// Smooth cutoff eta(s) and its derivative.
double cutoff(int k, double s, const PhiSpec& spec);

// phi^{(k)}(s), k in {0,1,2}. Throws std::domain_error for s <= 0.
double phi(int k, double s, const PhiSpec& spec);

// Temporal factor of the boundary data: alpha * phi(1-s) for k = 0 and its
// s-derivative -alpha * phi'(1-s) for k = 1. Zero outside (0,1).
double g_temporal(int k, double s, const PhiSpec& spec);

// Open set A in R^{n-1} on which the spatial data is supported.
struct SupportSetA {
  int n = 3;
  bool contains(const Vecd& y) const;
};

// Smooth bump inside A: a product of one-dimensional mollifiers over the
// largest coordinate cube that fits in A, shrunk by `margin`.
struct BumpSpec {
  int n = 3;
  double margin = 0.1;

  void validate() const;
  int tangential_dim() const { return n - 1; }
  // Every coordinate of the support cube is centred at -center().
  double center() const;
  double half_width() const;  // after the margin is applied
};

// One-dimensional factor beta^{(k)}(y), k <= 4.
double bump_factor(int k, double y, const BumpSpec& bump);

// D^m g^S(y) for y in R^{n-1}.
double g_spatial(const MultiIndex& m, const Vecd& y, const BumpSpec& bump);

// Tangential Laplacian of g^S.
double g_spatial_laplacian(const Vecd& y, const BumpSpec& bump);

}  // namespace hsstokes::data
