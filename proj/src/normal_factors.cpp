#include "hsstokes/normal_factors.hpp"

#include "hsstokes/kernels.hpp"
#include "hsstokes/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsstokes::normal {

namespace {

using kernels::gauss1d;

void E_direct(double x, double theta, double tau, double out[3]) {
  const auto& rule = quad::gauss_legendre(20);
  out[0] = out[1] = out[2] = 0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double z = 0.5 * x * (1 + rule.nodes[j]);
    const double w = 0.5 * x * rule.weights[j];
    const double gz = gauss1d(1, z, theta) * w;
    out[0] += gz * gauss1d(0, x - z, tau);
    out[1] += gz * gauss1d(1, x - z, tau);
    out[2] += gz * gauss1d(2, x - z, tau);
  }
}

}  // namespace

void E_all(double x, double theta, double tau, double out[3]) {
  if (!(theta > 0) || !(tau > 0)) throw std::domain_error("E: theta and tau must be positive");
  if (!(x > 0)) {
    out[0] = out[1] = out[2] = 0;
    return;
  }
  const double S = theta + tau;
  const double sigma = theta * tau / S;
  if (x * x <= sigma) {
    E_direct(x, theta, tau, out);
    return;
  }
  const double mu = x * theta / S;
  const double b = x * tau / S;
  const double a = -mu;
  const double v = 2 * sigma;
  const double sq = 2 * std::sqrt(sigma);
  const double norm = 1 / std::sqrt(4 * std::numbers::pi * sigma);
  const double Gb = norm * std::exp(-b * b / (4 * sigma));
  const double Ga = norm * std::exp(-a * a / (4 * sigma));
  const double m0 = 0.5 * (std::erf(b / sq) + std::erf(mu / sq));
  const double m1 = -v * (Gb - Ga);
  const double m2 = v * m0 - v * (b * Gb - a * Ga);
  const double m3 = 2 * v * m1 - v * (b * b * Gb - a * a * Ga);
  const double pref = gauss1d(0, x, S);
  out[0] = -pref / (2 * theta) * (mu * m0 + m1);
  out[1] = pref / (4 * theta * tau) * (mu * b * m0 + (b - mu) * m1 - m2);
  const double c = b * b - 2 * tau;
  out[2] = -pref / (8 * theta * tau * tau) * (mu * c * m0 + (c - 2 * b * mu) * m1 + (mu - 2 * b) * m2 + m3);
}

double E(int k, double x, double theta, double tau) {
  if (k < 0 || k > 2) throw std::invalid_argument("E: order must be 0, 1 or 2");
  double out[3];
  E_all(x, theta, tau, out);
  return out[k];
}

}  // namespace hsstokes::normal
