#include "hsstokes/tangential.hpp"

#include "hsstokes/detail/adaptive.hpp"
#include "hsstokes/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace hsstokes::tangential {

namespace {

constexpr double kSigmaMax = 1e3;
constexpr double kPieceWidth = 1.0;
constexpr int kPieceNodes = 24;

}  // namespace

void bump_gauss_direct(double x, double sigma, const data::BumpSpec& bump, double out[4]) {
  const double c = bump.center(), r = bump.half_width();
  const double reach = 12 * std::sqrt(2 * sigma);
  const double lo = std::max(-c - r, x - reach);
  const double hi = std::min(-c + r, x + reach);
  for (int m = 0; m < 4; ++m) out[m] = 0;
  if (!(hi > lo)) return;
  auto f = [&](double y, quad::detail::Val& v) {
    const double beta = data::bump_factor(0, y, bump);
    const double u = x - y;
    const double g = kernels::gauss1d(0, u, sigma);
    const double s = u / (2 * sigma);
    v[0] = beta * g;
    v[1] = -s * beta * g;
    v[2] = (s * s - 1 / (2 * sigma)) * beta * g;
    v[3] = (-s * s * s + 3 * u / (4 * sigma * sigma)) * beta * g;
  };
  quad::QuadConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-300;
  cfg.max_subdivisions = 400;
  // The peak of beta(y) G(x-y) sits near the support edge closest to x.
  std::vector<double> bps;
  const double edge = (x > -c) ? -c + r : -c - r;
  const double w = std::sqrt(2 * sigma);
  for (double k : {-4.0, -1.0, 1.0, 4.0}) bps.push_back(edge + k * w * (x > -c ? -1 : 1));
  bps.push_back(x);
  auto res = quad::detail::adaptive(f, 4, lo, hi, cfg, bps, {});
  for (int m = 0; m < 4; ++m) out[m] = res.value[m];
}

BumpGaussTable::BumpGaussTable(double x, const data::BumpSpec& bump) : x_(x), bump_(bump) {
  const double c = bump.center(), r = bump.half_width();
  const double dist = std::max({0.0, (-c - r) - x, x - (-c + r)});
  sigma_floor_ = dist * dist / 200;
  v_lo_ = std::log(std::max(sigma_floor_, 1e-9));
  v_hi_ = std::log(kSigmaMax);
  const int npieces = std::max(1, static_cast<int>(std::ceil((v_hi_ - v_lo_) / kPieceWidth)));
  dv_ = (v_hi_ - v_lo_) / npieces;
  pieces_.reserve(npieces);
  for (int p = 0; p < npieces; ++p) {
    const double a = v_lo_ + p * dv_;
    pieces_.emplace_back(
        [&](double v, Eigen::Ref<Eigen::VectorXd> out) {
          double b[4];
          bump_gauss_direct(x_, std::exp(v), bump_, b);
          for (int m = 0; m < 4; ++m) out[m] = b[m];
        },
        4, a, a + dv_, kPieceNodes);
  }
}

void BumpGaussTable::eval(double sigma, double out[4]) const {
  if (sigma <= sigma_floor_) {
    for (int m = 0; m < 4; ++m) out[m] = 0;
    return;
  }
  const double v = std::log(sigma);
  if (v < v_lo_ || v > v_hi_ || pieces_.empty()) {
    bump_gauss_direct(x_, sigma, bump_, out);
    return;
  }
  const int p = std::min(static_cast<int>((v - v_lo_) / dv_), static_cast<int>(pieces_.size()) - 1);
  pieces_[static_cast<std::size_t>(p)].eval(v, out);
}

TangentialProfile::TangentialProfile(const Vecd& x_prime, const data::BumpSpec& bump) : x_prime_(x_prime) {
  bump.validate();
  if (x_prime.size() != bump.n - 1) throw std::invalid_argument("TangentialProfile: x' has wrong dimension");
  for (int k = 0; k < x_prime.size(); ++k) {
    tables_.emplace_back(x_prime[k], bump);
    sigma_floor_ = std::max(sigma_floor_, tables_.back().sigma_floor());
  }
}

void TangentialProfile::factors(double sigma, std::array<std::array<double, 4>, 2>& b) const {
  for (std::size_t k = 0; k < tables_.size(); ++k) tables_[k].eval(sigma, b[k].data());
}

double TangentialProfile::P(const MultiIndex& m, double sigma) const {
  std::array<std::array<double, 4>, 2> b{};
  factors(sigma, b);
  double v = 1;
  for (std::size_t k = 0; k < tables_.size(); ++k) v *= b[k][static_cast<std::size_t>(m[static_cast<int>(k)])];
  return v;
}

}  // namespace hsstokes::tangential
