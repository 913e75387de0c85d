#include "hsstokes/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsstokes {

ChebyshevBundle::ChebyshevBundle(const std::function<void(double, Eigen::Ref<Eigen::VectorXd>)>& f, int components,
                                 double a, double b, int nodes)
    : a_(a), b_(b) {
  if (!(b > a) || nodes < 2 || components < 1) throw std::invalid_argument("ChebyshevBundle: bad construction");
  const double pi = std::numbers::pi;
  Eigen::MatrixXd values(nodes, components);
  Eigen::VectorXd buf(components);
  for (int k = 0; k < nodes; ++k) {
    const double z = std::cos(pi * (k + 0.5) / nodes);
    buf.setZero();
    f(0.5 * (a + b) + 0.5 * (b - a) * z, buf);
    values.row(k) = buf.transpose();
  }
  coeffs_.setZero(nodes, components);
  for (int j = 0; j < nodes; ++j) {
    for (int k = 0; k < nodes; ++k) coeffs_.row(j) += std::cos(pi * j * (k + 0.5) / nodes) * values.row(k);
    coeffs_.row(j) *= (j == 0 ? 1.0 : 2.0) / nodes;
  }
}

double ChebyshevBundle::operator()(int c, double x) const {
  const double z = std::clamp((2 * x - a_ - b_) / (b_ - a_), -1.0, 1.0);
  double b1 = 0, b2 = 0;
  for (int j = static_cast<int>(coeffs_.rows()) - 1; j >= 1; --j) {
    const double t = 2 * z * b1 - b2 + coeffs_(j, c);
    b2 = b1;
    b1 = t;
  }
  return z * b1 - b2 + coeffs_(0, c);
}

void ChebyshevBundle::eval(double x, double* out) const {
  const int m = static_cast<int>(coeffs_.cols());
  const double z = std::clamp((2 * x - a_ - b_) / (b_ - a_), -1.0, 1.0);
  double b1[16], b2[16];
  if (m > 16) {
    for (int c = 0; c < m; ++c) out[c] = (*this)(c, x);
    return;
  }
  std::fill(b1, b1 + m, 0.0);
  std::fill(b2, b2 + m, 0.0);
  for (int j = static_cast<int>(coeffs_.rows()) - 1; j >= 1; --j) {
    for (int c = 0; c < m; ++c) {
      const double t = 2 * z * b1[c] - b2[c] + coeffs_(j, c);
      b2[c] = b1[c];
      b1[c] = t;
    }
  }
  for (int c = 0; c < m; ++c) out[c] = z * b1[c] - b2[c] + coeffs_(0, c);
}

double ChebyshevBundle::tail_magnitude(int c) const {
  const auto col = coeffs_.col(c).cwiseAbs();
  const int n = static_cast<int>(col.size());
  return std::max(col[n - 1], col[n - 2]);
}

double ChebyshevBundle::max_coefficient(int c) const { return coeffs_.col(c).cwiseAbs().maxCoeff(); }

double ChebyshevBundle::tail_ratio(int c) const {
  const double mx = max_coefficient(c);
  return mx == 0 ? 0 : tail_magnitude(c) / mx;
}

GradedChebyshev::GradedChebyshev(const std::function<void(double, Eigen::Ref<Eigen::VectorXd>)>& f, int components,
                                 double first, double upper, int nodes_per_piece)
    : first_(first), upper_(upper) {
  if (!(first > 0) || !(upper > first)) throw std::invalid_argument("GradedChebyshev: need 0 < first < upper");
  pieces_.emplace_back(f, components, 0.0, first, nodes_per_piece);
  for (double a = first; a < upper; a *= 2) pieces_.emplace_back(f, components, a, std::min(2 * a, upper), nodes_per_piece);
}

void GradedChebyshev::eval(double x, double* out) const {
  std::size_t k = 0;
  if (x > first_) k = std::min(pieces_.size() - 1, static_cast<std::size_t>(1 + std::floor(std::log2(x / first_))));
  pieces_[k].eval(x, out);
}

double GradedChebyshev::tail_ratio() const {
  double r = 0;
  if (pieces_.empty()) return r;
  for (int c = 0; c < pieces_.front().components(); ++c) {
    double tail = 0, mx = 0;
    for (const auto& p : pieces_) {
      tail = std::max(tail, p.tail_magnitude(c));
      mx = std::max(mx, p.max_coefficient(c));
    }
    if (mx > 0) r = std::max(r, tail / mx);
  }
  return r;
}

}  // namespace hsstokes
