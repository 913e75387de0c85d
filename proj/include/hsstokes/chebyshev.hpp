#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace hsstokes {

// Chebyshev interpolant of a vector-valued function on [a,b], built on
// first-kind Chebyshev nodes and evaluated with Clenshaw's recurrence.
class ChebyshevBundle {
 public:
  ChebyshevBundle() = default;
  // f(x, out) fills `out` (size components) at x.
  ChebyshevBundle(const std::function<void(double, Eigen::Ref<Eigen::VectorXd>)>& f, int components, double a,
                  double b, int nodes);

  double lower() const { return a_; }
  double upper() const { return b_; }
  int components() const { return static_cast<int>(coeffs_.cols()); }
  int degree() const { return static_cast<int>(coeffs_.rows()) - 1; }

  // Value of component c at x (x is clamped to [a,b]).
  double operator()(int c, double x) const;
  // All components at x.
  void eval(double x, double* out) const;
  // Magnitude of the last two coefficients relative to the largest, per component.
  double tail_ratio(int c) const;
  double tail_magnitude(int c) const;
  double max_coefficient(int c) const;

 private:
  double a_ = 0, b_ = 1;
  Eigen::MatrixXd coeffs_;
};

// Piecewise Chebyshev interpolation on [0, upper] over dyadic pieces
// [0, h], [h, 2h], [2h, 4h], ... so functions with structure near 0 stay resolved.
class GradedChebyshev {
 public:
  GradedChebyshev() = default;
  GradedChebyshev(const std::function<void(double, Eigen::Ref<Eigen::VectorXd>)>& f, int components, double first,
                  double upper, int nodes_per_piece);

  double upper() const { return upper_; }
  bool empty() const { return pieces_.empty(); }
  void eval(double x, double* out) const;
  // Largest tail coefficient over all pieces relative to the largest coefficient,
  // maximized over components.
  double tail_ratio() const;

 private:
  double first_ = 0, upper_ = 0;
  std::vector<ChebyshevBundle> pieces_;
};

}  // namespace hsstokes
