#pragma once

#include "hsstokes/boundary_data.hpp"
#include "hsstokes/potentials.hpp"
#include "hsstokes/quadrature.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hsstokes::fields {

struct SpaceTimePoint {
  HalfSpacePoint p;
  double t = 0;
  void validate() const;
};

enum class Component { wL, wB, wN, w, dxn_w, p1, p21, p22, p3, p };
std::string to_string(Component c);

struct FieldSample {
  Component component = Component::w;
  int index = 1;  // 1-based; pressure samples use 0
  double value = 0;
  double err_estimate = 0;
};

// total = wL + wB + wN. For i = n the heat double layer -2 D_n Gamma * g_n is
// carried in wL.
struct VelocitySample {
  FieldSample total, wL, wB, wN;
};

struct PressureSample {
  FieldSample total, p1, p21, p22, p3;
};

// Velocity components 1..n and normal derivatives of components 1..n-1.
struct FieldBundle {
  std::vector<VelocitySample> w;
  std::vector<VelocitySample> dxn_w;
};

// Terms of the identity D_n w^L_i = -sum_k D_k W_ik + 2 D_i F, with
// W_ik = 4 L_ik * g_n and F = D_n Gamma * g_n.
struct NormalDerivativeIdentity {
  double lhs = 0;
  double rhs = 0;
  double err_estimate = 0;
};

// Velocity and pressure of the Stokes system in the half space with boundary
// data g = alpha (0, ..., g^S(y') phi(1-s)). Caches per-x' tangential tables,
// so one instance should serve many points; not safe for concurrent use.
class Solution {
 public:
  Solution(const data::PhiSpec& phi, const data::BumpSpec& bump, const quad::QuadConfig& cfg);
  ~Solution();
  Solution(Solution&&) noexcept;
  Solution& operator=(Solution&&) noexcept;

  int n() const { return bump_.n; }
  const data::PhiSpec& phi() const { return phi_; }
  const data::BumpSpec& bump() const { return bump_; }
  const quad::QuadConfig& quad_config() const { return cfg_; }

  FieldBundle evaluate(const SpaceTimePoint& q, bool with_normal_derivatives = true);
  VelocitySample velocity(int i, const SpaceTimePoint& q);
  VelocitySample normal_derivative(int i, const SpaceTimePoint& q);
  PressureSample pressure(const SpaceTimePoint& q);
  NormalDerivativeIdentity normal_derivative_identity(int i, const SpaceTimePoint& q);

  struct Profile;
  struct InnerMemo;

 private:
  Profile& profile(const Vecd& x_prime, double theta_max);

  data::PhiSpec phi_;
  data::BumpSpec bump_;
  quad::QuadConfig cfg_;
  std::map<std::vector<double>, std::unique_ptr<Profile>> cache_;
  std::vector<std::vector<double>> cache_order_;
  std::unique_ptr<InnerMemo> memo_;
};

VelocitySample velocity(int i, const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                        const quad::QuadConfig& cfg);
FieldSample normal_derivative(int i, const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                              const quad::QuadConfig& cfg);
PressureSample pressure(const SpaceTimePoint& q, const data::PhiSpec& phi, const data::BumpSpec& bump,
                        const quad::QuadConfig& cfg);

}  // namespace hsstokes::fields
