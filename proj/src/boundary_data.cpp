#include "hsstokes/boundary_data.hpp"

#include <cmath>
#include <stdexcept>

namespace hsstokes::data {

std::string to_string(PhiFamily f) {
  switch (f) {
    case PhiFamily::LogGrowth: return "LogGrowth";
    case PhiFamily::LogDecay: return "LogDecay";
    case PhiFamily::Power: return "Power";
  }
  return "?";
}

PhiFamily phi_family_from_string(const std::string& s) {
  if (s == "LogGrowth") return PhiFamily::LogGrowth;
  if (s == "LogDecay") return PhiFamily::LogDecay;
  if (s == "Power") return PhiFamily::Power;
  throw std::invalid_argument("unknown phi family '" + s + "'");
}

void PhiSpec::validate() const {
  if (family == PhiFamily::Power && !(a > 0 && a < 1)) throw std::invalid_argument("PhiSpec: Power needs 0 < a < 1");
  if (!(cutoff_inner > 0 && cutoff_inner < cutoff_outer && cutoff_outer <= 1))
    throw std::invalid_argument("PhiSpec: need 0 < cutoff.inner < cutoff.outer <= 1");
  if (!(alpha_scale > 0)) throw std::invalid_argument("PhiSpec: alpha_scale must be positive");
}

namespace {

// h(x) = exp(-1/x) for x > 0 and its first two derivatives.
void smooth_step_base(double x, double& h, double& h1, double& h2) {
  if (x <= 0) {
    h = h1 = h2 = 0;
    return;
  }
  h = std::exp(-1 / x);
  const double x2 = x * x;
  h1 = h / x2;
  h2 = h * (1 / (x2 * x2) - 2 / (x2 * x));
}

void cutoff_all(double s, const PhiSpec& spec, double& e0, double& e1, double& e2) {
  if (s <= spec.cutoff_inner) {
    e0 = 1;
    e1 = e2 = 0;
    return;
  }
  if (s >= spec.cutoff_outer) {
    e0 = e1 = e2 = 0;
    return;
  }
  // Rescale the transition zone to unit length so exp(-1/x) is well resolved.
  const double w = spec.cutoff_outer - spec.cutoff_inner;
  double A, A1, A2, B, B1, B2;
  smooth_step_base((spec.cutoff_outer - s) / w, A, A1, A2);
  smooth_step_base((s - spec.cutoff_inner) / w, B, B1, B2);
  A1 = -A1 / w;
  A2 = A2 / (w * w);
  B1 = B1 / w;
  B2 = B2 / (w * w);
  const double D = A + B, D1 = A1 + B1;
  const double N = A1 * B - A * B1;
  const double N1 = A2 * B - A * B2;
  e0 = A / D;
  e1 = N / (D * D);
  e2 = N1 / (D * D) - 2 * N * D1 / (D * D * D);
}

void profile_all(double s, const PhiSpec& spec, double& f0, double& f1, double& f2) {
  switch (spec.family) {
    case PhiFamily::LogGrowth:
      f0 = -std::log(s);
      f1 = -1 / s;
      f2 = 1 / (s * s);
      return;
    case PhiFamily::LogDecay: {
      const double L = std::log(s);
      f0 = -1 / L;
      f1 = 1 / (s * L * L);
      f2 = -(L + 2) / (s * s * L * L * L);
      return;
    }
    case PhiFamily::Power:
      f0 = std::pow(s, -spec.a);
      f1 = -spec.a * f0 / s;
      f2 = spec.a * (spec.a + 1) * f0 / (s * s);
      return;
  }
}

}  // namespace

double cutoff(int k, double s, const PhiSpec& spec) {
  double e0, e1, e2;
  cutoff_all(s, spec, e0, e1, e2);
  switch (k) {
    case 0: return e0;
    case 1: return e1;
    case 2: return e2;
    default: throw std::invalid_argument("cutoff: derivative order must be 0, 1 or 2");
  }
}

double phi(int k, double s, const PhiSpec& spec) {
  if (k < 0 || k > 2) throw std::invalid_argument("phi: derivative order must be 0, 1 or 2");
  if (!(s > 0)) throw std::domain_error("phi: argument must be positive");
  double e0, e1, e2;
  cutoff_all(s, spec, e0, e1, e2);
  if (e0 == 0 && e1 == 0 && e2 == 0) return 0;
  double f0 = 0, f1 = 0, f2 = 0;
  profile_all(s, spec, f0, f1, f2);
  switch (k) {
    case 0: return f0 * e0;
    case 1: return f1 * e0 + f0 * e1;
    default: return f2 * e0 + 2 * f1 * e1 + f0 * e2;
  }
}

double g_temporal(int k, double s, const PhiSpec& spec) {
  if (k != 0 && k != 1) throw std::invalid_argument("g_temporal: order must be 0 or 1");
  if (!(s > 0 && s < 1)) return 0;
  if (k == 0) return spec.alpha_scale * phi(0, 1 - s, spec);
  return -spec.alpha_scale * phi(1, 1 - s, spec);
}

bool SupportSetA::contains(const Vecd& y) const {
  if (y.size() != n - 1) throw std::invalid_argument("SupportSetA: point has wrong dimension");
  const double r = y.norm();
  if (!(r > 1 && r < 2)) return false;
  for (int i = 0; i < y.size(); ++i)
    if (!(y[i] > -2 && y[i] < -1)) return false;
  return true;
}

void BumpSpec::validate() const {
  if (n != 2 && n != 3) throw std::invalid_argument("BumpSpec: n must be 2 or 3");
  if (!(margin > 0 && margin < 0.5)) throw std::invalid_argument("BumpSpec: margin must lie in (0, 1/2)");
}

// Cube [-c-r, -c+r]^d on the diagonal with c - r = 1 (the box faces) and
// sqrt(d)(c + r) = 2 (the outer sphere).
double BumpSpec::center() const {
  const double d = n - 1;
  return 0.5 * (1 + 2 / std::sqrt(d));
}

double BumpSpec::half_width() const {
  const double d = n - 1;
  return 0.5 * (2 / std::sqrt(d) - 1) * (1 - margin);
}

double bump_factor(int k, double y, const BumpSpec& bump) {
  if (k < 0 || k > 4) throw std::invalid_argument("bump_factor: order must be in [0,4]");
  const double r = bump.half_width();
  const double u = (y + bump.center()) / r;
  if (!(std::abs(u) < 1)) return 0;
  const double w = 1 - u * u;
  const double iw = 1 / w;
  const double psi = std::exp(1 - iw);
  if (k == 0) return psi;
  const double u2 = u * u;
  const double q1 = -2 * u * iw * iw;
  const double q2 = -2 * iw * iw - 8 * u2 * iw * iw * iw;
  const double q3 = -24 * u * iw * iw * iw - 48 * u2 * u * iw * iw * iw * iw;
  const double q4 = -24 * iw * iw * iw - 288 * u2 * iw * iw * iw * iw - 384 * u2 * u2 * iw * iw * iw * iw * iw;
  double d = 0;
  switch (k) {
    case 1: d = q1; break;
    case 2: d = q2 + q1 * q1; break;
    case 3: d = q3 + 3 * q1 * q2 + q1 * q1 * q1; break;
    default: d = q4 + 4 * q1 * q3 + 3 * q2 * q2 + 6 * q1 * q1 * q2 + q1 * q1 * q1 * q1; break;
  }
  return psi * d / std::pow(r, k);
}

double g_spatial(const MultiIndex& m, const Vecd& y, const BumpSpec& bump) {
  if (y.size() != bump.n - 1) throw std::invalid_argument("g_spatial: point has wrong dimension");
  if (m.total() > 4) throw std::invalid_argument("g_spatial: derivative order too high");
  double v = 1;
  for (int i = 0; i < y.size(); ++i) {
    v *= bump_factor(m[i], y[i], bump);
    if (v == 0) return 0;
  }
  return v;
}

double g_spatial_laplacian(const Vecd& y, const BumpSpec& bump) {
  double s = 0;
  for (int i = 0; i < y.size(); ++i) s += g_spatial(MultiIndex::unit(i, 2), y, bump);
  return s;
}

}  // namespace hsstokes::data
