#pragma once

namespace hsstokes::normal {

// E_k(x; theta, tau) = int_0^x d_z G(z, theta) * d_x^k G(x - z, tau) dz for k in {0,1,2},
// with G the one-dimensional heat kernel. Closed form through truncated Gaussian
// moments; narrow intervals fall back to a short Gauss-Legendre rule.
double E(int k, double x, double theta, double tau);

// All three at once: out[k] = E_k.
void E_all(double x, double theta, double tau, double out[3]);

}  // namespace hsstokes::normal
