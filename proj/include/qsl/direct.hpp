#pragma once

// Initial value problem for -(1/q) D_{q^{-1}} D_q y + v y = lambda y on the
// q-lattice: lattice marching of the three-term functional equation, the
// successive-approximation series, and the kernel W of the transformation
// phi = phi_0 + int_0^x W(x,t) phi_0(t) d_q t.

#include "qsl/qcore.hpp"

#include <complex>
#include <vector>

namespace qsl {

struct ProblemSpec {
  QLattice lattice;
  LatticeFn v;
  double h = 0.0;
  double H = 0.0;

  ProblemSpec(QLattice lat, LatticeFn potential, double h_, double H_);
  static ProblemSpec free(const QLattice& lat, double h = 0.0, double H = 0.0);
};

struct IVPSolution {
  double lambda;
  LatticeFn phi;         // carries phi(a/q) as its super value
  double c1;             // y(0)
  double c2;             // D_{q^{-1}} y(0)
  double slope_at_a;     // D_{q^{-1}} y(a) = (y(a) - y(a/q)) / (a - a/q)
  double max_residual;   // functional equation, relative to local magnitude
};

// Values above this magnitude abort marching.
inline constexpr double kOverflowGuard = 1e280;

// S_q(x,t) = sin(sx;q)cos(st;q) - cos(sx;q)sin(st;q).
std::complex<double> s_q_kernel(double x, double t, std::complex<double> s, double q);

// Marches the functional equation upward from the two-term q-Taylor seed at
// the deepest point, through a and on to the super-point a/q.
IVPSolution solve_ivp_march(const ProblemSpec& spec, double lambda, double c1, double c2);

// max over 0 <= n < depth of |y(qx) + q y(x/q) - [(1+q) + (v-lambda) x^2 (1-q)^2] y(x)|,
// each term divided by the magnitude of the largest summand at that point.
double functional_residual(const ProblemSpec& spec, const LatticeFn& y, double lambda);

// phi = sum phi_n with phi_{n+1}(x) = (1/s) int_0^x S_q(x,t) v(t) phi_n(t) d_q t.
// Undefined at lambda = 0.
IVPSolution solve_ivp_series(const ProblemSpec& spec, double lambda, double c1, double c2,
                             double tol = 1e-15, int max_terms = 200);

struct VolterraKernel {
  BivariateFn W;                     // W(x_m, x_j), nonzero only for j > m
  int terms_used = 0;
  std::vector<double> term_max;      // max |W_n| over the lattice, n = 1..terms_used
  std::vector<double> term_bound;    // M^n L^n (1-q)^{n-1} q^{n(n-1)/2} a^{n-1} / (|s|^n (q;q)_{n-1})
  double M = 0.0;                    // max |S_q| over lattice pairs
  double L = 0.0;                    // max |v|
};

VolterraKernel volterra_kernel(const ProblemSpec& spec, double lambda, int n_max = 200,
                               double tol = 1e-16);

// phi_0 + int_0^x W(x,t) phi_0(t) d_q t with phi_0 the free solution for (c1, c2).
LatticeFn apply_volterra(const VolterraKernel& kernel, const ProblemSpec& spec, double lambda,
                         double c1, double c2);

// The solution with phi(0) = 1, D_{q^{-1}} phi(0) = h.
IVPSolution phi_with_bc(const ProblemSpec& spec, double lambda);

// phi(., lambda) at an eigenvalue, computed by marching down from the right
// boundary condition and normalising to phi(0) = 1. Upward marching cannot
// resolve phi near a for higher eigenvalues (it is recessive there).
IVPSolution eigenfunction(const ProblemSpec& spec, double lambda);

}  // namespace qsl
