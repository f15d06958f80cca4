#pragma once

// q-Gelfand-Levitan transform: F kernel from base spectral data and
// coefficients c_n, the per-row lattice solve for K, reconstruction of
// (v, h, H), transformed eigenfunctions and normings.

#include "qsl/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qsl {

// Identifies how K is continued off the strict triangle y < x (recorded in
// every output that depends on it).
inline constexpr const char* kDiagonalConvention = "gl-extension/K(x,x)=0";

struct GLCoefficients {
  std::vector<double> c;  // c_n for n < c.size(), zero beyond
  SpectralData base;      // lambda_{n,0}, alpha_{n,0}, phi_0(a, lambda_{n,0})

  GLCoefficients(std::vector<double> coeffs, SpectralData base_data);
};

struct AdmissibilityReport {
  bool ok = true;
  std::optional<std::size_t> index;  // first n with 1 + c_n alpha_{n,0} <= 0
  double value = 1.0;                // 1 + c_n alpha_{n,0} at that index
  std::string message;
};

AdmissibilityReport check_admissible(const GLCoefficients& coeffs);

// Throws AdmissibilityError when the report is not ok.
void require_admissible(const GLCoefficients& coeffs);

// F(x,y) = sum c_n phi_0(x, lambda_n) phi_0(y, lambda_n) on the lattice. The
// super column holds F(x_m, a/q) at entry m+1 and F(a/q, a/q) at entry 0.
BivariateFn build_F(const GLCoefficients& coeffs, const ProblemSpec& base_spec);

struct GLKernel {
  QLattice lattice;
  // (depth+2) x (depth+2); row/column i is lattice index i-1, so index 0 is
  // the super-point a/q. Entries with column > row (y < x) are solved; the
  // diagonal is zero; column < row holds the GL extension K(x,y) for y > x.
  Eigen::MatrixXd K;
  Eigen::MatrixXd F;
  Eigen::VectorXd diagonal_extension;  // what the GL formula would give at y = x
  double residual = 0.0;               // max |K + F + int K F| over solved pairs
  double diagonal_defect = 0.0;        // max |diagonal_extension|
  std::string convention = kDiagonalConvention;

  // K(a q^m, a q^j) for -1 <= m, j <= depth.
  double operator()(int m, int j) const { return K(m + 1, j + 1); }
  double f(int m, int j) const { return F(m + 1, j + 1); }
};

GLKernel solve_gl_kernel(const BivariateFn& F);

// K(x,y) = -c0 phi0(x) phi0(y) / (1 + c0 int_0^{qx} phi0^2 d_q t): the exact
// rank-one solution of the lattice system.
GLKernel rank_one_kernel(double c0, const LatticeFn& phi0);

struct ReconstructedPotential {
  LatticeFn v;
  int last_formula_index;  // v from the diagonal formula on 0..last; copied below it
  bool tail_settled;       // whether v(0) came from a settled tail limit
};

// v(x) = v_0(x) + D_{q,x}K(x,t)|_{t=x} + D_{q^{-1},t}K(x,t)|_{t=x}.
ReconstructedPotential reconstruct_potential(const GLKernel& kernel, const ProblemSpec& base_spec);

struct OraclePotential {
  LatticeFn v;                    // v on indices 0..depth-1, last value repeated at depth
  std::vector<int> skipped;       // indices where phi vanished (value interpolated)
};

// v(x) = lambda + [phi(qx) + q phi(x/q) - (1+q) phi(x)] / (x^2 (1-q)^2 phi(x)) with
// phi the transformed solution at lambda_probe.
OraclePotential reconstruct_v_oracle(const GLKernel& kernel, const ProblemSpec& base_spec,
                                     double lambda_probe);

double transform_h(double h0, const GLCoefficients& coeffs, double q);
double transform_H(double H0, const GLCoefficients& coeffs, double q);

// phi(x) = phi_0(x) + int_0^x K(x,t) phi_0(t) d_q t, including the super-point.
LatticeFn transform_eigenfunction(const GLKernel& kernel, const IVPSolution& phi0);

// alpha_n = alpha_{n,0} / (1 + c_n alpha_{n,0}) over the base range.
std::vector<double> transformed_normings(const GLCoefficients& coeffs);

// c_n = 1/alpha_n - 1/alpha_{n,0}; throws DomainError when the eigenvalues
// differ by more than rel_tol * max(|lambda|, 1).
GLCoefficients coeffs_from_data(const SpectralData& target, const SpectralData& base,
                                double rel_tol = 1e-6);

// max over interior pairs (y < qx) of
// |D_{q,x}D_{q^{-1},x}K - v(x)K - D_{q,y}D_{q^{-1},y}K + v_0(y)K|.
double pde_identity_residual(const GLKernel& kernel, const LatticeFn& v, const LatticeFn& v0);

// h_0 K(x,0) - D_{q^{-1},t}K(x,t)|_{t=0}, max over rows with a settled tail.
double left_boundary_residual(const GLKernel& kernel, double h0);

// Full transform: F, K, (v, h, H) as a new problem.
struct GLTransform {
  GLKernel kernel;
  ReconstructedPotential potential;
  double h;
  double H;
  ProblemSpec problem;
};

GLTransform gl_transform(const GLCoefficients& coeffs, const ProblemSpec& base_spec);

}  // namespace qsl
