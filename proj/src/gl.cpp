#include "qsl/gl.hpp"

#include "qsl/errors.hpp"
#include "qsl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsl {

GLCoefficients::GLCoefficients(std::vector<double> coeffs, SpectralData base_data)
    : c(std::move(coeffs)), base(std::move(base_data)) {
  if (c.size() > base.count())
    throw DomainError("GL coefficients extend past the supplied base spectral data (" +
                      std::to_string(c.size()) + " > " + std::to_string(base.count()) + ")");
  for (double x : c)
    if (!std::isfinite(x)) throw DomainError("GL coefficients must be finite");
}

AdmissibilityReport check_admissible(const GLCoefficients& coeffs) {
  AdmissibilityReport rep;
  for (std::size_t n = 0; n < coeffs.c.size(); ++n) {
    const double v = 1.0 + coeffs.c[n] * coeffs.base.normings[n];
    if (!(v > 0.0)) {
      rep.ok = false;
      rep.index = n;
      rep.value = v;
      std::ostringstream os;
      os << "admissibility violated at n=" << n << ": 1 + c_n alpha_n0 = " << v;
      rep.message = os.str();
      return rep;
    }
  }
  return rep;
}

void require_admissible(const GLCoefficients& coeffs) {
  const auto rep = check_admissible(coeffs);
  if (!rep.ok) throw AdmissibilityError(*rep.index, rep.message);
}

namespace {

// Jackson weights over the full index set (0 = super-point).
Eigen::VectorXd full_weights(const QLattice& lat) {
  Eigen::VectorXd w(lat.size() + 1);
  for (int n = -1; n <= lat.depth(); ++n) w(n + 1) = lat.weight(n);
  return w;
}

Eigen::VectorXd full_values(const LatticeFn& f) {
  if (!f.super_value()) throw DomainError("GL: eigenfunction lacks its super-point value");
  Eigen::VectorXd u(f.values().size() + 1);
  u(0) = *f.super_value();
  for (std::size_t i = 0; i < f.values().size(); ++i) u(static_cast<Eigen::Index>(i) + 1) = f[i];
  return u;
}

Eigen::MatrixXd full_F(const BivariateFn& F) {
  if (!F.super_column) throw DomainError("GL: F needs its super column");
  const Eigen::Index P = F.values.rows() + 1;
  Eigen::MatrixXd out(P, P);
  out.bottomRightCorner(P - 1, P - 1) = F.values;
  out.col(0) = *F.super_column;
  out.row(0) = F.super_column->transpose();
  return out;
}

// Fills the extension (columns <= row), the diagonal record and the residual
// once the strict triangle of K is known.
void complete(GLKernel& k) {
  const Eigen::Index P = k.K.rows();
  const Eigen::VectorXd w = full_weights(k.lattice);
  k.diagonal_extension = Eigen::VectorXd::Zero(P);
  double res = 0.0;
  for (Eigen::Index r = 0; r < P; ++r) {
    const Eigen::Index nu = P - 1 - r;
    // int_0^x K(x,t) F(t,y) d_q t for every column y
    Eigen::RowVectorXd integral = Eigen::RowVectorXd::Zero(P);
    if (nu > 0) {
      const Eigen::RowVectorXd wk = k.K.row(r).tail(nu).cwiseProduct(w.tail(nu).transpose());
      integral = wk * k.F.bottomRows(nu);
    }
    for (Eigen::Index j = 0; j < P; ++j) {
      const double formula = -k.F(r, j) - integral(j);
      if (j > r) {
        res = std::max(res, std::abs(k.K(r, j) - formula));
      } else if (j == r) {
        k.diagonal_extension(r) = formula;
        k.K(r, j) = 0.0;
      } else {
        k.K(r, j) = formula;
      }
    }
  }
  k.residual = res;
  k.diagonal_defect = k.diagonal_extension.cwiseAbs().maxCoeff();
}

}  // namespace

BivariateFn build_F(const GLCoefficients& coeffs, const ProblemSpec& base_spec) {
  const auto& lat = base_spec.lattice;
  const Eigen::Index P = static_cast<Eigen::Index>(lat.size()) + 1;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(P, P);
  for (std::size_t n = 0; n < coeffs.c.size(); ++n) {
    if (coeffs.c[n] == 0.0) continue;
    const Eigen::VectorXd u = full_values(eigenfunction(base_spec, coeffs.base.eigenvalues[n]).phi);
    full.noalias() += coeffs.c[n] * u * u.transpose();
  }
  // exact symmetry regardless of summation order
  full = 0.5 * (full + full.transpose()).eval();
  BivariateFn F(lat);
  F.values = full.bottomRightCorner(P - 1, P - 1);
  F.super_column = full.col(0);
  return F;
}

GLKernel solve_gl_kernel(const BivariateFn& Fin) {
  GLKernel k{Fin.lattice, {}, full_F(Fin), {}, 0.0, 0.0, kDiagonalConvention};
  const Eigen::Index P = k.F.rows();
  k.K = Eigen::MatrixXd::Zero(P, P);
  const Eigen::VectorXd w = full_weights(k.lattice);
  // Row x: unknowns K(x, x q^k), k >= 1; equations at y = x q^j, j >= 1.
  //   K(x,y) + sum_k w_k K(x,t_k) F(t_k,y) = -F(x,y)
  parallel_for(static_cast<std::size_t>(P), [&](std::size_t rr) {
    const auto r = static_cast<Eigen::Index>(rr);
    const Eigen::Index nu = P - 1 - r;
    if (nu == 0) return;
    const auto Fs = k.F.bottomRightCorner(nu, nu);
    Eigen::MatrixXd A = Fs.transpose() * w.tail(nu).asDiagonal();
    A.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14))
      throw AdmissibilityError(static_cast<std::size_t>(r),
                               "GL row system singular at lattice index " + std::to_string(r - 1) +
                                   " (unique solvability theorem violated)");
    const Eigen::VectorXd rhs = -k.F.row(r).tail(nu).transpose();
    k.K.row(r).tail(nu) = lu.solve(rhs).transpose();
  });
  complete(k);
  return k;
}

GLKernel rank_one_kernel(double c0, const LatticeFn& phi0) {
  const auto& lat = phi0.lattice();
  const Eigen::VectorXd u = full_values(phi0);
  const Eigen::VectorXd w = full_weights(lat);
  const Eigen::Index P = u.size();
  GLKernel k{lat, Eigen::MatrixXd::Zero(P, P), c0 * u * u.transpose(), {}, 0.0, 0.0, kDiagonalConvention};
  double below = 0.0;  // int_0^{qx} phi0^2 d_q t
  for (Eigen::Index r = P - 1; r >= 0; --r) {
    const double g = -c0 * u(r) / (1.0 + c0 * below);
    for (Eigen::Index j = r + 1; j < P; ++j) k.K(r, j) = g * u(j);
    below += w(r) * u(r) * u(r);
  }
  complete(k);
  return k;
}

ReconstructedPotential reconstruct_potential(const GLKernel& kernel, const ProblemSpec& base_spec) {
  const auto& lat = base_spec.lattice;
  require_same_lattice(lat, kernel.lattice);
  const double q = lat.q();
  const int N = lat.depth();
  std::vector<double> v(lat.size());
  for (int m = 0; m < N; ++m) {
    const double x = lat.point(m);
    const double dx = -kernel(m + 1, m) / ((1.0 - q) * x);       // (K(x,x) - K(qx,x)) / (x - qx)
    const double dt = -kernel(m, m - 1) / (x - lat.point(m - 1));  // (K(x,x) - K(x,x/q)) / (x - x/q)
    v[m] = base_spec.v[m] + dx + dt;
  }
  // the deepest point carries the last available correction
  v[N] = base_spec.v[N] + (v[N - 1] - base_spec.v[N - 1]);
  double at_zero = base_spec.v.value_at_zero() + (v[N] - base_spec.v[N]);
  bool settled = true;
  try {
    at_zero = tail_limit(std::vector<double>(v.begin(), v.end() - 1),
                         QLattice(q, lat.a(), N - 1), 1e-6);
  } catch (const ConvergenceError&) {
    settled = false;
  }
  return {LatticeFn(lat, std::move(v), at_zero), N - 1, settled};
}

LatticeFn transform_eigenfunction(const GLKernel& kernel, const IVPSolution& phi0) {
  const Eigen::VectorXd u = full_values(phi0.phi);
  const Eigen::VectorXd w = full_weights(kernel.lattice);
  const Eigen::Index P = u.size();
  Eigen::VectorXd out(P);
  for (Eigen::Index r = 0; r < P; ++r) {
    const Eigen::Index nu = P - 1 - r;
    double acc = 0.0;
    if (nu > 0) acc = kernel.K.row(r).tail(nu).dot(w.tail(nu).cwiseProduct(u.tail(nu)));
    out(r) = u(r) + acc;
  }
  std::vector<double> vals(out.data() + 1, out.data() + P);
  return LatticeFn(kernel.lattice, std::move(vals), phi0.phi.value_at_zero(), out(0));
}

OraclePotential reconstruct_v_oracle(const GLKernel& kernel, const ProblemSpec& base_spec, double lambda_probe) {
  const auto& lat = base_spec.lattice;
  const double q = lat.q();
  const int N = lat.depth();
  const LatticeFn phi = transform_eigenfunction(kernel, phi_with_bc(base_spec, lambda_probe));
  const double floor = 1e-14 * phi.max_abs();
  std::vector<double> v(lat.size());
  std::vector<int> skipped;
  for (int m = 0; m < N; ++m) {
    const double x = lat.point(m);
    if (std::abs(phi[m]) <= floor) {
      skipped.push_back(m);
      continue;
    }
    const double num = phi[m + 1] + q * phi.at(m - 1) - (1.0 + q) * phi[m];
    v[m] = lambda_probe + num / (x * x * (1.0 - q) * (1.0 - q) * phi[m]);
  }
  for (int m : skipped) {
    const double left = m > 0 ? v[m - 1] : v[m + 1];
    const double right = m + 1 < N ? v[m + 1] : left;
    v[m] = 0.5 * (left + right);
  }
  v[N] = v[N - 1];
  const double at_zero = v[N];
  return {LatticeFn(lat, std::move(v), at_zero), std::move(skipped)};
}

double transform_h(double h0, const GLCoefficients& coeffs, double q) {
  double sum = 0.0;
  for (double c : coeffs.c) sum += c;
  return h0 - q * sum;
}

double transform_H(double H0, const GLCoefficients& coeffs, double q) {
  double sum = 0.0;
  for (std::size_t n = 0; n < coeffs.c.size(); ++n) {
    const double pa = coeffs.base.endpoint_values[n];
    sum += coeffs.c[n] * pa * pa / (1.0 + coeffs.c[n] * coeffs.base.normings[n]);
  }
  return H0 + q * sum;
}

std::vector<double> transformed_normings(const GLCoefficients& coeffs) {
  require_admissible(coeffs);
  std::vector<double> out(coeffs.base.normings);
  for (std::size_t n = 0; n < coeffs.c.size(); ++n) out[n] = out[n] / (1.0 + coeffs.c[n] * out[n]);
  return out;
}

GLCoefficients coeffs_from_data(const SpectralData& target, const SpectralData& base, double rel_tol) {
  const std::size_t n = std::min(target.count(), base.count());
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lt = target.eigenvalues[i], lb = base.eigenvalues[i];
    if (std::abs(lt - lb) > rel_tol * std::max(std::abs(lb), 1.0)) {
      std::ostringstream os;
      os << "eigenvalue " << i << " differs (" << lt << " vs " << lb << "): problems are not isospectral";
      throw DomainError(os.str());
    }
    if (!(target.normings[i] > 0.0) || !(base.normings[i] > 0.0))
      throw DomainError("norming constants must be positive");
    c[i] = 1.0 / target.normings[i] - 1.0 / base.normings[i];
  }
  SpectralData b = base;
  b.eigenvalues.resize(n);
  b.normings.resize(n);
  b.endpoint_values.resize(std::min(n, b.endpoint_values.size()));
  return GLCoefficients(std::move(c), std::move(b));
}

double pde_identity_residual(const GLKernel& kernel, const LatticeFn& v, const LatticeFn& v0) {
  const auto& lat = kernel.lattice;
  const double q = lat.q();
  const Eigen::Index P = kernel.K.rows();
  const auto& K = kernel.K;
  // Second differences amplify rounding by 1/x^2; stay where that is benign.
  const double floor = 1e-4 * lat.a();
  double worst = 0.0;
  for (Eigen::Index r = 1; r < P; ++r) {
    const double x = lat.point(static_cast<int>(r) - 1);
    for (Eigen::Index j = r + 2; j + 1 < P; ++j) {
      const double y = lat.point(static_cast<int>(j) - 1);
      if (y < floor) break;
      const double gx = (K(r, j) - K(r - 1, j)) / (x - x / q);
      const double gqx = (K(r + 1, j) - K(r, j)) / (q * x - x);
      const double dxx = (gx - gqx) / ((1.0 - q) * x);
      const double gy = (K(r, j) - K(r, j - 1)) / (y - y / q);
      const double gqy = (K(r, j + 1) - K(r, j)) / (q * y - y);
      const double dyy = (gy - gqy) / ((1.0 - q) * y);
      const double res = dxx - v[r - 1] * K(r, j) - dyy + v0[j - 1] * K(r, j);
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

double left_boundary_residual(const GLKernel& kernel, double h0) {
  const auto& lat = kernel.lattice;
  const Eigen::Index P = kernel.K.rows();
  double worst = 0.0;
  bool any = false;
  for (Eigen::Index r = 0; r < P; ++r) {
    if (lat.point(static_cast<int>(r) - 1) < 1e-3 * lat.a()) break;
    std::vector<double> row(lat.size());
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = kernel.K(r, static_cast<Eigen::Index>(j) + 1);
    try {
      const double k0 = tail_limit(row, lat, 1e-6);
      const LatticeFn f(lat, row, k0);
      const double d = dq_inv_at_zero(f, 1e-6);
      worst = std::max(worst, std::abs(h0 * k0 - d));
      any = true;
    } catch (const ConvergenceError&) {
    }
  }
  return any ? worst : std::nan("");
}

GLTransform gl_transform(const GLCoefficients& coeffs, const ProblemSpec& base_spec) {
  require_admissible(coeffs);
  GLKernel kernel = solve_gl_kernel(build_F(coeffs, base_spec));
  ReconstructedPotential pot = reconstruct_potential(kernel, base_spec);
  const double q = base_spec.lattice.q();
  const double h = transform_h(base_spec.h, coeffs, q);
  const double H = transform_H(base_spec.H, coeffs, q);
  ProblemSpec problem(base_spec.lattice, pot.v, h, H);
  return {std::move(kernel), std::move(pot), h, H, std::move(problem)};
}

}  // namespace qsl
