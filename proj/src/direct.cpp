#include "qsl/direct.hpp"

#include "qsl/errors.hpp"
#include "qsl/qspecial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qsl {

ProblemSpec::ProblemSpec(QLattice lat, LatticeFn potential, double h_, double H_)
    : lattice(lat), v(std::move(potential)), h(h_), H(H_) {
  require_same_lattice(lattice, v.lattice());
  if (!std::isfinite(h) || !std::isfinite(H)) throw DomainError("boundary parameters h, H must be finite");
  if (!std::isfinite(v.value_at_zero())) throw DomainError("potential needs a finite value at zero");
  for (double x : v.values())
    if (!std::isfinite(x)) throw DomainError("potential has non-finite samples");
}

ProblemSpec ProblemSpec::free(const QLattice& lat, double h, double H) {
  return ProblemSpec(lat, LatticeFn::constant(lat, 0.0), h, H);
}

std::complex<double> s_q_kernel(double x, double t, std::complex<double> s, double q) {
  if (x == t) return 0.0;
  QSeriesConfig cfg;
  cfg.q = q;
  const auto sx = s * x, st = s * t;
  return q_sin(sx, cfg) * q_cos(st, cfg) - q_cos(sx, cfg) * q_sin(st, cfg);
}

namespace {

void guard(double y, int n) {
  if (!(std::abs(y) <= kOverflowGuard))
    throw OverflowError("lattice solution exceeds 1e280 at index " + std::to_string(n) +
                        "; eigen-index beyond double precision range");
}

IVPSolution finish(const ProblemSpec& spec, double lambda, std::vector<double> vals, double super,
                   double c1, double c2) {
  const auto& lat = spec.lattice;
  const double slope = (vals[0] - super) / (lat.a() - lat.point(-1));
  LatticeFn phi(lat, std::move(vals), c1, super);
  const double res = functional_residual(spec, phi, lambda);
  return {lambda, std::move(phi), c1, c2, slope, res};
}

}  // namespace

IVPSolution solve_ivp_march(const ProblemSpec& spec, double lambda, double c1, double c2) {
  const auto& lat = spec.lattice;
  const double q = lat.q();
  const int N = lat.depth();
  // March (y, g = D_q y) rather than two values of y: g carries c2 exactly,
  // where a difference of two seeded values near 0 would cancel it away.
  const double b = q * (spec.v.value_at_zero() - lambda) * c1 / (1.0 + q);
  const double xN = lat.point(N);
  double y = c1 + c2 * xN + b * xN * xN;
  double g = c2 + b * (1.0 + q) * xN;
  std::vector<double> vals(lat.size());
  vals[N] = y;
  double super = 0.0;
  for (int n = N; n >= 0; --n) {
    const double x = lat.point(n);
    g -= (1.0 - q) * x * (lambda - spec.v[n]) * y;
    y += (1.0 - q) * (x / q) * g;
    guard(y, n - 1);
    if (n > 0)
      vals[n - 1] = y;
    else
      super = y;
  }
  auto sol = finish(spec, lambda, std::move(vals), super, c1, c2);
  sol.slope_at_a = g;  // exact march value, free of the cancellation in finish()
  return sol;
}

double functional_residual(const ProblemSpec& spec, const LatticeFn& y, double lambda) {
  const auto& lat = spec.lattice;
  const double q = lat.q();
  double worst = 0.0;
  const int first = y.super_value() ? 0 : 1;
  for (int n = first; n < lat.depth(); ++n) {
    const double x = lat.point(n);
    const double mid = ((1.0 + q) + (spec.v[n] - lambda) * x * x * (1.0 - q) * (1.0 - q)) * y[n];
    const double lo = y[n + 1];
    const double hi = q * y.at(n - 1);
    const double scale = std::max({std::abs(mid), std::abs(lo), std::abs(hi)});
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(lo + hi - mid) / scale);
  }
  return worst;
}

IVPSolution solve_ivp_series(const ProblemSpec& spec, double lambda, double c1, double c2, double tol,
                             int max_terms) {
  if (lambda == 0.0) throw DomainError("series solver is not defined at lambda = 0 (s = 0)");
  const auto& lat = spec.lattice;
  const int N = lat.depth();
  const int P = N + 2;  // index 0 is the super-point
  const LatticeTrig trig = lattice_trig(lambda, lat.q(), lat.a(), -1, N);
  const Eigen::MatrixXd& S = trig.kernel;
  Eigen::VectorXd wv = Eigen::VectorXd::Zero(P);  // w_k v_k; the super-point lies outside [0,a]
  for (int k = 0; k <= N; ++k) wv(k + 1) = lat.weight(k) * spec.v[k];

  Eigen::VectorXd term = c1 * trig.cos + c2 * trig.sin_over_s;
  Eigen::VectorXd sum = term;
  bool converged = false;
  for (int it = 1; it < max_terms; ++it) {
    // phi_{n+1}(x_m) = sum_{k>m} w_k S(x_m,x_k)/s v_k phi_n(x_k)
    const Eigen::VectorXd g = wv.cwiseProduct(term);
    Eigen::VectorXd next(P);
    for (int m = 0; m < P; ++m) next(m) = S.row(m).tail(P - m - 1).dot(g.tail(P - m - 1));
    sum += next;
    const double tmax = next.cwiseAbs().maxCoeff();
    const double smax = sum.cwiseAbs().maxCoeff();
    if (!std::isfinite(smax) || smax > kOverflowGuard) throw OverflowError("series solution overflowed");
    term.swap(next);
    if (tmax <= tol * smax) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("series solver did not converge within " + std::to_string(max_terms) + " terms");
  std::vector<double> vals(sum.data() + 1, sum.data() + P);
  return finish(spec, lambda, std::move(vals), sum(0), c1, c2);
}

VolterraKernel volterra_kernel(const ProblemSpec& spec, double lambda, int n_max, double tol) {
  if (lambda == 0.0) throw DomainError("volterra kernel is not defined at lambda = 0 (s = 0)");
  const auto& lat = spec.lattice;
  const double q = lat.q();
  const int N = lat.depth();
  const int P = N + 1;
  const Eigen::MatrixXd S = lattice_trig(lambda, q, lat.a(), 0, N).kernel;
  const double abs_s = std::sqrt(std::abs(lambda));

  VolterraKernel out{BivariateFn(lat), 0, {}, {}, 0.0, 0.0};
  out.L = spec.v.max_abs();
  out.M = S.cwiseAbs().maxCoeff() * abs_s;

  // W_1(x,t) = S_q(x,t) v(t) / s for t < x
  Eigen::MatrixXd Wn = Eigen::MatrixXd::Zero(P, P);
  for (int m = 0; m < P; ++m)
    for (int j = m + 1; j < P; ++j) Wn(m, j) = S(m, j) * spec.v[j];
  Eigen::VectorXd wv(P);
  for (int k = 0; k < P; ++k) wv(k) = lat.weight(k) * spec.v[k];

  double bound_core = out.M * out.L / abs_s;  // n = 1
  for (int n = 1;; ++n) {
    out.W.values += Wn;
    const double tmax = Wn.cwiseAbs().maxCoeff();
    out.term_max.push_back(tmax);
    out.term_bound.push_back(bound_core);
    out.terms_used = n;
    const double wmax = out.W.values.cwiseAbs().maxCoeff();
    if (tmax <= tol * wmax || tmax == 0.0) break;
    if (n >= n_max) throw ConvergenceError("volterra kernel did not converge within n_max terms");
    // W_{n+1}(x_m, x_j) = sum_{m<k<j} w_k S(x_m,x_k)/s v_k W_n(x_k, x_j)
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(P, P);
    for (int m = 0; m < P; ++m)
      for (int j = m + 2; j < P; ++j) {
        double acc = 0.0;
        for (int k = m + 1; k < j; ++k) acc += wv(k) * S(m, k) * Wn(k, j);
        next(m, j) = acc;
      }
    Wn.swap(next);
    // ratio of consecutive bounds: M L (1-q) q^{n-1} a / (|s| (1 - q^n))
    bound_core *= out.M * out.L * (1.0 - q) * std::pow(q, n - 1) * lat.a() / (abs_s * (1.0 - std::pow(q, n)));
  }
  return out;
}

LatticeFn apply_volterra(const VolterraKernel& kernel, const ProblemSpec& spec, double lambda, double c1,
                         double c2) {
  const auto& lat = spec.lattice;
  const int N = lat.depth();
  const LatticeTrig trig = lattice_trig(lambda, lat.q(), lat.a(), 0, N);
  const Eigen::VectorXd phi0 = c1 * trig.cos + c2 * trig.sin_over_s;
  std::vector<double> out(lat.size());
  for (int m = 0; m <= N; ++m) {
    double acc = 0.0;
    for (int j = N; j > m; --j) acc += lat.weight(j) * kernel.W(m, j) * phi0[j];
    out[m] = phi0[m] + acc;
  }
  return LatticeFn(lat, std::move(out), c1);
}

IVPSolution phi_with_bc(const ProblemSpec& spec, double lambda) {
  return solve_ivp_march(spec, lambda, 1.0, spec.h);
}

IVPSolution eigenfunction(const ProblemSpec& spec, double lambda) {
  const auto& lat = spec.lattice;
  const double q = lat.q();
  const int N = lat.depth();
  const double a = lat.a();
  std::vector<double> psi(lat.size());
  psi[0] = 1.0;
  // D_{q^{-1}} psi(a) + H psi(a) = 0 fixes the super-point value.
  const double super = 1.0 + spec.H * (a - lat.point(-1));
  double prev = super;
  for (int n = 0; n < N; ++n) {
    const double x = lat.point(n);
    const double coef = (1.0 + q) + (spec.v[n] - lambda) * x * x * (1.0 - q) * (1.0 - q);
    psi[n + 1] = coef * psi[n] - q * prev;
    guard(psi[n + 1], n + 1);
    prev = psi[n];
  }
  const double slope = (psi[N - 1] - psi[N]) / (lat.point(N - 1) - lat.point(N));
  const double psi0 = psi[N] - lat.point(N) * slope;
  if (!(std::abs(psi0) > 0.0) || !std::isfinite(psi0))
    throw DomainError("eigenfunction: solution through the right boundary vanishes at zero");
  for (double& y : psi) y /= psi0;
  auto sol = finish(spec, lambda, std::move(psi), super / psi0, 1.0, spec.h);
  sol.slope_at_a = -spec.H * sol.phi[0];
  return sol;
}

}  // namespace qsl
