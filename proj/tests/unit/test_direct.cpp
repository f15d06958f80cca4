#include <doctest.h>

#include "qsl/direct.hpp"
#include "qsl/errors.hpp"
#include "qsl/qspecial.hpp"

#include <cmath>
#include <random>

using namespace qsl;
using doctest::Approx;

namespace {

LatticeFn random_potential(const QLattice& lat, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double c0 = u(rng), c1 = u(rng), c2 = u(rng);
  return LatticeFn::sample(lat, [=](double x) { return c0 + c1 * x + c2 * std::cos(3 * x); });
}

double max_rel_diff(const LatticeFn& f, const LatticeFn& g) {
  double d = 0.0;
  for (std::size_t n = 0; n < f.values().size(); ++n) d = std::max(d, std::abs(f[n] - g[n]));
  return d / f.max_abs();
}

}  // namespace

TEST_CASE("S_q kernel") {
  const std::complex<double> s(1.3, 0.0);
  CHECK(std::abs(s_q_kernel(0.4, 0.4, s, 0.5)) < 1e-15);
  CHECK(std::abs(s_q_kernel(0.4, 0.1, s, 0.5) + s_q_kernel(0.1, 0.4, s, 0.5)) < 1e-15);
  QSeriesConfig cfg{0.5};
  CHECK(s_q_kernel(0.4, 0.0, s, 0.5).real() == Approx(q_sin(1.3 * 0.4, cfg)).epsilon(1e-14));
}

TEST_CASE("free marching reproduces q-cos and q-sin") {
  QLattice lat(0.5, 1.0, 48);
  const auto free = ProblemSpec::free(lat);
  QSeriesConfig cfg{0.5};
  for (double lambda : {1.0, 20.0}) {
    const double s = std::sqrt(lambda);
    const auto c = solve_ivp_march(free, lambda, 1.0, 0.0);
    const auto si = solve_ivp_march(free, lambda, 0.0, 1.0);
    for (int n = 0; n <= lat.depth(); ++n) {
      const double x = lat.point(n);
      CHECK(c.phi[n] == Approx(q_cos(s * x, cfg)).epsilon(1e-9));
      CHECK(si.phi[n] == Approx(q_sin(s * x, cfg) / s).epsilon(1e-9));
    }
  }
  const auto zero = solve_ivp_march(free, 3.0, 0.0, 0.0);
  CHECK(zero.phi.max_abs() == 0.0);
}

TEST_CASE("boundary-condition solution is linear in h") {
  QLattice lat(0.5, 1.0, 48);
  std::mt19937_64 rng(7);
  const auto v = random_potential(lat, rng);
  const ProblemSpec spec(lat, v, 0.7, 0.0);
  const double lambda = 5.0;
  const auto phi = phi_with_bc(spec, lambda);
  const auto p1 = solve_ivp_march(spec, lambda, 1.0, 0.0);
  const auto p2 = solve_ivp_march(spec, lambda, 0.0, 1.0);
  for (int n = 0; n <= lat.depth(); ++n) CHECK(phi.phi[n] == Approx(p1.phi[n] + 0.7 * p2.phi[n]).epsilon(1e-12));
}

TEST_CASE("dual solvers agree on random potentials") {
  std::mt19937_64 rng(11);
  for (double q : {0.3, 0.5, 0.8}) {
    QLattice lat(q, 1.0, depth_for_tail(q));
    for (int trial = 0; trial < 3; ++trial) {
      const ProblemSpec spec(lat, random_potential(lat, rng), 0.0, 0.0);
      for (double lambda : {0.25, 7.0, -30.0}) {
        const auto m = solve_ivp_march(spec, lambda, 1.0, 0.4);
        const auto s = solve_ivp_series(spec, lambda, 1.0, 0.4);
        CHECK(max_rel_diff(m.phi, s.phi) < 1e-8);
        CHECK(m.max_residual < 1e-9);
        CHECK(functional_residual(spec, s.phi, lambda) < 1e-9);
      }
    }
  }
}

TEST_CASE("series solver on the free problem is the free solution") {
  QLattice lat(0.5, 1.0, 48);
  const auto free = ProblemSpec::free(lat);
  const auto s = solve_ivp_series(free, 2.0, 1.0, 0.0);
  const auto m = solve_ivp_march(free, 2.0, 1.0, 0.0);
  CHECK(max_rel_diff(m.phi, s.phi) < 1e-13);
  CHECK_THROWS_AS(solve_ivp_series(free, 0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("Volterra kernel: bounds and reconstruction") {
  QLattice lat(0.5, 1.0, 48);
  const auto free = ProblemSpec::free(lat);
  const auto k0 = volterra_kernel(free, 3.0);
  CHECK(k0.W.values.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(3);
  const ProblemSpec spec(lat, random_potential(lat, rng), 0.0, 0.0);
  for (double lambda : {0.25, 7.0, 100.0}) {
    const auto k = volterra_kernel(spec, lambda);
    for (std::size_t n = 0; n < k.term_max.size(); ++n) CHECK(k.term_max[n] <= k.term_bound[n] * (1 + 1e-12));
    const auto phi = apply_volterra(k, spec, lambda, 1.0, 0.2);
    const auto m = solve_ivp_march(spec, lambda, 1.0, 0.2);
    CHECK(max_rel_diff(m.phi, phi) < 1e-6);
  }
}

TEST_CASE("overflow guard") {
  QLattice lat(0.5, 1.0, 48);
  CHECK_THROWS_AS(solve_ivp_march(ProblemSpec::free(lat), -1e300, 1.0, 0.0), OverflowError);
}
