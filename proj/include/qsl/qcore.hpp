#pragma once

// Geometric lattice {a q^n} and the q-calculus primitives built on it:
// Jackson quadrature, the forward/backward q-differences, the L^2_q inner
// product and the backward q-Wronskian.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace qsl {

// The points a, aq, ..., aq^depth of the lattice, together with the limit
// point 0 and the super-point a/q.
class QLattice {
 public:
  static constexpr double kDefaultFloor = 1e-300;

  QLattice(double q, double a, int depth, double floor = kDefaultFloor);

  double q() const noexcept { return q_; }
  double a() const noexcept { return a_; }
  int depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(depth_) + 1; }

  // a q^n for -1 <= n <= depth.
  double point(int n) const;
  // Jackson weight (1-q) a q^n.
  double weight(int n) const;

  bool operator==(const QLattice&) const = default;

 private:
  double q_;
  double a_;
  int depth_;
};

// Smallest depth whose deepest point a q^depth is at most tail_scale * a,
// never below min_depth. Used to pick lattices where the Jackson tail beyond
// the deepest point is negligible.
int depth_for_tail(double q, double tail_scale = 1e-14, int min_depth = 48);

// Free-function alias used throughout the spectral code.
double point(const QLattice& lattice, int n);

// Scalar function sampled on a lattice: one value per index plus the value at
// zero and, for marched solutions, the value at the super-point a/q.
class LatticeFn {
 public:
  LatticeFn(QLattice lattice, std::vector<double> values, double value_at_zero,
            std::optional<double> super_value = std::nullopt);

  // Samples f at every lattice point and at zero; include_super also samples
  // f(a/q).
  static LatticeFn sample(const QLattice& lattice, const std::function<double(double)>& f,
                          bool include_super = false);
  static LatticeFn constant(const QLattice& lattice, double c);

  const QLattice& lattice() const noexcept { return lattice_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  double operator[](std::size_t n) const { return values_[n]; }
  double value_at_zero() const noexcept { return value_at_zero_; }
  const std::optional<double>& super_value() const noexcept { return super_; }
  void set_super_value(std::optional<double> v) { super_ = v; }

  // Value at index n with n = -1 addressing the super-point.
  double at(int n) const;

  double max_abs() const;

 private:
  QLattice lattice_;
  std::vector<double> values_;
  double value_at_zero_;
  std::optional<double> super_;
};

// f(a q^m, a q^j) for 0 <= m, j <= depth. The optional super column carries
// f(a q^m, a/q), which some kernels need for backward differences at a.
struct BivariateFn {
  QLattice lattice;
  Eigen::MatrixXd values;
  std::optional<Eigen::VectorXd> super_column;

  explicit BivariateFn(const QLattice& lat)
      : lattice(lat), values(Eigen::MatrixXd::Zero(lat.size(), lat.size())) {}
  double operator()(std::size_t m, std::size_t j) const { return values(m, j); }
  double& operator()(std::size_t m, std::size_t j) { return values(m, j); }
};

// D_q f at a q^n, 0 <= n < depth.
double dq(const LatticeFn& f, int n);

// D_{q^{-1}} f at a q^n. n = 0 requires the super-point value.
double dq_inv(const LatticeFn& f, int n);

// Shared estimate of D_q f(0) = D_{q^{-1}} f(0) = lim (f(aq^n) - f(0)) / aq^n.
// Uses the deepest pair of points that sit above the cancellation floor and a
// Richardson step; throws ConvergenceError when the two neighbouring
// extrapolants disagree by more than rel_tol.
double dq_inv_at_zero(const LatticeFn& f, double rel_tol = 1e-8);

// Limit of f at zero estimated from the deepest indices (Richardson in the
// geometric step). Throws ConvergenceError when not settled within rel_tol.
double tail_limit(const std::vector<double>& values, const QLattice& lattice,
                  double rel_tol = 1e-6);

struct JacksonValue {
  double value;
  double tail_estimate;  // (1-q) a q^depth max|f|
};

// (1-q) sum_{n >= upper_index} a q^n f(a q^n), i.e. the integral from 0 to
// a q^upper_index truncated at the deepest point.
JacksonValue jackson_integral(const LatticeFn& f, int upper_index = 0);

// Integral from 0 to a q^m for every m, as a lattice function (value at zero 0).
LatticeFn jackson_cumulative(const LatticeFn& f);

// <f, g> = integral_0^a f g d_q t (real-valued functions).
double inner_product(const LatticeFn& f, const LatticeFn& g);

// W_{q^{-1}}(y, z) = y D_{q^{-1}} z - z D_{q^{-1}} y at a q^n.
double q_wronskian_inv(const LatticeFn& y, const LatticeFn& z, int n);

// True when the deepest values have settled on value_at_zero (tail deviation
// below tol relative to the function's scale) without oscillating.
bool is_q_regular(const LatticeFn& f, double tol = 1e-8);

// Pointwise product and linear combinations on a shared lattice.
LatticeFn multiply(const LatticeFn& f, const LatticeFn& g);
LatticeFn axpy(double alpha, const LatticeFn& x, const LatticeFn& y);

void require_same_lattice(const QLattice& a, const QLattice& b);

}  // namespace qsl
