#include "qsl/qcore.hpp"

#include "qsl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qsl {

QLattice::QLattice(double q, double a, int depth, double floor) : q_(q), a_(a), depth_(depth) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("lattice: q must lie in (0,1), got " + std::to_string(q));
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("lattice: a must be positive and finite");
  if (depth < 2) throw DomainError("lattice: depth must be at least 2");
  if (!(a * std::pow(q, depth) >= floor))
    throw DomainError("lattice: deepest point a*q^depth falls below the underflow floor");
}

double QLattice::point(int n) const {
  if (n < -1 || n > depth_) throw DomainError("lattice index " + std::to_string(n) + " out of range");
  return a_ * std::pow(q_, n);
}

double QLattice::weight(int n) const { return (1.0 - q_) * point(n); }

int depth_for_tail(double q, double tail_scale, int min_depth) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("depth_for_tail: q must lie in (0,1)");
  const int needed = static_cast<int>(std::ceil(std::log(tail_scale) / std::log(q)));
  return std::max(min_depth, needed);
}

double point(const QLattice& lattice, int n) { return lattice.point(n); }

void require_same_lattice(const QLattice& a, const QLattice& b) {
  if (!(a == b)) throw DomainError("lattice mismatch");
}

LatticeFn::LatticeFn(QLattice lattice, std::vector<double> values, double value_at_zero,
                     std::optional<double> super_value)
    : lattice_(lattice), values_(std::move(values)), value_at_zero_(value_at_zero), super_(super_value) {
  if (values_.size() != lattice_.size())
    throw DomainError("lattice function length " + std::to_string(values_.size()) +
                      " does not match depth+1 = " + std::to_string(lattice_.size()));
}

LatticeFn LatticeFn::sample(const QLattice& lattice, const std::function<double(double)>& f,
                            bool include_super) {
  std::vector<double> vals(lattice.size());
  for (int n = 0; n <= lattice.depth(); ++n) vals[n] = f(lattice.point(n));
  std::optional<double> sup;
  if (include_super) sup = f(lattice.point(-1));
  return LatticeFn(lattice, std::move(vals), f(0.0), sup);
}

LatticeFn LatticeFn::constant(const QLattice& lattice, double c) {
  return LatticeFn(lattice, std::vector<double>(lattice.size(), c), c, c);
}

double LatticeFn::at(int n) const {
  if (n == -1) {
    if (!super_) throw DomainError("lattice function has no super-point value");
    return *super_;
  }
  if (n < 0 || n > lattice_.depth()) throw DomainError("lattice index " + std::to_string(n) + " out of range");
  return values_[static_cast<std::size_t>(n)];
}

double LatticeFn::max_abs() const {
  double m = std::abs(value_at_zero_);
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double dq(const LatticeFn& f, int n) {
  const auto& lat = f.lattice();
  if (n < 0 || n >= lat.depth())
    throw DomainError("dq: index " + std::to_string(n) + " needs a neighbour below the deepest point");
  const double x = lat.point(n);
  return (f[n] - f[n + 1]) / ((1.0 - lat.q()) * x);
}

double dq_inv(const LatticeFn& f, int n) {
  const auto& lat = f.lattice();
  if (n < 0 || n > lat.depth()) throw DomainError("dq_inv: index " + std::to_string(n) + " out of range");
  if (n == 0 && !f.super_value()) throw DomainError("dq_inv at a needs the super-point value f(a/q)");
  const double x = lat.point(n);
  const double above = f.at(n - 1);
  return (f[n] - above) / (x - x / lat.q());
}

namespace {

// Deepest index whose point is still above the cancellation floor
// cbrt(eps) * a; below it, f(x) - f(0) is dominated by rounding.
int settled_index(const QLattice& lat) {
  const double floor = std::cbrt(std::numeric_limits<double>::epsilon()) * lat.a();
  int m = 0;
  while (m + 1 <= lat.depth() && lat.point(m + 1) >= floor) ++m;
  return std::max(m, 2);
}

}  // namespace

double dq_inv_at_zero(const LatticeFn& f, double rel_tol) {
  const auto& lat = f.lattice();
  const double q = lat.q();
  const double f0 = f.value_at_zero();
  auto slope = [&](int m) { return (f[m] - f0) / lat.point(m); };
  // slope(m) = c + b x_m + O(x_m^2); one Richardson step removes the b term.
  auto richardson = [&](int m) { return (slope(m) - q * slope(m - 1)) / (1.0 - q); };
  const int m = settled_index(lat);
  const double r1 = richardson(m);
  const double r2 = richardson(m - 1);
  const double scale = std::max({std::abs(r1), std::abs(r2), f.max_abs() / lat.a()});
  if (std::abs(r1 - r2) > rel_tol * scale)
    throw ConvergenceError("dq_inv_at_zero: tail estimates disagree (" + std::to_string(r1) + " vs " +
                           std::to_string(r2) + ")");
  return r1;
}

double tail_limit(const std::vector<double>& values, const QLattice& lat, double rel_tol) {
  const int n = lat.depth();
  const double q = lat.q();
  // values[m] = L + c x_m + O(x_m^2): eliminate the linear term.
  auto extrap = [&](int m) { return (values[m] - q * values[m - 1]) / (1.0 - q); };
  const double e1 = extrap(n);
  const double e2 = extrap(n - 1);
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1e-300);
  if (!std::isfinite(e1) || std::abs(e1 - e2) > rel_tol * scale)
    throw ConvergenceError("tail limit at zero not settled (" + std::to_string(e1) + " vs " +
                           std::to_string(e2) + ")");
  return e1;
}

JacksonValue jackson_integral(const LatticeFn& f, int upper_index) {
  const auto& lat = f.lattice();
  if (upper_index < 0 || upper_index > lat.depth())
    throw DomainError("jackson_integral: upper index out of range");
  // Sum from the deepest point upwards so small terms accumulate first.
  double sum = 0.0;
  for (int n = lat.depth(); n >= upper_index; --n) sum += lat.point(n) * f[n];
  const double tail = (1.0 - lat.q()) * lat.point(lat.depth()) * f.max_abs();
  return {(1.0 - lat.q()) * sum, tail};
}

LatticeFn jackson_cumulative(const LatticeFn& f) {
  const auto& lat = f.lattice();
  std::vector<double> out(lat.size());
  double sum = 0.0;
  for (int n = lat.depth(); n >= 0; --n) {
    sum += lat.point(n) * f[n];
    out[n] = (1.0 - lat.q()) * sum;
  }
  return LatticeFn(lat, std::move(out), 0.0);
}

double inner_product(const LatticeFn& f, const LatticeFn& g) {
  require_same_lattice(f.lattice(), g.lattice());
  return jackson_integral(multiply(f, g)).value;
}

double q_wronskian_inv(const LatticeFn& y, const LatticeFn& z, int n) {
  require_same_lattice(y.lattice(), z.lattice());
  return y.at(n) * dq_inv(z, n) - z.at(n) * dq_inv(y, n);
}

bool is_q_regular(const LatticeFn& f, double tol) {
  const auto& lat = f.lattice();
  const double scale = std::max(1.0, f.max_abs());
  const int deepest = lat.depth();
  const int span = std::min(4, deepest);
  for (int n = deepest - span + 1; n <= deepest; ++n) {
    if (!(std::abs(f[n] - f.value_at_zero()) <= tol * scale)) return false;
  }
  return true;
}

LatticeFn multiply(const LatticeFn& f, const LatticeFn& g) {
  require_same_lattice(f.lattice(), g.lattice());
  std::vector<double> out(f.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] * g[i];
  std::optional<double> sup;
  if (f.super_value() && g.super_value()) sup = *f.super_value() * *g.super_value();
  return LatticeFn(f.lattice(), std::move(out), f.value_at_zero() * g.value_at_zero(), sup);
}

LatticeFn axpy(double alpha, const LatticeFn& x, const LatticeFn& y) {
  require_same_lattice(x.lattice(), y.lattice());
  std::vector<double> out(x.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * x[i] + y[i];
  std::optional<double> sup;
  if (x.super_value() && y.super_value()) sup = alpha * *x.super_value() + *y.super_value();
  return LatticeFn(x.lattice(), std::move(out), alpha * x.value_at_zero() + y.value_at_zero(), sup);
}

}  // namespace qsl
