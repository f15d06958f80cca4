#include "qsl/qspecial.hpp"

#include "qsl/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace qsl {

namespace {

bool finite(double x) { return std::isfinite(x); }
bool finite(const std::complex<double>& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Sums t_0 + t_1 + ... where t_{n+1} = ratio(n) * t_n. The ratio magnitudes
// of all series here decrease monotonically, so once a ratio drops below one
// the remaining tail is bounded by a geometric series.
template <class T, class Ratio>
SeriesValue<T> sum_series(T first, Ratio ratio, const QSeriesConfig& cfg, const char* name) {
  T sum = first;
  T term = first;
  if (std::abs(term) == 0.0) return {sum, 0.0, 1};
  for (int n = 0; n + 1 < cfg.max_terms; ++n) {
    const T r = ratio(n);
    term *= r;
    sum += term;
    if (!finite(sum))
      throw ConvergenceError(std::string(name) + ": series overflowed (argument too large)");
    const double rmag = std::abs(r);
    if (rmag < 1.0 && std::abs(term) <= cfg.term_floor * std::abs(sum)) {
      const double next_ratio = std::abs(ratio(n + 1));
      const double tail = std::abs(term) * next_ratio / (1.0 - next_ratio);
      return {sum, tail, n + 2};
    }
    if (std::abs(term) == 0.0) return {sum, 0.0, n + 2};
  }
  throw ConvergenceError(std::string(name) + ": max_terms exhausted before reaching term_floor");
}

}  // namespace

template <class T>
T q_pochhammer(T z, double q, std::optional<int> n, double term_floor) {
  T prod = T(1);
  if (n) {
    if (*n < 0) throw DomainError("q_pochhammer: n must be non-negative");
    double qi = 1.0;
    for (int i = 0; i < *n; ++i, qi *= q) prod *= (T(1) - z * qi);
    return prod;
  }
  double qi = 1.0;
  for (int i = 0; i < 100000; ++i, qi *= q) {
    const T factor = z * qi;
    prod *= (T(1) - factor);
    if (std::abs(factor) < term_floor) return prod;
  }
  throw ConvergenceError("q_pochhammer: infinite product did not settle");
}

template <class T>
SeriesValue<T> q_exp_E(T z, const QSeriesConfig& cfg) {
  const double q = cfg.q;
  const T w = z * (1.0 - q);
  // t_{n+1}/t_n = q^n w / (1 - q^{n+1})
  auto ratio = [&](int n) { return w * std::pow(q, n) / (1.0 - std::pow(q, n + 1)); };
  return sum_series<T>(T(1), ratio, cfg, "q_exp_E");
}

template <class T>
SeriesValue<T> q_cos_series(T z, const QSeriesConfig& cfg) {
  const double q = cfg.q;
  const T w = z * (1.0 - q);
  const T w2 = w * w;
  // t_{n+1}/t_n = -q^{2n+1} w^2 / ((1 - q^{2n+1})(1 - q^{2n+2}))
  auto ratio = [&](int n) {
    const double a = std::pow(q, 2 * n + 1);
    return -a * w2 / ((1.0 - a) * (1.0 - a * q));
  };
  return sum_series<T>(T(1), ratio, cfg, "q_cos");
}

template <class T>
SeriesValue<T> q_sin_series(T z, const QSeriesConfig& cfg) {
  const double q = cfg.q;
  const T w = z * (1.0 - q);
  const T w2 = w * w;
  // leading term w / (q;q)_1 = z; t_{n+1}/t_n = -q^{2n+2} w^2 / ((1 - q^{2n+2})(1 - q^{2n+3}))
  auto ratio = [&](int n) {
    const double a = std::pow(q, 2 * n + 2);
    return -a * w2 / ((1.0 - a) * (1.0 - a * q));
  };
  return sum_series<T>(z, ratio, cfg, "q_sin");
}

template double q_pochhammer<double>(double, double, std::optional<int>, double);
template std::complex<double> q_pochhammer<std::complex<double>>(std::complex<double>, double,
                                                                std::optional<int>, double);
template SeriesValue<double> q_exp_E<double>(double, const QSeriesConfig&);
template SeriesValue<std::complex<double>> q_exp_E<std::complex<double>>(std::complex<double>,
                                                                       const QSeriesConfig&);
template SeriesValue<double> q_cos_series<double>(double, const QSeriesConfig&);
template SeriesValue<std::complex<double>> q_cos_series<std::complex<double>>(std::complex<double>,
                                                                            const QSeriesConfig&);
template SeriesValue<double> q_sin_series<double>(double, const QSeriesConfig&);
template SeriesValue<std::complex<double>> q_sin_series<std::complex<double>>(std::complex<double>,
                                                                            const QSeriesConfig&);

double zero_seed(TrigKind kind, double q, int n) {
  if (n < 1) throw DomainError("zero_seed: n must be >= 1");
  const double shift = kind == TrigKind::Cos ? 0.5 : 0.0;
  return std::pow(q, -n + shift) / (1.0 - q);
}

namespace {

using Wide = boost::multiprecision::cpp_bin_float_100;

// The alternating q-trig series lose about log10(w)^2 / log10(1/q) digits to
// cancellation at w = z(1-q) (the largest term sits near n = log w / log(1/q)).
// Zeros are therefore located in 100-digit arithmetic.
Wide wide_trig(TrigKind kind, const Wide& z, double qd) {
  const Wide q = qd;
  const Wide w = z * (1 - q);
  const Wide w2 = w * w;
  Wide term = kind == TrigKind::Cos ? Wide(1) : z;
  Wide sum = term;
  Wide a = kind == TrigKind::Cos ? q : q * q;  // q^{2n+1} or q^{2n+2}
  const Wide floor("1e-95");
  for (int n = 0; n < 2000; ++n) {
    term *= -a * w2 / ((1 - a) * (1 - a * q));
    sum += term;
    if (abs(term) <= floor * abs(sum) && abs(a * w2) < 1) return sum;
    if (term == 0) return sum;
    a *= q * q;
  }
  throw ConvergenceError("zeros_of: wide series did not settle");
}

}  // namespace

std::vector<double> zeros_of(TrigKind kind, double q, int count, double rel_tol) {
  if (count < 1) throw DomainError("zeros_of: count must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("zeros_of: q must lie in (0,1)");
  auto f = [&](const Wide& z) { return wide_trig(kind, z, q); };

  // For q near 1 the low zeros sit far from their asymptotic seeds (closer to
  // the classical k*pi pattern), so a monotone scan locates the sign changes.
  // The step stays well below the zero spacing, which is ~pi for small z and
  // a factor ~1/q for large z.
  const double upper = zero_seed(kind, q, count) / std::sqrt(q);
  auto step = [&](double z) { return (0.5 + z * (1.0 / q - 1.0)) / 16.0; };

  std::vector<double> zeros;
  zeros.reserve(count);
  double z0 = kind == TrigKind::Sin ? step(0.0) : 0.0;  // skip the zero of sin at the origin
  Wide f0 = f(z0);
  const Wide tol = std::max(rel_tol, 1e-18);
  while (static_cast<int>(zeros.size()) < count && z0 < upper) {
    const double z1 = z0 + step(z0);
    const Wide f1 = f(z1);
    if (f1 == 0) {
      zeros.push_back(z1);
    } else if (f0 != 0 && (f0 < 0) != (f1 < 0)) {
      Wide lo = z0, hi = z1;
      const bool lo_negative = f0 < 0;
      while (hi - lo > tol * hi) {
        const Wide mid = (lo + hi) / 2;
        const Wide fm = f(mid);
        if (fm == 0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0) == lo_negative)
          lo = mid;
        else
          hi = mid;
      }
      zeros.push_back(static_cast<double>((lo + hi) / 2));
    }
    z0 = z1;
    f0 = f1;
  }
  if (static_cast<int>(zeros.size()) < count)
    throw BracketError("zeros_of: found " + std::to_string(zeros.size()) + " of " + std::to_string(count) +
                       " zeros below " + std::to_string(upper));
  return zeros;
}

namespace {

using Mid = boost::multiprecision::cpp_bin_float_50;

struct WidePair {
  Mid c, sn;
};

// cos(sx;q) and sin(sx;q)/s as power series in lambda = s^2; both are real for
// real lambda. For lambda > 0 the series alternate, hence the 50-digit sums.
WidePair wide_pair_exact(double lambda, const Mid& x, const Mid& qm) {
  const Mid u = x * (1 - qm);
  const Mid mu = -Mid(lambda) * u * u;
  Mid c_term = 1, c_sum = 1;
  Mid s_term = x, s_sum = x;
  Mid a = qm;  // q^{2n+1}
  const Mid floor("1e-45");
  bool c_done = false, s_done = false;
  for (int n = 0; n < 2000 && !(c_done && s_done); ++n) {
    if (!c_done) {
      c_term *= a * mu / ((1 - a) * (1 - a * qm));
      c_sum += c_term;
      c_done = c_term == 0 || (abs(c_term) <= floor * abs(c_sum) && abs(a * mu) < 1);
    }
    if (!s_done) {
      const Mid b = a * qm;  // q^{2n+2}
      s_term *= b * mu / ((1 - b) * (1 - b * qm));
      s_sum += s_term;
      s_done = s_term == 0 || (abs(s_term) <= floor * abs(s_sum) && abs(b * mu) < 1);
    }
    a *= qm * qm;
  }
  if (!(c_done && s_done)) throw ConvergenceError("trig_pair: series did not settle");
  return {c_sum, s_sum};
}

double to_double(const Mid& x, const char* what) {
  const double d = static_cast<double>(x);
  if (!std::isfinite(d)) throw OverflowError(std::string(what) + ": value out of double range");
  return d;
}

}  // namespace

TrigPair trig_pair(double lambda, double x, double q) {
  const WidePair p = wide_pair_exact(lambda, Mid(x), Mid(q));
  return {to_double(p.c, "trig_pair"), to_double(p.sn, "trig_pair")};
}

LatticeTrig lattice_trig(double lambda, double q, double a, int first, int last) {
  if (last < first) throw DomainError("lattice_trig: empty index range");
  // The points a q^n are formed in 50 digits: S_q(x, x/q) is tiny next to
  // the products it cancels, so rounding x/q to double would swamp it.
  const Mid qm = q;
  std::vector<WidePair> p;
  p.reserve(static_cast<std::size_t>(last - first + 1));
  for (int n = first; n <= last; ++n) p.push_back(wide_pair_exact(lambda, Mid(a) * pow(qm, n), qm));
  const auto size = static_cast<Eigen::Index>(p.size());
  LatticeTrig out{Eigen::VectorXd(size), Eigen::VectorXd(size), Eigen::MatrixXd(size, size)};
  for (Eigen::Index i = 0; i < size; ++i) {
    out.cos(i) = to_double(p[i].c, "lattice_trig");
    out.sin_over_s(i) = to_double(p[i].sn, "lattice_trig");
    out.kernel(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = to_double(p[i].sn * p[j].c - p[i].c * p[j].sn, "lattice_trig");
      out.kernel(i, j) = v;
      out.kernel(j, i) = -v;
    }
  }
  return out;
}

}  // namespace qsl
