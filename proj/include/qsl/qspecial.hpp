#pragma once

// q-shifted factorial, Jackson's q-exponential E_q and the q-cosine/q-sine
// pair, evaluated by truncated power series, plus a locator for the positive
// zeros of the q-trigonometric functions.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace qsl {

struct QSeriesConfig {
  double q = 0.5;
  int max_terms = 200;
  double term_floor = 1e-18;  // relative to the partial sum
};

template <class T>
struct SeriesValue {
  T value;
  double tail_bound;
  int terms;
};

// (z; q)_n = prod_{i<n} (1 - z q^i). n = nullopt requests the infinite
// product, truncated once |z q^i| < term_floor.
template <class T>
T q_pochhammer(T z, double q, std::optional<int> n, double term_floor = 1e-18);

// E_q(z) = sum q^{n(n-1)/2} (z(1-q))^n / (q;q)_n.
template <class T>
SeriesValue<T> q_exp_E(T z, const QSeriesConfig& cfg);

template <class T>
SeriesValue<T> q_cos_series(T z, const QSeriesConfig& cfg);
template <class T>
SeriesValue<T> q_sin_series(T z, const QSeriesConfig& cfg);

// cos(z; q) = sum (-1)^n q^{n^2} (z(1-q))^{2n} / (q;q)_{2n}
template <class T>
T q_cos(T z, const QSeriesConfig& cfg) {
  return q_cos_series(z, cfg).value;
}

// sin(z; q) = sum (-1)^n q^{n^2+n} (z(1-q))^{2n+1} / (q;q)_{2n+1}
template <class T>
T q_sin(T z, const QSeriesConfig& cfg) {
  return q_sin_series(z, cfg).value;
}

enum class TrigKind { Cos, Sin };

// Large-n location of the n-th positive zero (n >= 1):
// cos: q^{-n+1/2}/(1-q), sin: q^{-n}/(1-q).
double zero_seed(TrigKind kind, double q, int n);

// First `count` positive zeros in increasing order, each refined by bisection
// on a verified sign change (evaluated in extended precision). Throws
// BracketError when fewer than `count` sign changes are found below the last
// seed window.
std::vector<double> zeros_of(TrigKind kind, double q, int count, double rel_tol = 1e-17);

// cos(sx;q) and sin(sx;q)/s for s = sqrt(lambda), any real lambda (imaginary
// s for lambda < 0). Accurate to double precision for large s*x, where the
// plain double series cancel.
struct TrigPair {
  double cos;
  double sin_over_s;
};
TrigPair trig_pair(double lambda, double x, double q);

// cos(s x;q), sin(s x;q)/s and S_q(x_i, x_j)/s on the lattice points a q^n,
// first <= n <= last (row/column i is n = first + i). Everything is formed in
// extended precision; the kernel entries cancel heavily for large s.
struct LatticeTrig {
  Eigen::VectorXd cos;
  Eigen::VectorXd sin_over_s;
  Eigen::MatrixXd kernel;
};
LatticeTrig lattice_trig(double lambda, double q, double a, int first, int last);

extern template double q_pochhammer<double>(double, double, std::optional<int>, double);
extern template std::complex<double> q_pochhammer<std::complex<double>>(std::complex<double>, double,
                                                                       std::optional<int>, double);
extern template SeriesValue<double> q_exp_E<double>(double, const QSeriesConfig&);
extern template SeriesValue<std::complex<double>> q_exp_E<std::complex<double>>(std::complex<double>,
                                                                              const QSeriesConfig&);
extern template SeriesValue<double> q_cos_series<double>(double, const QSeriesConfig&);
extern template SeriesValue<std::complex<double>> q_cos_series<std::complex<double>>(std::complex<double>,
                                                                                   const QSeriesConfig&);
extern template SeriesValue<double> q_sin_series<double>(double, const QSeriesConfig&);
extern template SeriesValue<std::complex<double>> q_sin_series<std::complex<double>>(std::complex<double>,
                                                                                   const QSeriesConfig&);

}  // namespace qsl
