#pragma once

// Characteristic determinant, eigenvalues, norming constants (quadrature and
// derivative formulas), the Hadamard product for Delta and Parseval sums.

#include "qsl/direct.hpp"

#include <map>
#include <mutex>
#include <vector>

namespace qsl {

struct SpectralData {
  std::vector<double> eigenvalues;      // strictly increasing
  std::vector<double> normings;         // alpha_n = int_0^a phi(x, lambda_n)^2 d_q x
  std::vector<double> endpoint_values;  // phi(a, lambda_n)
  std::size_t count() const noexcept { return eigenvalues.size(); }
};

// Delta(lambda) = -D_{q^{-1}} phi(a, lambda) - H phi(a, lambda).
double char_delta(const ProblemSpec& spec, double lambda);

// Delta with a memo of evaluated points; safe to share between threads.
class CharacteristicFn {
 public:
  explicit CharacteristicFn(ProblemSpec spec) : spec_(std::move(spec)) {}
  double operator()(double lambda) const;
  const ProblemSpec& spec() const noexcept { return spec_; }
  std::size_t cache_size() const;

 private:
  ProblemSpec spec_;
  mutable std::mutex mu_;
  mutable std::map<double, double> cache_;
};

// (q^{-n+1/2} / (a(1-q)))^2
double lambda_seed(double q, double a, int n);

struct EigenSearchOptions {
  double rel_tol = 1e-15;   // bisection stops at this relative width (or at machine resolution)
  int scan_refine = 16;     // samples per zero spacing in the positive scan
  int negative_samples = 64;
};

// The first `count` eigenvalues, in increasing order. Throws BracketError if
// the scan does not produce `count` sign changes below a generous cap.
std::vector<double> find_eigenvalues(const ProblemSpec& spec, int count,
                                     const EigenSearchOptions& opt = {});

// alpha_n by Jackson quadrature of phi^2. Throws DomainError when Delta does
// not change sign across lambda_n.
double norming_by_quadrature(const ProblemSpec& spec, double lambda_n);

// alpha_n = phi(a, lambda_n) * Delta'(lambda_n), Delta' by central difference.
double norming_by_derivative(const ProblemSpec& spec, double lambda_n);

SpectralData compute_spectral_data(const ProblemSpec& spec, int count,
                                   const EigenSearchOptions& opt = {});

// Delta(lambda) = a (lambda - lambda_0) prod_{n>=1} (lambda_n - lambda) / (q y_n^2 / a^2),
// with lambda_n = q y_n^2 / a^2 beyond the supplied eigenvalues. truncation is
// the number of factors (including lambda_0); 0 selects it automatically so
// the omitted tail is below 1e-17 relative.
double hadamard_delta(const std::vector<double>& eigenvalues, double q, double a, double lambda,
                      int truncation = 0);

// s sqrt(q) sin(s a / sqrt(q); q), the lambda -> -inf form of Delta.
double asymptotic_delta(double q, double a, double lambda);

// ||f||^2 - sum_{n<k} <f, phi_n>^2 / alpha_n for k = 1..count.
std::vector<double> parseval_partials(const ProblemSpec& spec, const SpectralData& data,
                                      const LatticeFn& f);
double parseval_residual(const ProblemSpec& spec, const SpectralData& data, const LatticeFn& f);

}  // namespace qsl
