#include "qsl/spectral.hpp"

#include "qsl/errors.hpp"
#include "qsl/qspecial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsl {

double char_delta(const ProblemSpec& spec, double lambda) {
  const IVPSolution sol = phi_with_bc(spec, lambda);
  return -sol.slope_at_a - spec.H * sol.phi[0];
}

double CharacteristicFn::operator()(double lambda) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
  }
  const double d = char_delta(spec_, lambda);
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(lambda, d);
  return d;
}

std::size_t CharacteristicFn::cache_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.size();
}

double lambda_seed(double q, double a, int n) {
  const double s = std::pow(q, -n + 0.5) / (a * (1.0 - q));
  return s * s;
}

namespace {

bool sign_differs(double x, double y) { return (x < 0.0) != (y < 0.0); }

double bisect(const CharacteristicFn& delta, double lo, double hi, double flo, double rel_tol) {
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= rel_tol * std::max(std::abs(mid), 1.0)) break;
    const double fm = delta(mid);
    if (fm == 0.0) return mid;
    if (sign_differs(fm, flo)) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> find_eigenvalues(const ProblemSpec& spec, int count, const EigenSearchOptions& opt) {
  if (count < 0) throw DomainError("find_eigenvalues: count must be non-negative");
  std::vector<double> roots;
  if (count == 0) return roots;
  const double q = spec.lattice.q();
  const double a = spec.lattice.a();
  CharacteristicFn delta(spec);

  // Delta < 0 as lambda -> -inf (phi grows through a); push the left end
  // out until it is.
  const double seed1 = lambda_seed(q, a, 1);
  double left = -seed1;
  for (int i = 0; delta(left) >= 0.0; ++i) {
    if (i > 40) throw BracketError("find_eigenvalues: Delta never negative on the negative axis");
    left *= 4.0;
  }
  std::vector<double> grid;
  const int ns = std::max(opt.negative_samples, 2);
  const double ratio = std::pow(1e-12, 1.0 / (ns - 1));  // |lambda| from |left| down to 1e-12 |left|
  double mag = -left;
  for (int i = 0; i < ns; ++i, mag *= ratio) grid.push_back(-mag);
  grid.push_back(0.0);

  // Positive side in z = s a / sqrt(q), the variable in which the free
  // eigenvalues are the zeros y_n of sin(z;q).
  const double cap = lambda_seed(q, a, count + 4);
  auto step = [&](double z) { return (0.5 + z * (1.0 / q - 1.0)) / opt.scan_refine; };

  auto scan_pair = [&](double l0, double l1) {
    const double f0 = delta(l0), f1 = delta(l1);
    if (f0 == 0.0) {
      if (roots.empty() || roots.back() != l0) roots.push_back(l0);
    } else if (f1 != 0.0 && sign_differs(f0, f1)) {
      roots.push_back(bisect(delta, l0, l1, f0, opt.rel_tol));
    }
  };
  for (std::size_t i = 0; i + 1 < grid.size() && static_cast<int>(roots.size()) < count; ++i)
    scan_pair(grid[i], grid[i + 1]);
  double z = 0.0;
  while (static_cast<int>(roots.size()) < count) {
    const double z1 = z + step(z);
    const double l0 = q * z * z / (a * a), l1 = q * z1 * z1 / (a * a);
    if (l0 > cap) {
      std::ostringstream os;
      os << "find_eigenvalues: found " << roots.size() << " of " << count << " eigenvalues below "
         << cap << "; last window [" << l0 << ", " << l1 << "]";
      throw BracketError(os.str());
    }
    scan_pair(l0, l1);
    z = z1;
  }
  if (delta(0.0) == 0.0 && std::count(roots.begin(), roots.end(), 0.0) > 1)
    throw BracketError("find_eigenvalues: duplicate root at zero");
  roots.resize(count);
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (!(roots[i] > roots[i - 1]))
      throw BracketError("find_eigenvalues: roots not strictly increasing near " + std::to_string(roots[i]));
  return roots;
}

namespace {

void require_root(const ProblemSpec& spec, double lambda) {
  const double d0 = char_delta(spec, lambda);
  if (d0 == 0.0) return;
  const double delta = 1e-9 * std::max(std::abs(lambda), 1.0);
  const double dl = char_delta(spec, lambda - delta), dr = char_delta(spec, lambda + delta);
  if (!sign_differs(dl, dr) && dl != 0.0 && dr != 0.0)
    throw DomainError("lambda = " + std::to_string(lambda) + " is not a root of Delta");
}

}  // namespace

double norming_by_quadrature(const ProblemSpec& spec, double lambda_n) {
  require_root(spec, lambda_n);
  const IVPSolution ef = eigenfunction(spec, lambda_n);
  return jackson_integral(multiply(ef.phi, ef.phi)).value;
}

double norming_by_derivative(const ProblemSpec& spec, double lambda_n) {
  const double delta = 1e-6 * std::max(std::abs(lambda_n), 1.0);
  const double slope =
      (char_delta(spec, lambda_n + delta) - char_delta(spec, lambda_n - delta)) / (2.0 * delta);
  if (std::abs(slope) < 1e-12) throw ConvergenceError("Delta' vanishes at a root: degenerate eigenvalue");
  return eigenfunction(spec, lambda_n).phi[0] * slope;
}

SpectralData compute_spectral_data(const ProblemSpec& spec, int count, const EigenSearchOptions& opt) {
  SpectralData d;
  d.eigenvalues = find_eigenvalues(spec, count, opt);
  for (double l : d.eigenvalues) {
    const IVPSolution ef = eigenfunction(spec, l);
    d.normings.push_back(jackson_integral(multiply(ef.phi, ef.phi)).value);
    d.endpoint_values.push_back(ef.phi[0]);
  }
  return d;
}

double hadamard_delta(const std::vector<double>& eigenvalues, double q, double a, double lambda,
                      int truncation) {
  if (eigenvalues.empty()) throw DomainError("hadamard_delta: needs lambda_0");
  const int supplied = static_cast<int>(eigenvalues.size());
  if (truncation != 0 && truncation < supplied)
    throw DomainError("hadamard_delta: truncation below the number of supplied eigenvalues");
  // Zeros of sin(z;q) are computed exactly while the 100-digit series still
  // resolves them; past that point the seed q^{-n}/(1-q) is exact to far
  // beyond double precision.
  const int exact = std::max(2, static_cast<int>(std::sqrt(70.0 / std::log10(1.0 / q))));
  const int want = truncation != 0 ? truncation : std::max(supplied, exact) + 1;
  const std::vector<double> y = zeros_of(TrigKind::Sin, q, std::min(want, exact));
  auto zero = [&](int n) {
    return n <= static_cast<int>(y.size()) ? y[n - 1] : zero_seed(TrigKind::Sin, q, n);
  };
  // Sign flipped against the product as usually written so that it matches
  // char_delta, which is negative as lambda -> -inf.
  double prod = a * (lambda - eigenvalues[0]);
  for (int n = 1;; ++n) {
    const double yn = zero(n);
    const double scale = q * yn * yn / (a * a);
    if (truncation != 0 && n >= truncation) break;
    const double ln = n < supplied ? eigenvalues[n] : scale;
    const double factor = (ln - lambda) / scale;
    prod *= factor;
    if (truncation == 0 && n >= supplied && std::abs(lambda / scale) < 1e-17) break;
    if (n > 100000) throw ConvergenceError("hadamard_delta: product did not settle");
  }
  return prod;
}

double asymptotic_delta(double q, double a, double lambda) {
  const double z = a / std::sqrt(q);
  return std::sqrt(q) * lambda * trig_pair(lambda, z, q).sin_over_s;
}

std::vector<double> parseval_partials(const ProblemSpec& spec, const SpectralData& data, const LatticeFn& f) {
  if (data.count() == 0) throw DomainError("parseval: needs at least one eigenpair");
  double r = inner_product(f, f);
  std::vector<double> out;
  for (std::size_t n = 0; n < data.count(); ++n) {
    const IVPSolution ef = eigenfunction(spec, data.eigenvalues[n]);
    const double c = inner_product(f, ef.phi);
    r -= c * c / data.normings[n];
    out.push_back(r);
  }
  return out;
}

double parseval_residual(const ProblemSpec& spec, const SpectralData& data, const LatticeFn& f) {
  return parseval_partials(spec, data, f).back();
}

}  // namespace qsl
