// Acceptance runner: one [PASS]/[FAIL] line per criterion, nonzero exit if any fails.

#include "qsl/cli.hpp"
#include "qsl/errors.hpp"
#include "qsl/harness.hpp"
#include "qsl/qspecial.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qsl;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

const double kQs[] = {0.3, 0.5, 0.8};

std::string fmt(const char* f, double x) {
  char b[64];
  std::snprintf(b, sizeof b, f, x);
  return b;
}

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// --- 1 ---------------------------------------------------------------------
Outcome q_calculus() {
  double worst = 0.0;
  for (double q : kQs) {
    QLattice lat(q, 1.0, depth_for_tail(q));
    for (int k = 0; k <= 5; ++k) {
      const auto f = LatticeFn::sample(lat, [k](double x) { return std::pow(x, k); }, true);
      // int_0^1 t^k d_q t = (1-q)/(1-q^{k+1})
      worst = std::max(worst, rel(jackson_integral(f).value, (1 - q) / (1 - std::pow(q, k + 1))));
      if (k == 0) continue;
      const double qk = (1 - std::pow(q, k)) / (1 - q);
      for (int n = 0; n < 30; ++n) {
        const double x = lat.point(n);
        worst = std::max(worst, rel(dq(f, n), qk * std::pow(x, k - 1)));
        worst = std::max(worst, rel(dq_inv(f, n), qk * std::pow(x / q, k - 1)));
      }
    }
    // int_0^x D_q f = f(x) - f(0) and integration by parts
    // int_0^a g(qt) D_q f(t) = f(a)g(a) - f(0)g(0) - int_0^a f D_q g
    const auto f = LatticeFn::sample(lat, [](double x) { return 1 + x + x * x * x; });
    const auto g = LatticeFn::sample(lat, [](double x) { return 2 - x * x; });
    std::vector<double> df(lat.size()), dg(lat.size()), gq(lat.size());
    for (int n = 0; n < lat.depth(); ++n) {
      df[n] = dq(f, n);
      dg[n] = dq(g, n);
      gq[n] = g[n + 1];
    }
    df[lat.depth()] = 1.0;
    dg[lat.depth()] = 0.0;
    gq[lat.depth()] = 2.0;
    const LatticeFn Df(lat, df, 1.0), Dg(lat, dg, 0.0), Gq(lat, gq, 2.0);
    const auto cum = jackson_cumulative(Df);
    // relative truncation of the lattice tail is q^{depth-m+1}; stay where it is negligible
    for (int m = 0; std::pow(q, lat.depth() - m + 1) < 1e-14; ++m) worst = std::max(worst, rel(cum[m], f[m] - 1.0));
    const double lhs = inner_product(Gq, Df);
    const double rhs = f[0] * g[0] - 1.0 * 2.0 - inner_product(f, Dg);
    worst = std::max(worst, std::abs(lhs - rhs) / (std::abs(f[0] * g[0]) + 2.0));
  }
  return {worst <= 1e-12, "max relative error " + fmt("%.2e", worst)};
}

// --- 2 ---------------------------------------------------------------------
bool geometric_decay(const std::vector<double>& dev, double q, int first) {
  const double floor = 1e-14;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const int n = first + static_cast<int>(i);
    if (dev[i] > std::pow(q, n)) return false;
    if (i > 0 && dev[i - 1] > floor && !(dev[i] < dev[i - 1])) return false;
    if (i > 0 && dev[i - 1] <= floor && dev[i] > floor) return false;
  }
  return true;
}

Outcome zero_asymptotics() {
  bool ok = true;
  std::ostringstream d;
  for (double q : kQs) {
    const auto y = zeros_of(TrigKind::Sin, q, 10);
    const auto x = zeros_of(TrigKind::Cos, q, 10);
    std::vector<double> dy, dx;
    for (int n = 3; n <= 10; ++n) {
      dy.push_back(std::abs(y[n - 1] * (1 - q) * std::pow(q, n) - 1));
      dx.push_back(std::abs(x[n - 1] * (1 - q) * std::pow(q, n - 0.5) - 1));
    }
    const bool k = geometric_decay(dy, q, 3) && geometric_decay(dx, q, 3);
    ok = ok && k;
    d << "q=" << q << (k ? " ok" : " BAD") << " (n=3: " << fmt("%.1e", dy[0]) << "/" << fmt("%.1e", dx[0]) << ") ";
  }
  return {ok, d.str()};
}

// --- 3 ---------------------------------------------------------------------
Outcome dual_solvers() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QLattice lat(0.5, 1.0, 48);
  double worst = 0.0, worst_res = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double c0 = 2 * u(rng), c1 = 2 * u(rng), c2 = u(rng), w = 1 + 4 * std::abs(u(rng));
    const auto v = LatticeFn::sample(lat, [=](double x) { return c0 + c1 * x + c2 * std::sin(w * x); });
    const ProblemSpec spec(lat, v, u(rng), 0.0);
    for (double lambda : {-10.0, 0.25, 1.0, 7.0, 50.0}) {
      const auto m = solve_ivp_march(spec, lambda, 1.0, spec.h);
      const auto s = solve_ivp_series(spec, lambda, 1.0, spec.h);
      double d = 0.0;
      for (std::size_t n = 0; n < lat.size(); ++n) d = std::max(d, std::abs(m.phi[n] - s.phi[n]));
      worst = std::max(worst, d / m.phi.max_abs());
      worst_res = std::max({worst_res, m.max_residual, functional_residual(spec, s.phi, lambda)});
    }
  }
  return {worst <= 1e-8 && worst_res <= 1e-9,
          "100 cases, max rel disagreement " + fmt("%.2e", worst) + ", max residual " + fmt("%.2e", worst_res)};
}

// --- 4 ---------------------------------------------------------------------
Outcome eigen_pipeline() {
  bool ok = true;
  double worst_ratio = 0.0, worst_shift = 0.0;
  for (double q : kQs) {
    QLattice lat(q, 1.0, depth_for_tail(q));
    const auto free = ProblemSpec::free(lat);
    const auto e = find_eigenvalues(free, 10);
    if (e.size() != 10) return {false, "fewer than 10 eigenvalues"};
    for (int n = 1; n < 10; ++n) {
      // s_n a (1-q) q^{n-1/2} -> 1 within O(q^{n/2})
      const double r = std::abs(std::sqrt(e[n]) * (1 - q) * std::pow(q, n - 0.5) - 1);
      worst_ratio = std::max(worst_ratio, r / std::pow(q, n / 2.0));
    }
    const ProblemSpec shifted(lat, LatticeFn::constant(lat, 0.01), 0.0, 0.0);
    const auto es = find_eigenvalues(shifted, 10);
    for (int n = 0; n < 10; ++n)
      worst_shift = std::max(worst_shift, std::abs(es[n] - e[n] - 0.01) / std::max(1.0, std::abs(e[n])));
  }
  // ratio / q^{n/2} must stay bounded; 10 is a generous constant
  ok = worst_ratio <= 10.0 && worst_shift <= 1e-9;
  return {ok, "max |ratio-1|/q^(n/2) " + fmt("%.2e", worst_ratio) + ", shift error " + fmt("%.2e", worst_shift)};
}

// --- 5 ---------------------------------------------------------------------
Outcome norming_duality() {
  double worst = 0.0;
  for (double q : kQs) {
    QLattice lat(q, 1.0, depth_for_tail(q));
    const auto pert = LatticeFn::sample(lat, [](double x) { return 0.3 * x + 0.5 * x * x; });
    for (const auto& spec : {ProblemSpec::free(lat), ProblemSpec(lat, pert, 0.2, 0.5)}) {
      for (double l : find_eigenvalues(spec, 8))
        worst = std::max(worst, rel(norming_by_derivative(spec, l), norming_by_quadrature(spec, l)));
    }
  }
  return {worst <= 1e-6, "max relative disagreement " + fmt("%.2e", worst)};
}

// --- 6 ---------------------------------------------------------------------
Outcome hadamard() {
  double worst = 0.0;
  for (double q : kQs) {
    QLattice lat(q, 1.0, depth_for_tail(q));
    const auto free = ProblemSpec::free(lat);
    const auto e = find_eigenvalues(free, 12);
    for (int k = 0; k < 10; ++k) {
      const double l = k == 0 ? -1.5 : 0.5 * (e[k] + e[k + 1]);
      worst = std::max(worst, rel(hadamard_delta(e, q, 1.0, l), char_delta(free, l)));
    }
  }
  return {worst <= 1e-3, "max relative error " + fmt("%.2e", worst)};
}

// --- 7 ---------------------------------------------------------------------
Outcome gl_identity() {
  double worst = 0.0;
  for (double q : kQs) {
    QLattice lat(q, 1.0, depth_for_tail(q));
    const ProblemSpec base(lat, LatticeFn::sample(lat, [](double x) { return x; }), 0.3, 0.7);
    const auto data = compute_spectral_data(base, 6);
    const auto T = gl_transform(GLCoefficients(std::vector<double>(6, 0.0), data), base);
    worst = std::max(worst, T.kernel.K.cwiseAbs().maxCoeff());
    for (std::size_t n = 0; n < lat.size(); ++n) worst = std::max(worst, std::abs(T.potential.v[n] - base.v[n]));
    worst = std::max({worst, std::abs(T.h - base.h), std::abs(T.H - base.H)});
  }
  return {worst <= 1e-12, "max deviation " + fmt("%.2e", worst)};
}

// --- 8 ---------------------------------------------------------------------
Outcome gl_single_mode() {
  QLattice lat(0.5, 1.0, 48);
  const auto base = ProblemSpec::free(lat);
  const auto data = compute_spectral_data(base, 6);
  const double c0 = 0.1;
  const GLCoefficients coeffs({c0}, data);
  const auto T = gl_transform(coeffs, base);
  const auto R = rank_one_kernel(c0, eigenfunction(base, data.eigenvalues[0]).phi);
  double kdiff = 0.0;
  for (Eigen::Index i = 0; i < T.kernel.K.rows(); ++i)
    for (Eigen::Index j = i + 1; j < T.kernel.K.cols(); ++j)
      kdiff = std::max(kdiff, std::abs(T.kernel.K(i, j) - R.K(i, j)));
  const auto o1 = reconstruct_v_oracle(T.kernel, base, 1.0);
  const auto o2 = reconstruct_v_oracle(T.kernel, base, 2.0);
  double vdiff = 0.0, pdiff = 0.0;
  for (int n = 0; n < lat.depth() && lat.point(n) >= 1e-4; ++n) {
    vdiff = std::max(vdiff, std::abs(T.potential.v[n] - o1.v[n]));
    pdiff = std::max(pdiff, std::abs(o1.v[n] - o2.v[n]));
  }
  const bool ok = kdiff <= 1e-10 && vdiff <= 1e-6 && pdiff <= 1e-7;
  return {ok, "rank-1 " + fmt("%.2e", kdiff) + ", v vs oracle " + fmt("%.2e", vdiff) + ", probes " +
                  fmt("%.2e", pdiff) + ", diagonal defect " + fmt("%.2e", T.kernel.diagonal_defect)};
}

// --- 9 ---------------------------------------------------------------------
Outcome isospectral_roundtrip() {
  QLattice lat(0.5, 1.0, 48);
  const auto base = ProblemSpec::free(lat);
  const auto data = compute_spectral_data(base, 9);
  double el = 0.0, ea = 0.0, ec = 0.0;
  bool ok = true;
  std::string errs;
  for (const auto& c : {std::vector<double>{0.1}, std::vector<double>{0.05, -0.02}}) {
    const auto r = levinson_marchenko_roundtrip(base, GLCoefficients(c, data));
    for (double d : r.eigenvalue_deviation) el = std::max(el, d);
    for (double d : r.norming_deviation) ea = std::max(ea, d);
    ec = std::max(ec, r.coefficient_deviation);
    const bool good = r.passes.count("eigenvalues") && r.passes.at("eigenvalues") && r.passes.at("normings") &&
                      r.passes.count("coefficients") && r.passes.at("coefficients");
    ok = ok && good;
    if (!r.errors.empty()) errs = r.errors.front();
  }
  std::string d = "eigenvalues " + fmt("%.2e", el) + ", normings " + fmt("%.2e", ea) + ", c' " + fmt("%.2e", ec);
  if (!errs.empty()) d += " [" + errs + "]";
  return {ok, d};
}

// --- 10 --------------------------------------------------------------------
Outcome ashrafyan() {
  QLattice lat(0.5, 1.0, 48);
  const auto base = ProblemSpec::free(lat, 0.2, 0.4);
  const auto data = compute_spectral_data(base, 6);
  const auto eq = ashrafyan_check(base, data, data.normings);
  auto t = data.normings;
  t[0] *= 1.1;
  const auto strict = ashrafyan_check(base, data, t);
  const bool strict_ok = strict.mechanism_flag && strict.h > base.h && strict.coefficient_sum < 0.0;
  // exhaustive over sign patterns of finite-support sequences
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 0.0);
  bool only_zero = true;
  for (int trial = 0; trial < 20000; ++trial) {
    std::vector<double> c(1 + trial % 8);
    for (auto& x : c) x = (rng() & 1) ? 0.0 : u(rng) * std::pow(10.0, -static_cast<int>(rng() % 300));
    const bool zero = std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
    if (in_ashrafyan_set(c) != zero) only_zero = false;
  }
  const bool ok = eq.passed() && eq.potential_deviation == 0.0 && eq.H_deviation == 0.0 && strict_ok && only_zero;
  return {ok, std::string("equality ") + (eq.passed() ? "passes" : "fails") + ", strict case h-h0 = " +
                  fmt("%.3e", strict.h - base.h) + ", set check " + (only_zero ? "only zero" : "BAD")};
}

// --- 11 --------------------------------------------------------------------
Outcome parseval() {
  bool ok = true;
  double worst = 0.0;
  for (double q : kQs) {
    QLattice lat(q, 1.0, depth_for_tail(q));
    const auto free = ProblemSpec::free(lat);
    const auto d = compute_spectral_data(free, 12);
    const auto one = LatticeFn::constant(lat, 1.0);
    const auto p = parseval_partials(free, d, one);
    const double norm2 = inner_product(one, one);
    for (std::size_t k = 1; k < p.size(); ++k)
      if (p[k] > p[k - 1] + 1e-14 * norm2) ok = false;
    worst = std::max(worst, p.back() / norm2);
  }
  return {ok && worst <= 0.02, "residual fraction " + fmt("%.2e", worst) + (ok ? ", monotone" : ", NOT monotone")};
}

// --- 12 --------------------------------------------------------------------
int shell(const std::string& cmd) {
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome cli_contract() {
  const std::string cli = QSL_CLI_PATH;
  const std::string dir = QSL_TEST_TMP;
  auto cfg = [&](const std::string& name, const std::string& text) {
    const std::string p = dir + "/acc_" + name + ".json";
    std::ofstream(p) << text;
    return p;
  };
  bool same = true;
  const std::pair<const char*, std::string> runs[] = {
      {"spectrum", cfg("spec", R"({"eigen":{"count":6},"potential":{"preset":"linear","slope":0.3}})")},
      {"reconstruct", cfg("rec", R"({"gl":{"coefficients":[0.1]},"eigen":{"count":4}})")},
      {"roundtrip", cfg("rt", R"({"roundtrip":{"mode":"ashrafyan"},"gl":{"norming_factors":[1.1,1]}})")},
  };
  for (const auto& [cmd, path] : runs) {
    const std::string o1 = dir + "/acc_out1.json", o2 = dir + "/acc_out2.json";
    if (shell(cli + " " + cmd + " --config " + path + " --out " + o1) != 0) return {false, std::string(cmd) + " failed"};
    if (shell(cli + " " + cmd + " --config " + path + " --out " + o2) != 0) return {false, std::string(cmd) + " failed"};
    const auto a = slurp(o1);
    same = same && !a.empty() && a == slurp(o2);
  }
  const std::string quiet = " >/dev/null 2>&1";
  const int c1 = shell(cli + " spectrum --config " + cfg("bad", R"({"potential":{"preset":"zero","value":1}})") + quiet);
  const int c2 = shell(cli + " direct --config " + cfg("ovf", R"({"direct":{"lambdas":[-1e300]}})") + quiet);
  const int c3 = shell(cli + " reconstruct --config " + cfg("adm", R"({"gl":{"coefficients":[0,-1000]}})") + quiet);
  const bool codes = c1 == 1 && c2 == 2 && c3 == 3;
  return {same && codes, std::string(same ? "byte-identical reruns" : "outputs DIFFER") + ", exit codes " +
                             std::to_string(c1) + "/" + std::to_string(c2) + "/" + std::to_string(c3) +
                             " (want 1/2/3)"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"q-calculus exactness", q_calculus},
      {"q-trig zero asymptotics", zero_asymptotics},
      {"dual direct solvers", dual_solvers},
      {"eigenvalue pipeline", eigen_pipeline},
      {"norming duality", norming_duality},
      {"Hadamard product", hadamard},
      {"GL identity case", gl_identity},
      {"GL single-mode closed form", gl_single_mode},
      {"isospectrality round trip", isospectral_roundtrip},
      {"monotone-norming mechanism", ashrafyan},
      {"Parseval residual", parseval},
      {"CLI determinism and exit codes", cli_contract},
  };
  int failed = 0, idx = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [name, fn] : criteria) {
    ++idx;
    Outcome o;
    const auto t = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    std::printf("[%s] %2d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of %d criteria passed in %.1fs\n", idx - failed, idx, total);
  return failed == 0 ? 0 : 1;
}
