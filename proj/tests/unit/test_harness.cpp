#include <doctest.h>

#include "qsl/harness.hpp"

#include <random>

using namespace qsl;

namespace {

struct Base {
  QLattice lat{0.5, 1.0, 48};
  ProblemSpec spec = ProblemSpec::free(lat);
  SpectralData data = compute_spectral_data(spec, 6);
};

}  // namespace

TEST_CASE("digest is stable and sensitive") {
  Base b;
  CHECK(problem_digest(b.spec) == problem_digest(ProblemSpec::free(b.lat)));
  CHECK(problem_digest(b.spec) != problem_digest(ProblemSpec::free(b.lat, 0.1, 0.0)));
  CHECK(problem_digest(b.spec).size() == 16);
}

TEST_CASE("identity round trip passes exactly") {
  Base b;
  const auto r = levinson_marchenko_roundtrip(b.spec, GLCoefficients({0, 0, 0}, b.data));
  CHECK(r.passed());
  CHECK(r.potential_deviation == 0.0);
  CHECK(r.h_deviation == 0.0);
  CHECK(r.H_deviation == 0.0);
  for (double d : r.eigenvalue_deviation) CHECK(d <= 1e-12);
  CHECK(r.coefficient_deviation <= 1e-12);
}

TEST_CASE("inadmissible coefficients are reported, not thrown") {
  Base b;
  const auto r = levinson_marchenko_roundtrip(b.spec, GLCoefficients({-5.0 / b.data.normings[0]}, b.data));
  CHECK_FALSE(r.passed());
  CHECK_FALSE(r.passes.at("admissible"));
}

TEST_CASE("monotone-norming argument") {
  Base b;
  const auto eq = ashrafyan_check(b.spec, b.data, b.data.normings);
  CHECK(eq.passed());
  CHECK_FALSE(eq.mechanism_flag);
  CHECK(eq.potential_deviation == 0.0);

  auto t = b.data.normings;
  t[0] *= 1.1;
  const auto strict = ashrafyan_check(b.spec, b.data, t);
  CHECK(strict.mechanism_flag);
  CHECK(strict.coefficient_sum < 0.0);
  CHECK(strict.h > b.spec.h);

  auto mixed = b.data.normings;
  mixed[0] *= 1.1;
  mixed[1] *= 0.9;
  const auto rej = ashrafyan_check(b.spec, b.data, mixed);
  CHECK_FALSE(rej.passes.at("hypothesis"));
  CHECK_FALSE(rej.errors.empty());
}

TEST_CASE("the set {c <= 0, sum c = 0} holds only zero") {
  CHECK(in_ashrafyan_set({0.0, 0.0}));
  CHECK(in_ashrafyan_set({}));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 0.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> c(1 + trial % 8);
    for (auto& x : c) x = (rng() % 3 == 0) ? 0.0 : u(rng);
    const bool zero = std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
    CHECK(in_ashrafyan_set(c) == zero);
  }
  CHECK_FALSE(in_ashrafyan_set({0.1, -0.1}));
}

TEST_CASE("family bookkeeping") {
  Base b;
  CHECK(isospectral_family(b.spec, {}).empty());
  const auto fam = isospectral_family(b.spec, {GLCoefficients({0.0}, b.data), GLCoefficients({0.05}, b.data)});
  REQUIRE(fam.size() == 2);
  CHECK(fam[0].isospectral);
  CHECK(fam[0].potential_distance == 0.0);
  CHECK(fam[1].coefficients == std::vector<double>{0.05});
  CHECK(fam[1].potential_distance > 0.0);
}
