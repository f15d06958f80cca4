#pragma once

// Round-trip reconstruction experiments and the monotone-norming argument,
// reported as residuals and pass flags. Nothing here throws on a failed
// experiment; stage errors are recorded in the report.

#include "qsl/gl.hpp"

#include <map>
#include <string>
#include <vector>

namespace qsl {

struct HarnessTolerances {
  double eigen_rel = 1e-6;    // eigenvalue matching between problems
  double norming_rel = 1e-5;
  double coeff_abs = 1e-5;    // c -> c' recovery
  double potential = 1e-6;    // v against the functional-equation oracle
  double probe = 1e-7;        // oracle at two probes
  double identity = 1e-12;    // c == 0: v, h, H unchanged
  double endpoint_rel = 1e-6; // phi(a, lambda_n) = phi_0(a, lambda_n) / (1 + c_n alpha_n0)
  double probe_lambda_1 = 1.0;
  double probe_lambda_2 = 2.0;
};

struct RoundTripReport {
  std::string kind;         // "levinson-marchenko" or "ashrafyan"
  std::string base_digest;  // FNV-1a of the base problem
  std::vector<double> coefficients;
  std::vector<double> recovered_coefficients;
  std::vector<double> eigenvalue_deviation;  // relative, per n
  std::vector<double> norming_deviation;     // relative, per n
  std::vector<double> endpoint_deviation;    // relative, per n
  double potential_deviation = 0.0;          // ||v_rec - v_expected||_inf
  double probe_disagreement = 0.0;
  double coefficient_deviation = 0.0;
  double h = 0.0, H = 0.0;
  double h_deviation = 0.0;
  double H_deviation = 0.0;
  double kernel_residual = 0.0;
  double diagonal_defect = 0.0;
  double coefficient_sum = 0.0;
  bool mechanism_flag = false;  // ashrafyan: h != h0 forced by the data
  std::map<std::string, bool> passes;
  std::vector<std::string> errors;

  bool passed() const;
};

std::string problem_digest(const ProblemSpec& spec);

// base_data must hold at least coeffs.c.size() eigenpairs of base; the
// transformed problem is compared over the range of coeffs.base.
RoundTripReport levinson_marchenko_roundtrip(const ProblemSpec& base, const GLCoefficients& coeffs,
                                             const HarnessTolerances& tol = {});

// target_normings[n] against base_data.normings[n]; the hypothesis is
// alpha_n >= alpha_n0 for every supplied n.
RoundTripReport ashrafyan_check(const ProblemSpec& base, const SpectralData& base_data,
                                const std::vector<double>& target_normings,
                                const HarnessTolerances& tol = {});

// True when c lies in {c_n <= 0, sum c_n = 0}.
bool in_ashrafyan_set(const std::vector<double>& c);

struct FamilyMember {
  std::vector<double> coefficients;
  std::optional<ProblemSpec> problem;
  SpectralData data;
  double eigen_deviation = 0.0;     // max relative over n
  double potential_distance = 0.0;  // ||v - v_0||_inf on the interior indices
  bool isospectral = false;
  std::string error;
};

std::vector<FamilyMember> isospectral_family(const ProblemSpec& base,
                                             const std::vector<GLCoefficients>& grid,
                                             const HarnessTolerances& tol = {});

}  // namespace qsl
