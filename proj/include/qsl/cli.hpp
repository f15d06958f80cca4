#pragma once

// Experiment configs, the five subcommands and their JSON/CSV output.

#include "qsl/harness.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsl::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericFailure = 2, kAdmissibility = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PotentialDesc {
  std::string preset = "zero";  // zero | constant | linear | samples
  double value = 0.0;           // constant
  double slope = 0.0;           // linear: v(x) = slope * x
  std::vector<double> samples;  // samples: depth+1 values at a q^n
  double value_at_zero = 0.0;   // samples
  bool operator==(const PotentialDesc&) const = default;
};

struct ToleranceConfig {
  double root_rel = 1e-15;
  int scan_refine = 16;
  int negative_samples = 64;
  double series_tol = 1e-15;
  double eigen_match = 1e-6;
  double norming = 1e-5;
  double coefficient = 1e-5;
  double potential = 1e-6;
  double probe = 1e-7;
  double identity = 1e-12;
  double endpoint = 1e-6;
  std::vector<double> probe_lambdas{1.0, 2.0};
  bool operator==(const ToleranceConfig&) const = default;
};

struct ExperimentConfig {
  double q = 0.5;
  double a = 1.0;
  int depth = 48;
  PotentialDesc potential;
  double h = 0.0;
  double H = 0.0;
  int eigen_count = 5;
  std::vector<double> lambdas;                       // direct
  std::vector<double> coefficients;                  // reconstruct, roundtrip
  std::vector<double> target_normings;               // reconstruct, ashrafyan
  std::vector<double> norming_factors;               // ashrafyan: alpha_n = factor * alpha_n0
  std::string roundtrip_mode = "levinson-marchenko"; // or "ashrafyan"
  std::vector<std::vector<double>> grid;             // isofamily
  ToleranceConfig tolerances;
  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const Json& j);
Json emit_config(const ExperimentConfig& cfg);

ProblemSpec build_problem(const ExperimentConfig& cfg);

// Each returns the "result" block of the bundle.
Json cmd_spectrum(const ExperimentConfig& cfg);
Json cmd_direct(const ExperimentConfig& cfg);
Json cmd_reconstruct(const ExperimentConfig& cfg);
Json cmd_roundtrip(const ExperimentConfig& cfg);
Json cmd_isofamily(const ExperimentConfig& cfg);

Json report_to_json(const RoundTripReport& r);

// Bundle: tool, version, command, conventions, config echo, result.
Json make_bundle(const std::string& command, const ExperimentConfig& cfg, Json result);

// Pretty JSON with every floating value printed as %.17g.
std::string dump(const Json& j);

// The main table of a result as CSV.
std::string to_csv(const std::string& command, const Json& result);

struct RunOptions {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> out_path;
  bool csv = false;
  std::optional<double> seed_tolerance;
};

// Runs one command; writes output to out (or the --out file) and
// diagnostics to err. Returns the exit code.
int run(const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace qsl::cli
