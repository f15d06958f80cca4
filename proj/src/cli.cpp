#include "qsl/cli.hpp"

#include "qsl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace qsl::cli {

namespace {

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError((where.empty() ? k : where + "." + k) + ": unknown key");
}

template <class T>
void read(const Json& j, const char* key, const std::string& where, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

EigenSearchOptions search_options(const ExperimentConfig& cfg) {
  EigenSearchOptions o;
  o.rel_tol = cfg.tolerances.root_rel;
  o.scan_refine = cfg.tolerances.scan_refine;
  o.negative_samples = cfg.tolerances.negative_samples;
  return o;
}

HarnessTolerances harness_tolerances(const ExperimentConfig& cfg) {
  const auto& t = cfg.tolerances;
  HarnessTolerances h;
  h.eigen_rel = t.eigen_match;
  h.norming_rel = t.norming;
  h.coeff_abs = t.coefficient;
  h.potential = t.potential;
  h.probe = t.probe;
  h.identity = t.identity;
  h.endpoint_rel = t.endpoint;
  h.probe_lambda_1 = t.probe_lambdas[0];
  h.probe_lambda_2 = t.probe_lambdas[1];
  return h;
}

Json vec(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json spectral_table(const ProblemSpec& spec, const std::vector<double>& eigs) {
  Json rows = Json::array();
  for (std::size_t n = 0; n < eigs.size(); ++n) {
    const double l = eigs[n];
    const double aq = norming_by_quadrature(spec, l);
    const double ad = norming_by_derivative(spec, l);
    Json row;
    row["n"] = n;
    row["lambda"] = l;
    row["s"] = std::copysign(std::sqrt(std::abs(l)), l);
    row["alpha_quadrature"] = aq;
    row["alpha_derivative"] = ad;
    row["alpha_agreement"] = std::abs(aq - ad) / std::abs(aq);
    row["delta_residual"] = std::abs(char_delta(spec, l));
    rows.push_back(row);
  }
  return rows;
}

Json lattice_samples(const LatticeFn& f) {
  Json rows = Json::array();
  const auto& lat = f.lattice();
  for (int n = 0; n <= lat.depth(); ++n) rows.push_back(Json::array({lat.point(n), f[n]}));
  return rows;
}

SpectralData base_data(const ProblemSpec& base, const ExperimentConfig& cfg, std::size_t at_least) {
  const int count = static_cast<int>(std::max<std::size_t>(cfg.eigen_count, at_least));
  return compute_spectral_data(base, count, search_options(cfg));
}

void write_number(std::ostream& os, double x) {
  if (!std::isfinite(x)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // keep floats recognisable as floats
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  os << s;
}

void write(std::ostream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      write_number(os, j.get<double>());
      break;
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      // numeric rows stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      os << "[";
      bool first = true;
      for (const auto& e : j) {
        os << (first ? "" : ",");
        if (!flat) os << "\n" << inner;
        else if (!first) os << " ";
        write(os, e, indent + 1);
        first = false;
      }
      if (!flat) os << "\n" << pad;
      os << "]";
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        os << (first ? "\n" : ",\n") << inner << Json(k).dump() << ": ";
        write(os, v, indent + 1);
        first = false;
      }
      os << "\n" << pad << "}";
      break;
    }
    default:
      os << j.dump();
  }
}

std::string csv_cell(const Json& v) {
  if (v.is_number_float()) {
    std::ostringstream os;
    write_number(os, v.get<double>());
    const std::string s = os.str();
    return s == "null" ? "" : s;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string rows_to_csv(const Json& rows) {
  std::ostringstream os;
  if (!rows.is_array() || rows.empty()) return "";
  if (rows[0].is_object()) {
    bool first = true;
    for (const auto& [k, v] : rows[0].items()) {
      if (v.is_structured()) continue;
      os << (first ? "" : ",") << k;
      first = false;
    }
    os << "\n";
    for (const auto& r : rows) {
      first = true;
      for (const auto& [k, v] : r.items()) {
        if (v.is_structured()) continue;
        os << (first ? "" : ",") << csv_cell(v);
        first = false;
      }
      os << "\n";
    }
  } else {
    for (const auto& r : rows) {
      bool first = true;
      for (const auto& v : r) {
        os << (first ? "" : ",") << csv_cell(v);
        first = false;
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig c;
  check_keys(j, "", {"lattice", "potential", "boundary", "eigen", "direct", "gl", "roundtrip", "isofamily",
                     "tolerances"});
  if (j.contains("lattice")) {
    const auto& l = j["lattice"];
    check_keys(l, "lattice", {"q", "a", "depth"});
    read(l, "q", "lattice", c.q);
    read(l, "a", "lattice", c.a);
    read(l, "depth", "lattice", c.depth);
  }
  if (!(c.q > 0.0 && c.q < 1.0)) throw ConfigError("lattice.q: must lie in (0, 1)");
  if (!(c.a > 0.0)) throw ConfigError("lattice.a: must be positive");
  if (c.depth < 2) throw ConfigError("lattice.depth: must be at least 2");
  if (j.contains("potential")) {
    const auto& p = j["potential"];
    check_keys(p, "potential", {"preset", "value", "slope", "values", "value_at_zero"});
    read(p, "preset", "potential", c.potential.preset);
    const auto& pr = c.potential.preset;
    auto only = [&](std::initializer_list<const char*> keys) {
      check_keys(p, "potential(" + pr + ")", keys);
    };
    if (pr == "zero") {
      only({"preset"});
    } else if (pr == "constant") {
      only({"preset", "value"});
      if (!p.contains("value")) throw ConfigError("potential.value: required for preset constant");
      read(p, "value", "potential", c.potential.value);
    } else if (pr == "linear") {
      only({"preset", "slope"});
      if (!p.contains("slope")) throw ConfigError("potential.slope: required for preset linear");
      read(p, "slope", "potential", c.potential.slope);
    } else if (pr == "samples") {
      only({"preset", "values", "value_at_zero"});
      read(p, "values", "potential", c.potential.samples);
      read(p, "value_at_zero", "potential", c.potential.value_at_zero);
      if (c.potential.samples.size() != static_cast<std::size_t>(c.depth) + 1)
        throw ConfigError("potential.values: expected depth+1 = " + std::to_string(c.depth + 1) + " samples");
    } else {
      throw ConfigError("potential.preset: unknown preset '" + pr + "'");
    }
  }
  if (j.contains("boundary")) {
    check_keys(j["boundary"], "boundary", {"h", "H"});
    read(j["boundary"], "h", "boundary", c.h);
    read(j["boundary"], "H", "boundary", c.H);
  }
  if (j.contains("eigen")) {
    check_keys(j["eigen"], "eigen", {"count"});
    read(j["eigen"], "count", "eigen", c.eigen_count);
    if (c.eigen_count < 0) throw ConfigError("eigen.count: must be non-negative");
  }
  if (j.contains("direct")) {
    check_keys(j["direct"], "direct", {"lambdas"});
    read(j["direct"], "lambdas", "direct", c.lambdas);
  }
  if (j.contains("gl")) {
    check_keys(j["gl"], "gl", {"coefficients", "target_normings", "norming_factors"});
    read(j["gl"], "coefficients", "gl", c.coefficients);
    read(j["gl"], "target_normings", "gl", c.target_normings);
    read(j["gl"], "norming_factors", "gl", c.norming_factors);
  }
  if (j.contains("roundtrip")) {
    check_keys(j["roundtrip"], "roundtrip", {"mode"});
    read(j["roundtrip"], "mode", "roundtrip", c.roundtrip_mode);
    if (c.roundtrip_mode != "levinson-marchenko" && c.roundtrip_mode != "ashrafyan")
      throw ConfigError("roundtrip.mode: expected levinson-marchenko or ashrafyan");
  }
  if (j.contains("isofamily")) {
    check_keys(j["isofamily"], "isofamily", {"grid"});
    read(j["isofamily"], "grid", "isofamily", c.grid);
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    auto& o = c.tolerances;
    check_keys(t, "tolerances", {"root_rel", "scan_refine", "negative_samples", "series_tol", "eigen_match",
                                 "norming", "coefficient", "potential", "probe", "identity", "endpoint",
                                 "probe_lambdas"});
    read(t, "root_rel", "tolerances", o.root_rel);
    read(t, "scan_refine", "tolerances", o.scan_refine);
    read(t, "negative_samples", "tolerances", o.negative_samples);
    read(t, "series_tol", "tolerances", o.series_tol);
    read(t, "eigen_match", "tolerances", o.eigen_match);
    read(t, "norming", "tolerances", o.norming);
    read(t, "coefficient", "tolerances", o.coefficient);
    read(t, "potential", "tolerances", o.potential);
    read(t, "probe", "tolerances", o.probe);
    read(t, "identity", "tolerances", o.identity);
    read(t, "endpoint", "tolerances", o.endpoint);
    read(t, "probe_lambdas", "tolerances", o.probe_lambdas);
    if (o.probe_lambdas.size() != 2) throw ConfigError("tolerances.probe_lambdas: expected two values");
    if (!(o.root_rel > 0.0)) throw ConfigError("tolerances.root_rel: must be positive");
    if (o.scan_refine < 1) throw ConfigError("tolerances.scan_refine: must be at least 1");
    if (o.negative_samples < 2) throw ConfigError("tolerances.negative_samples: must be at least 2");
  }
  return c;
}

Json emit_config(const ExperimentConfig& c) {
  Json j;
  j["lattice"] = {{"q", c.q}, {"a", c.a}, {"depth", c.depth}};
  Json p;
  p["preset"] = c.potential.preset;
  if (c.potential.preset == "constant") p["value"] = c.potential.value;
  if (c.potential.preset == "linear") p["slope"] = c.potential.slope;
  if (c.potential.preset == "samples") {
    p["values"] = vec(c.potential.samples);
    p["value_at_zero"] = c.potential.value_at_zero;
  }
  j["potential"] = p;
  j["boundary"] = {{"h", c.h}, {"H", c.H}};
  j["eigen"] = {{"count", c.eigen_count}};
  j["direct"] = {{"lambdas", vec(c.lambdas)}};
  Json gl;
  gl["coefficients"] = vec(c.coefficients);
  gl["target_normings"] = vec(c.target_normings);
  gl["norming_factors"] = vec(c.norming_factors);
  j["gl"] = gl;
  j["roundtrip"] = {{"mode", c.roundtrip_mode}};
  Json grid = Json::array();
  for (const auto& g : c.grid) grid.push_back(vec(g));
  j["isofamily"] = {{"grid", grid}};
  const auto& t = c.tolerances;
  Json tj;
  tj["root_rel"] = t.root_rel;
  tj["scan_refine"] = t.scan_refine;
  tj["negative_samples"] = t.negative_samples;
  tj["series_tol"] = t.series_tol;
  tj["eigen_match"] = t.eigen_match;
  tj["norming"] = t.norming;
  tj["coefficient"] = t.coefficient;
  tj["potential"] = t.potential;
  tj["probe"] = t.probe;
  tj["identity"] = t.identity;
  tj["endpoint"] = t.endpoint;
  tj["probe_lambdas"] = vec(t.probe_lambdas);
  j["tolerances"] = tj;
  return j;
}

ProblemSpec build_problem(const ExperimentConfig& c) {
  try {
    const QLattice lat(c.q, c.a, c.depth);
    const auto& p = c.potential;
    if (p.preset == "constant") return ProblemSpec(lat, LatticeFn::constant(lat, p.value), c.h, c.H);
    if (p.preset == "linear") {
      const double k = p.slope;
      return ProblemSpec(lat, LatticeFn::sample(lat, [k](double x) { return k * x; }), c.h, c.H);
    }
    if (p.preset == "samples") return ProblemSpec(lat, LatticeFn(lat, p.samples, p.value_at_zero), c.h, c.H);
    return ProblemSpec::free(lat, c.h, c.H);
  } catch (const Error& e) {
    throw ConfigError(std::string("lattice/potential: ") + e.what());
  }
}

Json cmd_spectrum(const ExperimentConfig& cfg) {
  const ProblemSpec spec = build_problem(cfg);
  const auto eigs = find_eigenvalues(spec, cfg.eigen_count, search_options(cfg));
  Json r;
  r["count"] = eigs.size();
  r["table"] = spectral_table(spec, eigs);
  return r;
}

Json cmd_direct(const ExperimentConfig& cfg) {
  const ProblemSpec spec = build_problem(cfg);
  Json blocks = Json::array();
  for (double l : cfg.lambdas) {
    const IVPSolution m = phi_with_bc(spec, l);
    Json b;
    b["lambda"] = l;
    b["phi_a"] = m.phi[0];
    b["slope_at_a"] = m.slope_at_a;
    b["functional_residual"] = m.max_residual;
    if (l != 0.0) {
      const IVPSolution s = solve_ivp_series(spec, l, 1.0, spec.h, cfg.tolerances.series_tol);
      double d = 0.0;
      for (std::size_t n = 0; n < m.phi.values().size(); ++n) d = std::max(d, std::abs(m.phi[n] - s.phi[n]));
      b["solver_agreement"] = d / std::max(m.phi.max_abs(), 1e-300);
    } else {
      b["solver_agreement"] = nullptr;
    }
    b["samples"] = lattice_samples(m.phi);
    blocks.push_back(b);
  }
  Json r;
  r["solutions"] = blocks;
  return r;
}

namespace {

GLCoefficients coefficients_for(const ProblemSpec& base, const ExperimentConfig& cfg) {
  if (!cfg.target_normings.empty()) {
    const SpectralData bd = base_data(base, cfg, cfg.target_normings.size());
    std::vector<double> c(cfg.target_normings.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
      if (!(cfg.target_normings[n] > 0.0))
        throw ConfigError("gl.target_normings: entry " + std::to_string(n) + " must be positive");
      c[n] = 1.0 / cfg.target_normings[n] - 1.0 / bd.normings[n];
    }
    return GLCoefficients(std::move(c), bd);
  }
  return GLCoefficients(cfg.coefficients, base_data(base, cfg, cfg.coefficients.size()));
}

Json family_member_json(const FamilyMember& m) {
  Json j;
  j["coefficients"] = vec(m.coefficients);
  j["isospectral"] = m.isospectral;
  j["eigen_deviation"] = m.eigen_deviation;
  j["potential_distance"] = m.potential_distance;
  j["eigenvalues"] = vec(m.data.eigenvalues);
  j["normings"] = vec(m.data.normings);
  if (m.problem) {
    j["h"] = m.problem->h;
    j["H"] = m.problem->H;
  }
  j["error"] = m.error;
  return j;
}

}  // namespace

Json report_to_json(const RoundTripReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["base_digest"] = r.base_digest;
  j["passed"] = r.passed();
  Json p;
  for (const auto& [k, v] : r.passes) p[k] = v;
  j["passes"] = p;
  j["coefficients"] = vec(r.coefficients);
  j["recovered_coefficients"] = vec(r.recovered_coefficients);
  j["eigenvalue_deviation"] = vec(r.eigenvalue_deviation);
  j["norming_deviation"] = vec(r.norming_deviation);
  j["endpoint_deviation"] = vec(r.endpoint_deviation);
  j["potential_deviation"] = r.potential_deviation;
  j["probe_disagreement"] = r.probe_disagreement;
  j["coefficient_deviation"] = r.coefficient_deviation;
  j["coefficient_sum"] = r.coefficient_sum;
  j["h"] = r.h;
  j["H"] = r.H;
  j["h_deviation"] = r.h_deviation;
  j["H_deviation"] = r.H_deviation;
  j["kernel_residual"] = r.kernel_residual;
  j["diagonal_defect"] = r.diagonal_defect;
  j["mechanism_flag"] = r.mechanism_flag;
  Json e = Json::array();
  for (const auto& s : r.errors) e.push_back(s);
  j["errors"] = e;
  return j;
}

Json cmd_reconstruct(const ExperimentConfig& cfg) {
  const ProblemSpec base = build_problem(cfg);
  const GLCoefficients coeffs = coefficients_for(base, cfg);
  const GLTransform T = gl_transform(coeffs, base);
  Json r;
  r["coefficients"] = vec(coeffs.c);
  r["kernel_residual"] = T.kernel.residual;
  r["diagonal_defect"] = T.kernel.diagonal_defect;
  r["h"] = T.h;
  r["H"] = T.H;
  r["potential_tail_settled"] = T.potential.tail_settled;
  r["potential"] = lattice_samples(T.potential.v);
  try {
    const auto eigs = find_eigenvalues(T.problem, static_cast<int>(coeffs.base.count()), search_options(cfg));
    r["spectrum"] = spectral_table(T.problem, eigs);
  } catch (const Error& e) {
    r["spectrum"] = Json::array();
    r["spectrum_error"] = e.what();
  }
  r["report"] = report_to_json(levinson_marchenko_roundtrip(base, coeffs, harness_tolerances(cfg)));
  return r;
}

Json cmd_roundtrip(const ExperimentConfig& cfg) {
  const ProblemSpec base = build_problem(cfg);
  Json r;
  r["mode"] = cfg.roundtrip_mode;
  if (cfg.roundtrip_mode == "ashrafyan") {
    std::vector<double> target = cfg.target_normings;
    const std::size_t n = std::max(target.size(), cfg.norming_factors.size());
    const SpectralData bd = base_data(base, cfg, n);
    if (target.empty()) {
      target.resize(cfg.norming_factors.size());
      for (std::size_t i = 0; i < target.size(); ++i) target[i] = cfg.norming_factors[i] * bd.normings[i];
    }
    r["target_normings"] = vec(target);
    r["report"] = report_to_json(ashrafyan_check(base, bd, target, harness_tolerances(cfg)));
  } else {
    const GLCoefficients coeffs = coefficients_for(base, cfg);
    require_admissible(coeffs);
    r["report"] = report_to_json(levinson_marchenko_roundtrip(base, coeffs, harness_tolerances(cfg)));
  }
  return r;
}

Json cmd_isofamily(const ExperimentConfig& cfg) {
  const ProblemSpec base = build_problem(cfg);
  std::size_t longest = 0;
  for (const auto& g : cfg.grid) longest = std::max(longest, g.size());
  const SpectralData bd = base_data(base, cfg, longest);
  std::vector<GLCoefficients> grid;
  for (const auto& g : cfg.grid) {
    GLCoefficients c(g, bd);
    require_admissible(c);
    grid.push_back(std::move(c));
  }
  const auto fam = isospectral_family(base, grid, harness_tolerances(cfg));
  Json members = Json::array();
  for (const auto& m : fam) members.push_back(family_member_json(m));
  Json r;
  r["base_eigenvalues"] = vec(bd.eigenvalues);
  r["members"] = members;
  return r;
}

Json make_bundle(const std::string& command, const ExperimentConfig& cfg, Json result) {
  Json b;
  b["tool"] = "qsl";
  b["version"] = kVersion;
  b["command"] = command;
  b["conventions"] = {{"gl_diagonal", kDiagonalConvention}};
  b["config"] = emit_config(cfg);
  b["result"] = std::move(result);
  return b;
}

std::string dump(const Json& j) {
  std::ostringstream os;
  write(os, j, 0);
  os << "\n";
  return os.str();
}

std::string to_csv(const std::string& command, const Json& result) {
  if (command == "spectrum") return rows_to_csv(result["table"]);
  if (command == "direct") {
    std::ostringstream os;
    os << "lambda,x,phi\n";
    for (const auto& b : result["solutions"])
      for (const auto& s : b["samples"])
        os << csv_cell(b["lambda"]) << "," << csv_cell(s[0]) << "," << csv_cell(s[1]) << "\n";
    return os.str();
  }
  if (command == "reconstruct") return "x,v\n" + rows_to_csv(result["potential"]);
  if (command == "isofamily") return rows_to_csv(result["members"]);
  // roundtrip: per-n deviations
  const auto& rep = result["report"];
  std::ostringstream os;
  os << "n,eigenvalue_deviation,norming_deviation,endpoint_deviation\n";
  const auto& ed = rep["eigenvalue_deviation"];
  for (std::size_t n = 0; n < ed.size(); ++n)
    os << n << "," << csv_cell(ed[n]) << "," << csv_cell(rep["norming_deviation"][n]) << ","
       << csv_cell(rep["endpoint_deviation"][n]) << "\n";
  return os.str();
}

int run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    Json j = Json::object();
    if (opt.config_path) {
      std::ifstream in(*opt.config_path);
      if (!in) throw ConfigError("cannot open config " + *opt.config_path);
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    cfg = parse_config(j);
    if (opt.seed_tolerance) {
      if (!(*opt.seed_tolerance > 0.0)) throw ConfigError("--seed-tolerance: must be positive");
      cfg.tolerances.root_rel = *opt.seed_tolerance;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  Json result;
  try {
    const auto& c = opt.command;
    if (c == "spectrum") result = cmd_spectrum(cfg);
    else if (c == "direct") result = cmd_direct(cfg);
    else if (c == "reconstruct") result = cmd_reconstruct(cfg);
    else if (c == "roundtrip") result = cmd_roundtrip(cfg);
    else if (c == "isofamily") result = cmd_isofamily(cfg);
    else throw ConfigError("unknown command '" + c + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const AdmissibilityError& e) {
    err << "admissibility: " << e.what() << " (index " << e.index() << ")\n";
    return kAdmissibility;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  }

  const std::string text = opt.csv ? to_csv(opt.command, result) : dump(make_bundle(opt.command, cfg, result));
  if (opt.out_path) {
    std::ofstream f(*opt.out_path, std::ios::binary);
    if (!f) {
      err << "config error: cannot write " << *opt.out_path << "\n";
      return kConfigError;
    }
    f << text;
  } else {
    out << text;
  }
  return kOk;
}

}  // namespace qsl::cli
