#include "qsl/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"q-Sturm-Liouville direct and inverse spectral experiments"};
  app.set_version_flag("--version", std::string("qsl ") + qsl::cli::kVersion);
  app.require_subcommand(1, 1);

  qsl::cli::RunOptions opt;
  std::string config, out;
  double seed_tol = 0.0;

  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "eigenvalues and both norming formulas"},
      {"direct", "solve the initial value problem at the configured lambdas"},
      {"reconstruct", "GL transform from coefficients or target normings"},
      {"roundtrip", "round-trip or monotone-norming report"},
      {"isofamily", "isospectral family over a coefficient grid"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "write output here instead of stdout");
    sub->add_flag("--csv", opt.csv, "emit the main table as CSV");
    sub->add_option("--seed-tolerance", seed_tol, "relative tolerance for seeded eigenvalue refinement");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qsl::cli::kConfigError;
  }

  for (auto* sub : app.get_subcommands()) {
    opt.command = sub->get_name();
    if (sub->count("--config")) opt.config_path = config;
    if (sub->count("--out")) opt.out_path = out;
    if (sub->count("--seed-tolerance")) opt.seed_tolerance = seed_tol;
  }
  return qsl::cli::run(opt, std::cout, std::cerr);
}
