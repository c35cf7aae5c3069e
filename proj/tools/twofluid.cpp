#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "twofluid/cli/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-fluid mixture toolkit: simulation, hyperbolicity maps and verification runs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", twofluid::cli::kVersion);

  twofluid::cli::RunOptions opt;
  std::string config, out;
  const bool env_out = std::getenv("TWOFLUID_OUT_DIR") != nullptr;
  const char* help[] = {"Integrate the 1D dissipative system", "Map hyperbolicity over (rho1, rho2, w)",
                        "Check the dynamic Gibbs identity on manufactured fields",
                        "Strong-drag isothermal relaxation and the Fick residual",
                        "Compare identical components with a single-fluid reference"};
  int i = 0;
  for (const std::string& name : twofluid::cli::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, help[i++]);
    sub->add_option("--config", config, "Scenario INI file")->required()->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", out, "Output directory (TWOFLUID_OUT_DIR overrides)");
    if (!env_out) o->required();
    sub->add_option("--seed", opt.seed, "Seed for every random draw")->default_val(0);
    sub->callback([&opt, name] { opt.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  opt.config = config;
  opt.out = out;
  opt.log = &std::cerr;
  return twofluid::cli::run(opt);
}
