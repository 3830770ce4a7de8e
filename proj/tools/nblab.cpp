#include "nblab/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  using namespace nblab::harness;
  CLI::App app{"Nonlocal parabolic blow-up lab"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "nblab_out";
  RunOptions opt;
  app.add_option("--config", config_path, "problem / experiment JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (NBLAB_OUT overrides)");
  app.add_flag("--reproducible", opt.reproducible, "omit the timestamp comment from SVG output");
  app.add_option("--workers", opt.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "reserved; nothing is random");
  app.add_flag("--waive-compatibility", opt.waive_compatibility, "run data that violate the boundary condition at t = 0");

  for (const auto& name : subcommands()) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (const char* env = std::getenv("NBLAB_OUT"); env && *env) out_dir = env;
  opt.out_dir = out_dir;

  const std::string sub = app.get_subcommands().front()->get_name();
  nblab::json config;
  try {
    config = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const CommandResult r = run(sub, config, opt, std::cerr);
  if (r.exit_code == kExitOk || r.exit_code == kExitCheckFailed) {
    std::cout << r.report.value("verdict", r.exit_code == kExitOk ? std::string("ok") : std::string("failed")) << "\n";
    for (const auto& f : r.manifest.outputs) std::cout << (opt.out_dir / f).string() << "\n";
  }
  return r.exit_code;
}
