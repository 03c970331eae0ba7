#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "avsfe/drivers.hpp"

int main(int argc, char** argv) {
  if (const char* env = std::getenv("AVSFE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"Variationally stable FE solver for transient convection-diffusion"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run a configuration file");
  std::string config_path;
  run->add_option("config", config_path, "Path to a TOML or JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);

  std::string mode, out_dir;
  int levels = -1;
  double theta = -1.0, rho_inf = -1.0, tau = -1.0;
  run->add_option("--mode", mode, "Override the run mode");
  run->add_option("--levels", levels, "Override the number of refinement levels");
  run->add_option("--theta", theta, "Override the marking fraction");
  run->add_option("--rho-inf", rho_inf, "Override the spectral radius of the time integrator");
  run->add_option("--tau", tau, "Override the time step");
  run->add_option("--out", out_dir, "Override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    avsfe::RunConfig cfg = avsfe::load_config(config_path);
    if (!mode.empty()) cfg.mode = mode;
    if (levels >= 0) cfg.levels = levels;
    if (theta >= 0.0) cfg.theta = theta;
    if (rho_inf >= 0.0) cfg.rho_inf = rho_inf;
    if (tau >= 0.0) cfg.tau = tau;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    avsfe::run_config(cfg);
  } catch (const avsfe::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
