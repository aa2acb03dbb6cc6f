#include <CLI11.hpp>
#include <iostream>

#include "irf/commands.hpp"
#include "irf/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"irftail: tails of stochastic fixed-point equations"};
  app.require_subcommand(1);

  irf::GlobalOptions opts;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--config", opts.config_path, "experiment config (INI)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "overrides sim.seed");
  auto* out_opt = app.add_option("--out", out, "overrides output.dir");

  using Cmd = int (*)(const irf::ExperimentConfig&, std::ostream&);
  Cmd chosen = nullptr;
  const auto sub = [&](const char* name, const char* help, Cmd fn) {
    app.add_subcommand(name, help)->callback([&chosen, fn] { chosen = fn; });
  };
  sub("predict", "closed-form asymptotic constants", irf::cmd_predict);
  sub("simulate", "sample the stationary law to a batch file", irf::cmd_simulate);
  sub("estimate", "tail estimate and ratio curve", irf::cmd_estimate);
  sub("verify", "predicted vs empirical tail ratios", irf::cmd_verify);
  sub("dist-check", "regular variation / S(alpha) / convolution diagnostics", irf::cmd_dist_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(irf::ExitCode::config);
  }

  try {
    if (*seed_opt) opts.seed = seed;
    if (*out_opt) opts.out_dir = out;
    const irf::ExperimentConfig cfg = irf::resolve_config(opts);
    return chosen(cfg, std::cout);
  } catch (const irf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(irf::ExitCode::numeric);
  }
}
