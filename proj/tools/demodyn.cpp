#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "demodyn/commands.hpp"

int main(int argc, char** argv) {
  using namespace demodyn;
  CLI::App app{"Bayesian age- and sex-structured population dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  CommandOverrides overrides;
  std::string aerial_rate;
  std::string out_dir;

  for (const char* name : {"simulate", "fit", "validate", "predict"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", overrides.seed, "RNG seed");
    sub->add_option("--iters", overrides.iters, "total MCMC iterations, burn-in included")->check(CLI::PositiveNumber);
    sub->add_option("--burn-in", overrides.burn_in, "burn-in iterations")->check(CLI::NonNegativeNumber);
    sub->add_option("--aerial-rate", aerial_rate, "aerial intensity rate form")
        ->check(CLI::IsMember({"paper", "consistent"}));
    sub->add_option("--out", out_dir, "output directory");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  if (!aerial_rate.empty())
    overrides.aerial_rate = aerial_rate == "paper" ? AerialRate::kPaper : AerialRate::kConsistent;
  if (!out_dir.empty()) overrides.out = out_dir;

  try {
    RunConfig cfg = load_run_config(config_path);
    apply_overrides(cfg, overrides);
    return run_command(command, cfg, std::cout);
  } catch (const IoError& e) {
    std::cerr << "demodyn: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "demodyn: " << e.what() << '\n';
    return 1;
  }
}
