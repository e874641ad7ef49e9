// gdfactor: experiment harness for gradient descent on overparametrized
// asymmetric matrix factorization.
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gdfactor/config.hpp"
#include "gdfactor/csv.hpp"
#include "gdfactor/error.hpp"
#include "gdfactor/experiments.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir = ".";
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  unsigned parallel = 1;
};

const char* describe(const std::string& name) {
  if (name == "overfit-demo") return "Training vs test error trajectories (overfitting without early stopping)";
  if (name == "init-compare") return "Small vs moderate initialization on an exactly low-rank target";
  if (name == "sweep-rho") return "Smallest relative error vs initialization size";
  if (name == "sweep-gap") return "Smallest relative error and T0 vs relative gap";
  if (name == "sweep-dim") return "Smallest relative error vs dimension";
  if (name == "sweep-stepdim") return "Smallest relative error vs dimension for several (rho, delta, kappa)";
  if (name == "schedule") return "Theoretical stepsize, initialization caps and iteration counts";
  if (name == "psd-toy") return "Scalar dynamics of the PSD toy model with its stopping time";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient descent with small initialization and early stopping for low-rank factorization"};
  app.set_version_flag("--version", std::string(gdfactor::kVersion));
  app.require_subcommand(1);

  Flags flags;
  for (const auto& name : gdfactor::command_names()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", flags.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--trials", flags.trials, "repetitions (overrides the config file)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "master seed (overrides the config file)");
    sub->add_option("--parallel", flags.parallel, "worker threads for sweeps")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gdfactor::exit_code::kConfig;
  }

  gdfactor::CommandContext ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.out_dir = flags.out_dir;
  ctx.parallel = flags.parallel;
  const CLI::App* sub = app.get_subcommands().front();

  try {
    if (!flags.config_path.empty()) ctx.config = gdfactor::Config::load(flags.config_path);
    if (sub->count("--trials")) ctx.config.set("trials", std::to_string(flags.trials));
    if (sub->count("--seed")) ctx.config.set("seed", std::to_string(flags.seed));

    const gdfactor::CommandOutcome outcome = gdfactor::run_command(ctx);
    for (const auto& line : outcome.summary) std::cout << line << "\n";
    for (const auto& file : outcome.files) std::cout << "wrote " << file.string() << "\n";
    return outcome.exit_code;
  } catch (const gdfactor::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return gdfactor::exit_code::kConfig;
  } catch (const gdfactor::InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return gdfactor::exit_code::kConfig;
  } catch (const gdfactor::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return gdfactor::exit_code::kNumerical;
  } catch (const gdfactor::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return gdfactor::exit_code::kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gdfactor::exit_code::kIo;
  }
}
