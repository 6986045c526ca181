#include "commands.hpp"

#include <asymcast/errors.hpp>
#include <asymcast/version.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

int exit_code(asymcast::ErrorCategory c) {
  switch (c) {
    case asymcast::ErrorCategory::Config: return 2;
    case asymcast::ErrorCategory::Data: return 3;
    case asymcast::ErrorCategory::Io: return 3;
    case asymcast::ErrorCategory::Numerical: return 4;
    case asymcast::ErrorCategory::Verification: return 5;
  }
  return 1;
}

void banner(const std::string& seed) {
  std::cout << "asymcast " << asymcast::kVersion << " seed=" << seed << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace asymcast;
  cli::Invocation inv;

  CLI::App app{"Forecasting under asymmetric error costs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "Experiment config file (INI)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  app.add_option("--set", inv.overrides, "Override section.key=value (repeatable, last wins)")
      ->take_all()
      ->allow_extra_args(false);
  app.add_flag("-v,--verbose", inv.verbosity, "More log output (repeatable)");

  auto* synth = app.add_subcommand("synth", "Write the synthetic dataset (data.csv, schema.txt)");
  auto* train = app.add_subcommand("train", "Fit the model library and save a bundle");
  auto* select = app.add_subcommand("select", "Run ensemble selection and markdown on a saved bundle");
  auto* sweep = app.add_subcommand("sweep", "Run the full asymmetry sweep and write all reports");
  auto* report = app.add_subcommand("report", "Render the CSV reports of a finished sweep");
  auto* verify = app.add_subcommand("verify", "Run the built-in self checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto logger = spdlog::stderr_color_mt("asymcast");
  spdlog::set_default_logger(logger);
  spdlog::set_level(inv.verbosity >= 2 ? spdlog::level::debug
                    : inv.verbosity == 1 ? spdlog::level::info
                                         : spdlog::level::warn);

  if (!config_path.empty()) inv.config = config_path;
  if (*seed_opt) inv.seed = seed;
  if (*jobs_opt) inv.jobs = jobs;
  if (*out_opt) inv.out = out_dir;

  try {
    const bool needs_file = !(synth->parsed() || verify->parsed());
    ExperimentConfig cfg;
    try {
      cfg = cli::resolve_config(inv, needs_file);
    } catch (...) {
      banner(inv.seed ? std::to_string(*inv.seed) : "NA");
      throw;
    }
    banner(std::to_string(cfg.seed));
    if (synth->parsed()) return cli::cmd_synth(cfg, std::cout);
    if (train->parsed()) return cli::cmd_train(cfg, std::cout);
    if (select->parsed()) return cli::cmd_select(cfg, std::cout);
    if (sweep->parsed()) return cli::cmd_sweep(cfg, std::cout);
    if (report->parsed()) return cli::cmd_report(cfg, std::cout);
    return cli::cmd_verify(std::cout);
  } catch (const Error& e) {
    std::cout.flush();
    std::cerr << "error [" << category_name(e.category()) << "]: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error [internal]: " << e.what() << '\n';
    return 1;
  }
}
