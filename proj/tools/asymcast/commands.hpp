#pragma once

#include <asymcast/config.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace asymcast::cli {

struct Invocation {
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<std::filesystem::path> out;
  int verbosity = 0;
};

/// Config file (or defaults) plus --set overrides, then --seed/--jobs/--out.
ExperimentConfig resolve_config(const Invocation& inv, bool require_file);

int cmd_synth(const ExperimentConfig& cfg, std::ostream& out);
int cmd_train(const ExperimentConfig& cfg, std::ostream& out);
int cmd_select(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);
int cmd_report(const ExperimentConfig& cfg, std::ostream& out);
int cmd_verify(std::ostream& out);

}  // namespace asymcast::cli
