#pragma once

#include "asymcast/library.hpp"
#include "asymcast/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace asymcast {

struct DataSource {
  enum class Kind { Synth, Csv };
  Kind kind = Kind::Synth;
  /// Synthetic generator settings; its seed is replaced by the run seed.
  SynthConfig synth;
  std::filesystem::path csv;
  std::filesystem::path schema;
};

/// Which methods enter the linear-vs-nonlinear table.
struct RosterFlags {
  bool lin_reg = true;
  bool qr = true;
  bool qrnn = true;
  bool nnac = true;
  bool mbl = true;
  bool mbnl = true;
  bool es_av = true;
};

struct ExperimentConfig {
  DataSource data;
  std::uint64_t seed = 42;
  unsigned jobs = 1;
  /// Asymmetry levels a (b is fixed at 1).
  std::vector<double> a_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  LibraryConfig library;
  /// Whether `train` fits the augmented library (sweep always fits both).
  bool augment = true;
  RosterFlags roster;
  std::filesystem::path output_dir = "results";
  bool histograms = true;

  void validate() const;
};

/// INI-style text with sections [data], [run], [sweep], [library],
/// [augment], [roster] and [output]. `overrides` are "section.key=value"
/// strings applied after parsing, in order (last wins). Unknown sections or
/// keys are configuration errors.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(config_to_text(c)) reproduces c.
std::string config_to_text(const ExperimentConfig& config);

}  // namespace asymcast
