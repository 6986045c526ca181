#pragma once

#include "asymcast/loss.hpp"
#include "asymcast/models/model.hpp"
#include "asymcast/split.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace asymcast {

/// Hyperparameter grids of the base library. An empty grid disables a family.
struct LibraryConfig {
  bool ols = true;
  std::vector<double> ridge_lambda = {0.01, 0.1, 1, 3, 10, 30, 100};
  std::vector<std::size_t> knn_k = {3, 5, 10, 20, 40, 80, 160};
  KnnAlgorithm knn_algorithm = KnnAlgorithm::KdTree;
  std::vector<double> tree_cp = {0.0, 0.0005, 0.002, 0.01};
  std::vector<std::size_t> tree_min_node = {5, 20, 50};
  std::vector<std::size_t> nn_hidden = {2, 4, 8, 16};
  /// Used for both penalties (lambda1 = lambda2).
  std::vector<double> nn_lambda = {1e-4, 1e-3, 1e-2};
  /// Template for every net (hidden_nodes, penalties and seed are overwritten).
  NNConfig nn_base;
  std::vector<std::size_t> bagged_bags = {5, 10, 25, 50};
  std::vector<std::size_t> forest_trees = {50, 100};
  std::vector<std::size_t> forest_mtry = {3, 5, 8, 15};
  /// Base tree of the bagged trees and forests.
  TreeParams ensemble_tree;

  /// Augmentation grid: asymmetry levels a (with b = 1). Quantile models use
  /// tau = a / (a + 1); QRNN and NNAC cross the levels with augment_hidden.
  std::vector<double> augment_a = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::size_t> augment_hidden = {4, 8};
  double augment_lambda = 1e-3;

  void validate() const;
};

/// Expands the grids into concrete specs. Seeded families get a seed derived
/// from (master_seed, position in the list), so the list fully determines
/// every fit.
std::vector<ModelSpec> library_specs(const LibraryConfig& config, bool augment,
                                      std::uint64_t master_seed);

struct LibraryEntry {
  std::string label;
  ModelSpec spec;
  Provenance provenance = Provenance::Symmetric;
  /// Null for stub entries built from fixed forecasts.
  std::shared_ptr<const Model> model;
  Vector validation_predictions;
};

struct ModelLibrary {
  std::vector<LibraryEntry> entries;
  Vector validation_target;
  /// Specs that failed to fit, with the reason.
  std::vector<std::pair<std::string, std::string>> skipped;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  std::vector<Vector> validation_predictions() const;

  /// Library of fixed forecasts, labelled M1, M2, ...
  static ModelLibrary from_predictions(std::vector<Vector> predictions, Vector actuals);
};

/// Fits `specs` on the ATS and caches validation predictions. Fits run on up
/// to `jobs` threads; failures are logged and skipped. Throws TrainingError if
/// every fit fails.
ModelLibrary fit_library(const DataSplits& splits, const std::vector<ModelSpec>& specs,
                         unsigned jobs = 1);

ModelLibrary build_library(const DataSplits& splits, const LibraryConfig& config, bool augment,
                           std::uint64_t master_seed, unsigned jobs = 1);

/// Index minimizing the mean criterion loss on validation; ties go to the
/// lowest index. Entries rejected by `keep` are ignored.
std::size_t select_best(const ModelLibrary& library, const CostSpec& criterion,
                        const std::function<bool(const LibraryEntry&)>& keep = {});

/// Bundle directory: manifest.txt (one line per model) and models.txt.
void save_library(const ModelLibrary& library, const std::filesystem::path& dir);
ModelLibrary load_library(const std::filesystem::path& dir);

}  // namespace asymcast
