#include "asymcast/library.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/random.hpp"
#include "asymcast/text.hpp"
#include "models/serial.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

namespace asymcast {

void LibraryConfig::validate() const {
  for (double l : ridge_lambda) {
    if (!(l >= 0.0)) throw ConfigError("library: ridge lambda must be >= 0");
  }
  for (auto k : knn_k) {
    if (k == 0) throw ConfigError("library: knn k must be >= 1");
  }
  for (double cp : tree_cp) {
    if (!(cp >= 0.0)) throw ConfigError("library: tree cp must be >= 0");
  }
  for (auto mn : tree_min_node) {
    if (mn == 0) throw ConfigError("library: tree min_node must be >= 1");
  }
  for (auto k : nn_hidden) {
    if (k == 0) throw ConfigError("library: nn hidden nodes must be >= 1");
  }
  for (double l : nn_lambda) {
    if (!(l >= 0.0)) throw ConfigError("library: nn lambda must be >= 0");
  }
  nn_base.validate();
  for (auto b : bagged_bags) {
    if (b == 0) throw ConfigError("library: bags must be >= 1");
  }
  for (auto t : forest_trees) {
    if (t == 0) throw ConfigError("library: forest trees must be >= 1");
  }
  for (auto m : forest_mtry) {
    if (m == 0) throw ConfigError("library: forest mtry must be >= 1");
  }
  for (double a : augment_a) {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("library: augment levels must be in (0, 1]");
  }
  for (auto k : augment_hidden) {
    if (k == 0) throw ConfigError("library: augment hidden nodes must be >= 1");
  }
  if (!(augment_lambda >= 0.0)) throw ConfigError("library: augment lambda must be >= 0");
}

std::vector<ModelSpec> library_specs(const LibraryConfig& cfg, bool augment,
                                      std::uint64_t master_seed) {
  cfg.validate();
  std::vector<ModelSpec> specs;
  auto next_seed = [&] { return derive_seed(master_seed, specs.size()); };

  if (cfg.ols) specs.push_back({OlsParams{}});
  for (double l : cfg.ridge_lambda) specs.push_back({RidgeParams{l}});
  for (auto k : cfg.knn_k) specs.push_back({KnnParams{k, cfg.knn_algorithm}});
  for (double cp : cfg.tree_cp) {
    for (auto mn : cfg.tree_min_node) {
      TreeParams t;
      t.complexity = cp;
      t.min_node = mn;
      specs.push_back({t});
    }
  }
  for (auto k : cfg.nn_hidden) {
    for (double l : cfg.nn_lambda) {
      NNConfig c = cfg.nn_base;
      c.hidden_nodes = k;
      c.lambda1 = c.lambda2 = l;
      c.seed = next_seed();
      specs.push_back({NeuralNetParams{c, LossMode::symmetric()}});
    }
  }
  for (auto bags : cfg.bagged_bags) {
    specs.push_back({BaggedTreeParams{bags, cfg.ensemble_tree, next_seed()}});
  }
  for (auto trees : cfg.forest_trees) {
    for (auto mtry : cfg.forest_mtry) {
      specs.push_back({ForestParams{trees, mtry, cfg.ensemble_tree, next_seed()}});
    }
  }
  if (!augment) return specs;

  for (double a : cfg.augment_a) specs.push_back({QuantileParams{tau_from_weights(a, 1.0)}});
  for (double a : cfg.augment_a) {
    for (auto k : cfg.augment_hidden) {
      NNConfig c = cfg.nn_base;
      c.hidden_nodes = k;
      c.lambda1 = c.lambda2 = cfg.augment_lambda;
      c.seed = next_seed();
      specs.push_back({NeuralNetParams{c, LossMode::pinball(tau_from_weights(a, 1.0))}});
    }
  }
  for (double a : cfg.augment_a) {
    for (auto k : cfg.augment_hidden) {
      NNConfig c = cfg.nn_base;
      c.hidden_nodes = k;
      c.lambda1 = c.lambda2 = cfg.augment_lambda;
      c.seed = next_seed();
      specs.push_back({NeuralNetParams{c, LossMode::qqc_approx(a, 1.0)}});
    }
  }
  return specs;
}

std::vector<Vector> ModelLibrary::validation_predictions() const {
  std::vector<Vector> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.validation_predictions);
  return out;
}

ModelLibrary ModelLibrary::from_predictions(std::vector<Vector> predictions, Vector actuals) {
  ModelLibrary lib;
  lib.validation_target = std::move(actuals);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != lib.validation_target.size()) {
      throw InvalidInputError("library: prediction vector " + std::to_string(i + 1) +
                              " does not match the actuals length");
    }
    LibraryEntry e;
    e.label = "M" + std::to_string(i + 1);
    e.validation_predictions = std::move(predictions[i]);
    lib.entries.push_back(std::move(e));
  }
  return lib;
}

ModelLibrary fit_library(const DataSplits& splits, const std::vector<ModelSpec>& specs,
                         unsigned jobs) {
  const auto& ats = splits.ats;
  const auto& val = splits.validation;
  std::vector<std::optional<LibraryEntry>> fitted(specs.size());
  std::vector<std::string> errors(specs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        auto model = std::make_shared<const Model>(fit_model(specs[i], ats.features, ats.target));
        LibraryEntry e;
        e.label = specs[i].to_string();
        e.spec = specs[i];
        e.provenance = specs[i].provenance();
        e.validation_predictions = model->predict(val.features);
        e.model = std::move(model);
        fitted[i] = std::move(e);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(specs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ModelLibrary lib;
  lib.validation_target = val.target;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (fitted[i]) {
      lib.entries.push_back(std::move(*fitted[i]));
    } else {
      spdlog::warn("library: skipped '{}': {}", specs[i].to_string(), errors[i]);
      lib.skipped.emplace_back(specs[i].to_string(), errors[i]);
    }
  }
  if (lib.entries.empty() && !specs.empty()) {
    throw TrainingError("library: every model fit failed (first error: " + errors.front() + ")");
  }
  return lib;
}

ModelLibrary build_library(const DataSplits& splits, const LibraryConfig& config, bool augment,
                           std::uint64_t master_seed, unsigned jobs) {
  return fit_library(splits, library_specs(config, augment, master_seed), jobs);
}

std::size_t select_best(const ModelLibrary& library, const CostSpec& criterion,
                        const std::function<bool(const LibraryEntry&)>& keep) {
  if (library.empty()) throw InvalidInputError("select_best: empty library");
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t i = 0; i < library.size(); ++i) {
    const auto& e = library.entries[i];
    if (keep && !keep(e)) continue;
    const double score = eval_mean(criterion, library.validation_target, e.validation_predictions);
    if (!best || score < best_score) {
      best = i;
      best_score = score;
    }
  }
  if (!best) throw InvalidInputError("select_best: no library model matches the filter");
  return *best;
}

void save_library(const ModelLibrary& library, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create bundle directory " + dir.string() + ": " + ec.message());
  std::ofstream manifest(dir / "manifest.txt");
  std::ofstream models(dir / "models.txt");
  std::ofstream validation(dir / "validation.txt");
  if (!manifest || !models || !validation) {
    throw IoError("cannot write model bundle in " + dir.string());
  }
  manifest << "# asymcast model bundle v1\n"
           << "# index\tprovenance\tvalidation_mse\tspec\n";
  models << "bundle 1 " << library.size() << '\n';
  validation << "target ";
  serial::write_vector(validation, library.validation_target);
  for (std::size_t i = 0; i < library.size(); ++i) {
    const auto& e = library.entries[i];
    if (!e.model) throw InvalidInputError("save_library: entry '" + e.label + "' has no model");
    const double mse = eval_mean(CostSpec::squared_error(), library.validation_target,
                                 e.validation_predictions);
    manifest << i << '\t' << provenance_name(e.provenance) << '\t' << text::format_double(mse)
             << '\t' << e.spec.to_string() << '\n';
    save_model(*e.model, models);
    validation << "pred ";
    serial::write_vector(validation, e.validation_predictions);
  }
  if (!manifest || !models || !validation) throw IoError("failed writing bundle " + dir.string());
}

ModelLibrary load_library(const std::filesystem::path& dir) {
  std::ifstream models(dir / "models.txt");
  std::ifstream validation(dir / "validation.txt");
  if (!models || !validation) throw IoError("cannot read model bundle in " + dir.string());
  serial::expect(models, "bundle");
  if (serial::read_int(models) != 1) throw IngestionError("model bundle: unsupported version", 0);
  const auto count = serial::read_size(models);
  ModelLibrary lib;
  serial::expect(validation, "target");
  lib.validation_target = serial::read_vector(validation);
  for (std::size_t i = 0; i < count; ++i) {
    auto model = std::make_shared<const Model>(load_model(models));
    LibraryEntry e;
    e.spec = model->spec();
    e.label = e.spec.to_string();
    e.provenance = e.spec.provenance();
    e.model = std::move(model);
    serial::expect(validation, "pred");
    e.validation_predictions = serial::read_vector(validation);
    if (e.validation_predictions.size() != lib.validation_target.size()) {
      throw IngestionError("model bundle: validation predictions have the wrong length", 0);
    }
    lib.entries.push_back(std::move(e));
  }
  return lib;
}

}  // namespace asymcast
