#pragma once

#include "asymcast/config.hpp"
#include "asymcast/ensemble.hpp"
#include "asymcast/library.hpp"
#include "asymcast/report.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace asymcast {

/// Test-set predictions of models refit on ATS + validation, keyed by spec.
class RefitCache {
 public:
  /// Fits every spec not yet cached (up to `jobs` threads). Failures are
  /// logged and cached as missing.
  void ensure(const std::vector<ModelSpec>& specs, const Dataset& train, const Matrix& test_features,
              unsigned jobs);
  std::optional<Vector> get(const ModelSpec& spec) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::optional<Vector>> predictions_;
};

struct PreparedExperiment {
  ExperimentConfig config;
  Dataset data;
  std::uint64_t dataset_hash = 0;
  /// Standardized with ATS statistics.
  DataSplits splits;
  ModelLibrary symmetric;
  ModelLibrary augmented;
  std::shared_ptr<RefitCache> refits = std::make_shared<RefitCache>();
};

Dataset load_dataset(const ExperimentConfig& config);

/// Loads the data, splits and standardizes it, and fits both libraries.
PreparedExperiment prepare_experiment(const ExperimentConfig& config);

/// Test-set forecasts per method (rows) and asymmetry level (columns).
struct ForecastSet {
  std::vector<double> a_grid;
  std::vector<std::string> methods;
  /// predictions[method][level]; empty when the method failed.
  std::vector<std::vector<std::optional<Vector>>> predictions;
  /// Fitted markdowns, per method and level.
  std::map<std::string, std::vector<std::optional<double>>> markdowns;
  /// Human-readable notes on validation-based choices (for the manifest).
  std::vector<std::string> notes;

  void add(const std::string& method, std::vector<std::optional<Vector>> per_level);
  const std::vector<std::optional<Vector>>& at(std::string_view method) const;
};

/// Forecast stage of the method roster. Reads only ATS/validation targets.
/// Besides the roster rows it carries "MBL_inner" and "MBNL_inner", the
/// unmarked forecasts of the markdown bases.
ForecastSet forecast_roster(const PreparedExperiment& prep);

/// Forecast stage of the six ensemble variants (ES_{mse,md,qqc}_{s,a}).
ForecastSet forecast_ensembles(const PreparedExperiment& prep);

/// Evaluation stage: MQQC(a, 1) of every row on the test targets.
ResultsTable evaluate_forecasts(const ForecastSet& forecasts, const Vector& test_target,
                                const std::vector<std::string>& rows, std::string title);

/// 100 (A - B) / A, positive when B is better; undefined when A = 0.
std::optional<double> pct_diff(double a, double b);
std::vector<std::optional<double>> pct_diff(const std::vector<std::optional<double>>& a,
                                            const std::vector<std::optional<double>>& b);

ResultsTable run_roster(const PreparedExperiment& prep);
ResultsTable run_ensemble_sensitivity(const PreparedExperiment& prep);

struct SweepResult {
  ResultsTable table4;  // roster
  ResultsTable table5;  // ensemble variants
  ResultsTable table6;  // symmetric vs augmented library
  ResultsTable table7;  // selection criteria
  ResultsTable figure3; // ensembles vs QRNN
  /// Unmarked MQQC of the markdown bases, for the dominance check.
  ResultsTable inner;
  std::map<std::string, std::vector<std::optional<double>>> markdowns;
  std::vector<std::string> notes;
  std::string histograms_csv;
  std::string manifest;
};

SweepResult run_sweep(const PreparedExperiment& prep);
inline SweepResult run_sweep(const ExperimentConfig& config) {
  return run_sweep(prepare_experiment(config));
}

/// Writes table4..7 and figure3 as CSV and text, manifest.txt and, when
/// enabled, residual_histograms.csv. Throws IoError.
void emit_report(const SweepResult& result, const std::filesystem::path& dir, bool histograms = true);

}  // namespace asymcast
