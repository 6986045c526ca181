#pragma once

#include "asymcast/loss.hpp"
#include "asymcast/models/model.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace asymcast {

struct EnsembleIteration {
  std::size_t iteration = 0;
  /// Score of (current members + j) for every library model j. Iteration 0
  /// holds the single-model scores.
  std::vector<double> candidate_scores;
  std::size_t best_candidate = 0;
  bool adopted = false;
  /// Ensemble score after this iteration.
  double ensemble_score = 0.0;
};

struct EnsembleModel {
  /// Library indices in order of adoption; repeats allowed.
  std::vector<std::size_t> members;
  CostSpec criterion;
  std::vector<EnsembleIteration> trace;

  /// Multiplicity / |members| for indices 0..library_size-1.
  std::vector<double> weights(std::size_t library_size) const;
  double score() const;
};

/// Forward stepwise selection with replacement. Starts from the best single
/// model and keeps adding the model whose inclusion gives the lowest mean
/// criterion loss of the equal-weight average, as long as that strictly
/// improves the current score. Ties go to the lowest index.
EnsembleModel ensemble_select(const std::vector<Vector>& predictions, const Vector& actuals,
                              const CostSpec& criterion, std::size_t max_iterations = 100);

/// Average of the member predictions, counting repeats.
Vector ensemble_predict(const EnsembleModel& ensemble, const std::vector<Vector>& predictions);

Vector simple_average(const std::vector<Vector>& predictions);

/// CSV with columns iteration, candidate, score, adopted (one row per
/// candidate per iteration; candidate indices are 1-based).
void write_trace_csv(const EnsembleModel& ensemble, std::ostream& out);

/// Equal-weight average of a multiset of forecasters.
class FittedEnsemble final : public Forecaster {
 public:
  explicit FittedEnsemble(std::vector<std::shared_ptr<const Forecaster>> members);

  Vector predict(const Matrix& features) const override;
  std::size_t size() const noexcept { return members_.size(); }

 private:
  std::vector<std::shared_ptr<const Forecaster>> members_;
};

}  // namespace asymcast
