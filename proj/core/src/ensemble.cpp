#include "asymcast/ensemble.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/text.hpp"

#include <map>
#include <ostream>

namespace asymcast {

std::vector<double> EnsembleModel::weights(std::size_t library_size) const {
  std::vector<double> w(library_size, 0.0);
  if (members.empty()) return w;
  for (auto m : members) {
    if (m >= library_size) throw InvalidInputError("ensemble member index outside the library");
    w[m] += 1.0;
  }
  for (auto& x : w) x /= static_cast<double>(members.size());
  return w;
}

double EnsembleModel::score() const {
  if (trace.empty()) throw InvalidInputError("ensemble has no selection trace");
  return trace.back().ensemble_score;
}

EnsembleModel ensemble_select(const std::vector<Vector>& predictions, const Vector& actuals,
                              const CostSpec& criterion, std::size_t max_iterations) {
  criterion.validate();
  if (predictions.empty()) throw InvalidInputError("ensemble_select: empty library");
  if (actuals.size() == 0) throw InvalidInputError("ensemble_select: no actuals");
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    if (predictions[j].size() != actuals.size()) {
      throw InvalidInputError("ensemble_select: prediction vector " + std::to_string(j) +
                              " has length " + std::to_string(predictions[j].size()) +
                              ", expected " + std::to_string(actuals.size()));
    }
  }
  const auto n = actuals.size();
  auto score_of = [&](const Vector& sum, double count) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += detail::loss_unchecked(criterion, actuals[i] - sum[i] / count);
    return total / static_cast<double>(n);
  };
  auto argmin = [](const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.size(); ++j) {
      if (scores[j] < scores[best]) best = j;
    }
    return best;
  };

  EnsembleModel ens;
  ens.criterion = criterion;
  EnsembleIteration first;
  for (const auto& p : predictions) first.candidate_scores.push_back(score_of(p, 1.0));
  first.best_candidate = argmin(first.candidate_scores);
  first.adopted = true;
  first.ensemble_score = first.candidate_scores[first.best_candidate];
  ens.members.push_back(first.best_candidate);
  Vector sum = predictions[first.best_candidate];
  double current = first.ensemble_score;
  ens.trace.push_back(std::move(first));

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    EnsembleIteration step;
    step.iteration = it;
    const double count = static_cast<double>(ens.members.size() + 1);
    for (const auto& p : predictions) step.candidate_scores.push_back(score_of(sum + p, count));
    step.best_candidate = argmin(step.candidate_scores);
    const double best = step.candidate_scores[step.best_candidate];
    step.adopted = best < current;
    if (step.adopted) {
      ens.members.push_back(step.best_candidate);
      sum += predictions[step.best_candidate];
      current = best;
    }
    step.ensemble_score = current;
    const bool stop = !step.adopted;
    ens.trace.push_back(std::move(step));
    if (stop) break;
  }
  return ens;
}

Vector ensemble_predict(const EnsembleModel& ensemble, const std::vector<Vector>& predictions) {
  if (ensemble.members.empty()) throw InvalidInputError("ensemble_predict: ensemble has no members");
  const auto first = ensemble.members.front();
  if (first >= predictions.size()) {
    throw InvalidInputError("ensemble_predict: no predictions for member " + std::to_string(first));
  }
  Vector sum = Vector::Zero(predictions[first].size());
  for (auto m : ensemble.members) {
    if (m >= predictions.size()) {
      throw InvalidInputError("ensemble_predict: no predictions for member " + std::to_string(m));
    }
    if (predictions[m].size() != sum.size()) {
      throw InvalidInputError("ensemble_predict: member prediction lengths differ");
    }
    sum += predictions[m];
  }
  return sum / static_cast<double>(ensemble.members.size());
}

Vector simple_average(const std::vector<Vector>& predictions) {
  if (predictions.empty()) throw InvalidInputError("simple_average: no forecasts to combine");
  Vector sum = Vector::Zero(predictions.front().size());
  for (const auto& p : predictions) {
    if (p.size() != sum.size()) throw InvalidInputError("simple_average: forecast lengths differ");
    sum += p;
  }
  return sum / static_cast<double>(predictions.size());
}

void write_trace_csv(const EnsembleModel& ensemble, std::ostream& out) {
  out << "iteration,candidate,score,adopted\n";
  for (const auto& step : ensemble.trace) {
    for (std::size_t j = 0; j < step.candidate_scores.size(); ++j) {
      const bool adopted = step.adopted && j == step.best_candidate;
      out << step.iteration << ',' << (j + 1) << ',' << text::format_double(step.candidate_scores[j])
          << ',' << (adopted ? 1 : 0) << '\n';
    }
  }
}

FittedEnsemble::FittedEnsemble(std::vector<std::shared_ptr<const Forecaster>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw InvalidInputError("FittedEnsemble: no members");
  for (const auto& m : members_) {
    if (!m) throw InvalidInputError("FittedEnsemble: null member");
  }
}

Vector FittedEnsemble::predict(const Matrix& features) const {
  std::map<const Forecaster*, Vector> cache;
  Vector sum = Vector::Zero(features.rows());
  for (const auto& m : members_) {
    auto it = cache.find(m.get());
    if (it == cache.end()) it = cache.emplace(m.get(), m->predict(features)).first;
    sum += it->second;
  }
  return sum / static_cast<double>(members_.size());
}

}  // namespace asymcast
