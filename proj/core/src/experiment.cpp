#include "asymcast/experiment.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/markdown.hpp"
#include "asymcast/random.hpp"
#include "asymcast/split.hpp"
#include "asymcast/synth.hpp"
#include "asymcast/text.hpp"
#include "asymcast/version.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace asymcast {

void RefitCache::ensure(const std::vector<ModelSpec>& specs, const Dataset& train,
                        const Matrix& test_features, unsigned jobs) {
  std::vector<ModelSpec> todo;
  {
    std::set<std::string> seen;
    std::lock_guard lock(mutex_);
    for (const auto& s : specs) {
      const auto key = s.to_string();
      if (predictions_.count(key) || !seen.insert(key).second) continue;
      todo.push_back(s);
    }
  }
  std::vector<std::optional<Vector>> out(todo.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      try {
        out[i] = fit_model(todo[i], train.features, train.target).predict(test_features);
      } catch (const std::exception& e) {
        spdlog::warn("refit of '{}' failed: {}", todo[i].to_string(), e.what());
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(todo.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < todo.size(); ++i) predictions_[todo[i].to_string()] = std::move(out[i]);
}

std::optional<Vector> RefitCache::get(const ModelSpec& spec) const {
  std::lock_guard lock(mutex_);
  const auto it = predictions_.find(spec.to_string());
  if (it == predictions_.end()) return std::nullopt;
  return it->second;
}

std::size_t RefitCache::size() const {
  std::lock_guard lock(mutex_);
  return predictions_.size();
}

Dataset load_dataset(const ExperimentConfig& config) {
  if (config.data.kind == DataSource::Kind::Csv) {
    return load_csv(config.data.csv, Schema::load(config.data.schema));
  }
  SynthConfig synth = config.data.synth;
  synth.seed = config.seed;
  return synth_generate(synth);
}

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  PreparedExperiment prep;
  prep.config = config;
  prep.data = load_dataset(config);
  prep.data.validate();
  prep.dataset_hash = dataset_hash(prep.data);
  prep.splits = standardize(split(prep.data, derive_seed(config.seed, 1)));

  const auto library_seed = derive_seed(config.seed, 2);
  const auto base = library_specs(config.library, false, library_seed);
  const auto all = library_specs(config.library, true, library_seed);
  // The augmented list extends the base list, so fit once and share.
  prep.augmented = fit_library(prep.splits, all, config.jobs);
  prep.symmetric.validation_target = prep.augmented.validation_target;
  for (const auto& e : prep.augmented.entries) {
    if (e.provenance == Provenance::Symmetric) prep.symmetric.entries.push_back(e);
  }
  for (const auto& s : prep.augmented.skipped) {
    for (const auto& b : base) {
      if (b.to_string() == s.first) prep.symmetric.skipped.push_back(s);
    }
  }
  if (prep.symmetric.empty()) throw TrainingError("experiment: no symmetric library model could be fit");
  spdlog::info("library: {} symmetric, {} augmented models", prep.symmetric.size(),
               prep.augmented.size());
  return prep;
}

void ForecastSet::add(const std::string& method, std::vector<std::optional<Vector>> per_level) {
  if (per_level.size() != a_grid.size()) {
    throw InvalidInputError("forecast row '" + method + "' does not cover the asymmetry grid");
  }
  methods.push_back(method);
  predictions.push_back(std::move(per_level));
}

const std::vector<std::optional<Vector>>& ForecastSet::at(std::string_view method) const {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i] == method) return predictions[i];
  }
  throw InvalidInputError("no forecasts for method '" + std::string(method) + "'");
}

namespace {

CostSpec qqc_level(double a) { return CostSpec::qqc(a, 1.0); }

std::vector<std::optional<Vector>> same_for_all(const std::optional<Vector>& v, std::size_t levels) {
  return std::vector<std::optional<Vector>>(levels, v);
}

std::string format_md(double md) { return text::format_fixed(md, 6); }

// Index of the augmented-library net with the given loss that scores best on
// validation under QQC(a, 1), if any.
std::optional<std::size_t> best_asymmetric_net(const ModelLibrary& lib, const LossMode& wanted,
                                               double a) {
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const auto* nn = std::get_if<NeuralNetParams>(&lib.entries[i].spec.params);
    if (!nn || nn->loss != wanted) continue;
    const double s = eval_mean(qqc_level(a), lib.validation_target, lib.entries[i].validation_predictions);
    if (!best || s < best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

ModelSpec fallback_net(const PreparedExperiment& prep, const LossMode& loss, std::size_t level) {
  NNConfig c = prep.config.library.nn_base;
  c.hidden_nodes = prep.config.library.augment_hidden.empty() ? 4 : prep.config.library.augment_hidden.front();
  c.lambda1 = c.lambda2 = prep.config.library.augment_lambda;
  c.seed = derive_seed(prep.config.seed, 1000 + level);
  return ModelSpec{NeuralNetParams{c, loss}};
}

std::optional<Vector> marked_down(const std::optional<Vector>& test, const Vector& validation,
                                  const Vector& actuals, double a, std::optional<double>& md_out) {
  if (!test) return std::nullopt;
  try {
    const auto fit = fit_markdown(validation, actuals, qqc_level(a));
    md_out = fit.md;
    return apply_markdown(*test, fit.md);
  } catch (const Error& e) {
    spdlog::warn("markdown at a={} failed: {}", a, e.what());
    return std::nullopt;
  }
}

// Test forecasts of an ensemble whose members are refit on ATS + validation.
std::optional<Vector> ensemble_test(const PreparedExperiment& prep, const ModelLibrary& lib,
                                    const EnsembleModel& ens) {
  std::vector<Vector> preds(lib.size());
  for (auto m : ens.members) {
    if (preds[m].size() > 0) continue;
    auto p = prep.refits->get(lib.entries[m].spec);
    if (!p) return std::nullopt;
    preds[m] = std::move(*p);
  }
  return ensemble_predict(ens, preds);
}

std::string describe(const ModelLibrary& lib, const EnsembleModel& ens) {
  const auto w = ens.weights(lib.size());
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (!out.empty()) out += "; ";
    out += text::format_fixed(w[i], 6) + " x " + lib.entries[i].label;
  }
  return out;
}

}  // namespace

ForecastSet forecast_roster(const PreparedExperiment& prep) {
  const auto& cfg = prep.config;
  const auto& val_y = prep.splits.validation.target;
  const auto levels = cfg.a_grid.size();
  ForecastSet out;
  out.a_grid = cfg.a_grid;

  const auto linear = [](const LibraryEntry& e) { return is_linear_family(e.spec.family()); };
  const auto nonlinear = [](const LibraryEntry& e) { return !is_linear_family(e.spec.family()); };
  const auto mse = CostSpec::squared_error();
  std::optional<std::size_t> best_lin, best_nonlin;
  try {
    best_lin = select_best(prep.symmetric, mse, linear);
  } catch (const InvalidInputError&) {}
  try {
    best_nonlin = select_best(prep.symmetric, mse, nonlinear);
  } catch (const InvalidInputError&) {}

  // Validation-based choices first, then one parallel refit pass.
  std::vector<ModelSpec> qr(levels), qrnn(levels), nnac(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    const double a = cfg.a_grid[l];
    const double tau = tau_from_weights(a, 1.0);
    qr[l] = ModelSpec{QuantileParams{tau}};
    const auto pin = LossMode::pinball(tau);
    const auto approx = LossMode::qqc_approx(a, 1.0);
    const auto q = best_asymmetric_net(prep.augmented, pin, a);
    const auto n = best_asymmetric_net(prep.augmented, approx, a);
    qrnn[l] = q ? prep.augmented.entries[*q].spec : fallback_net(prep, pin, l);
    nnac[l] = n ? prep.augmented.entries[*n].spec : fallback_net(prep, approx, 2 * levels + l);
    if (cfg.roster.qrnn) out.notes.push_back("QRNN a=" + text::format_double(a) + ": " + qrnn[l].to_string());
    if (cfg.roster.nnac) out.notes.push_back("NNAC a=" + text::format_double(a) + ": " + nnac[l].to_string());
  }
  std::vector<ModelSpec> needed;
  if (cfg.roster.lin_reg) needed.push_back(ModelSpec{OlsParams{}});
  if (cfg.roster.qr) needed.insert(needed.end(), qr.begin(), qr.end());
  if (cfg.roster.qrnn) needed.insert(needed.end(), qrnn.begin(), qrnn.end());
  if (cfg.roster.nnac) needed.insert(needed.end(), nnac.begin(), nnac.end());
  if (best_lin) {
    needed.push_back(prep.symmetric.entries[*best_lin].spec);
    out.notes.push_back("MBL base: " + prep.symmetric.entries[*best_lin].label);
  }
  if (best_nonlin) {
    needed.push_back(prep.symmetric.entries[*best_nonlin].spec);
    out.notes.push_back("MBNL base: " + prep.symmetric.entries[*best_nonlin].label);
  }
  prep.refits->ensure(needed, prep.splits.full_train, prep.splits.test.features, cfg.jobs);

  auto per_level = [&](const std::vector<ModelSpec>& specs) {
    std::vector<std::optional<Vector>> row;
    for (const auto& s : specs) row.push_back(prep.refits->get(s));
    return row;
  };
  if (cfg.roster.lin_reg) out.add("LinReg", same_for_all(prep.refits->get(ModelSpec{OlsParams{}}), levels));
  if (cfg.roster.qr) out.add("QR", per_level(qr));
  if (cfg.roster.qrnn) out.add("QRNN", per_level(qrnn));
  if (cfg.roster.nnac) out.add("NNAC", per_level(nnac));

  auto markdown_row = [&](const std::string& name, std::optional<std::size_t> base) {
    std::vector<std::optional<Vector>> row(levels);
    std::vector<std::optional<double>> mds(levels);
    std::optional<Vector> inner;
    if (base) {
      const auto& entry = prep.symmetric.entries[*base];
      inner = prep.refits->get(entry.spec);
      for (std::size_t l = 0; l < levels; ++l) {
        row[l] = marked_down(inner, entry.validation_predictions, val_y, cfg.a_grid[l], mds[l]);
      }
    }
    out.add(name, std::move(row));
    out.add(name + "_inner", same_for_all(inner, levels));
    out.markdowns[name] = std::move(mds);
  };
  if (cfg.roster.mbl) markdown_row("MBL", best_lin);
  if (cfg.roster.mbnl) markdown_row("MBNL", best_nonlin);

  const bool all_five = cfg.roster.qr && cfg.roster.qrnn && cfg.roster.nnac && cfg.roster.mbl && cfg.roster.mbnl;
  if (cfg.roster.es_av && all_five) {
    std::vector<std::optional<Vector>> row(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      std::vector<Vector> parts;
      for (const auto* m : {"QR", "QRNN", "NNAC", "MBL", "MBNL"}) {
        if (const auto& p = out.at(m)[l]) parts.push_back(*p);
      }
      if (parts.size() == 5) row[l] = simple_average(parts);
    }
    out.add("ES_av", std::move(row));
  }
  return out;
}

ForecastSet forecast_ensembles(const PreparedExperiment& prep) {
  const auto& cfg = prep.config;
  const auto& val_y = prep.splits.validation.target;
  const auto levels = cfg.a_grid.size();
  ForecastSet out;
  out.a_grid = cfg.a_grid;

  struct Variant {
    const ModelLibrary* lib;
    std::string suffix;
    EnsembleModel mse;
    std::vector<EnsembleModel> qqc;
  };
  std::vector<Variant> variants = {{&prep.symmetric, "s", {}, {}}, {&prep.augmented, "a", {}, {}}};
  std::vector<ModelSpec> needed;
  for (auto& v : variants) {
    const auto preds = v.lib->validation_predictions();
    v.mse = ensemble_select(preds, val_y, CostSpec::squared_error());
    for (double a : cfg.a_grid) v.qqc.push_back(ensemble_select(preds, val_y, qqc_level(a)));
    for (auto m : v.mse.members) needed.push_back(v.lib->entries[m].spec);
    for (const auto& e : v.qqc) {
      for (auto m : e.members) needed.push_back(v.lib->entries[m].spec);
    }
  }
  prep.refits->ensure(needed, prep.splits.full_train, prep.splits.test.features, cfg.jobs);

  for (auto& v : variants) {
    const auto preds = v.lib->validation_predictions();
    const Vector val_mse = ensemble_predict(v.mse, preds);
    const auto test_mse = ensemble_test(prep, *v.lib, v.mse);
    out.notes.push_back("ES_mse_" + v.suffix + ": " + describe(*v.lib, v.mse));

    std::vector<std::optional<Vector>> md_row(levels), qqc_row(levels);
    std::vector<std::optional<double>> mds(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      md_row[l] = marked_down(test_mse, val_mse, val_y, cfg.a_grid[l], mds[l]);
      qqc_row[l] = ensemble_test(prep, *v.lib, v.qqc[l]);
      out.notes.push_back("ES_qqc_" + v.suffix + " a=" + text::format_double(cfg.a_grid[l]) + ": " +
                          describe(*v.lib, v.qqc[l]));
    }
    out.add("ES_mse_" + v.suffix, same_for_all(test_mse, levels));
    out.add("ES_md_" + v.suffix, std::move(md_row));
    out.add("ES_qqc_" + v.suffix, std::move(qqc_row));
    out.markdowns["ES_md_" + v.suffix] = std::move(mds);
  }
  // Row order of the sensitivity table.
  ForecastSet ordered;
  ordered.a_grid = out.a_grid;
  ordered.notes = out.notes;
  ordered.markdowns = out.markdowns;
  for (const auto* name : {"ES_mse_s", "ES_md_s", "ES_qqc_s", "ES_mse_a", "ES_md_a", "ES_qqc_a"}) {
    ordered.add(name, out.at(name));
  }
  return ordered;
}

ResultsTable evaluate_forecasts(const ForecastSet& forecasts, const Vector& test_target,
                                const std::vector<std::string>& rows, std::string title) {
  ResultsTable table;
  table.title = std::move(title);
  table.columns = level_columns(forecasts.a_grid);
  for (const auto& name : rows) {
    const auto& preds = forecasts.at(name);
    std::vector<std::optional<double>> cells;
    for (std::size_t l = 0; l < forecasts.a_grid.size(); ++l) {
      if (preds[l]) cells.emplace_back(eval_mean(qqc_level(forecasts.a_grid[l]), test_target, *preds[l]));
      else cells.emplace_back();
    }
    table.add_row(name, std::move(cells));
  }
  return table;
}

std::optional<double> pct_diff(double a, double b) {
  if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b)) return std::nullopt;
  return 100.0 * (a - b) / a;
}

std::vector<std::optional<double>> pct_diff(const std::vector<std::optional<double>>& a,
                                            const std::vector<std::optional<double>>& b) {
  if (a.size() != b.size()) throw InvalidInputError("pct_diff: rows have different lengths");
  std::vector<std::optional<double>> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(a[i] && b[i] ? pct_diff(*a[i], *b[i]) : std::nullopt);
  }
  return out;
}

namespace {

std::vector<std::string> roster_rows(const ForecastSet& f) {
  std::vector<std::string> rows;
  for (const auto& m : f.methods) {
    if (m.size() < 6 || m.substr(m.size() - 6) != "_inner") rows.push_back(m);
  }
  return rows;
}

std::vector<std::string> inner_rows(const ForecastSet& f) {
  std::vector<std::string> rows;
  for (const auto& m : f.methods) {
    if (m.size() >= 6 && m.substr(m.size() - 6) == "_inner") rows.push_back(m);
  }
  return rows;
}

constexpr double kHistLow = -0.3;
constexpr double kHistHigh = 0.3;
constexpr int kHistBins = 60;

void append_histograms(std::ostringstream& out, const ForecastSet& f, const Vector& y,
                       const std::vector<std::string>& rows) {
  const double width = (kHistHigh - kHistLow) / kHistBins;
  for (const auto& name : rows) {
    const auto& preds = f.at(name);
    for (std::size_t l = 0; l < f.a_grid.size(); ++l) {
      if (!preds[l]) continue;
      std::vector<std::size_t> counts(kHistBins, 0);
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double e = y[i] - (*preds[l])[i];
        const int bin = std::clamp(static_cast<int>(std::floor((e - kHistLow) / width)), 0, kHistBins - 1);
        ++counts[static_cast<std::size_t>(bin)];
      }
      for (int b = 0; b < kHistBins; ++b) {
        out << name << ',' << text::format_double(f.a_grid[l]) << ','
            << text::format_fixed(kHistLow + b * width, 3) << ','
            << text::format_fixed(kHistLow + (b + 1) * width, 3) << ',' << counts[static_cast<std::size_t>(b)]
            << '\n';
      }
    }
  }
}

}  // namespace

ResultsTable run_roster(const PreparedExperiment& prep) {
  const auto f = forecast_roster(prep);
  return evaluate_forecasts(f, prep.splits.test.target, roster_rows(f),
                            "Linear vs nonlinear remedy methods (MQQC, test set)");
}

ResultsTable run_ensemble_sensitivity(const PreparedExperiment& prep) {
  const auto f = forecast_ensembles(prep);
  return evaluate_forecasts(f, prep.splits.test.target, f.methods,
                            "Sensitivity analysis of ensembles (MQQC, test set)");
}

SweepResult run_sweep(const PreparedExperiment& prep) {
  const auto& cfg = prep.config;
  const auto roster = forecast_roster(prep);
  const auto ensembles = forecast_ensembles(prep);
  const auto& y = prep.splits.test.target;

  SweepResult r;
  r.table4 = evaluate_forecasts(roster, y, roster_rows(roster),
                                "Linear vs nonlinear remedy methods (MQQC, test set)");
  r.inner = evaluate_forecasts(roster, y, inner_rows(roster), "Unmarked markdown bases (MQQC)");
  r.table5 = evaluate_forecasts(ensembles, y, ensembles.methods,
                                "Sensitivity analysis of ensembles (MQQC, test set)");

  const auto cols = level_columns(cfg.a_grid);
  r.table6.title = "Symmetric vs augmented library (% improvement)";
  r.table6.row_header = "criterion";
  r.table6.columns = cols;
  for (const auto& [row, key] : {std::pair{"MSE", "mse"}, {"MD", "md"}, {"QQC", "qqc"}}) {
    const std::string k = key;
    r.table6.add_row(row, pct_diff(r.table5.row("ES_" + k + "_s"), r.table5.row("ES_" + k + "_a")));
  }
  r.table7.title = "Selection criteria compared (% improvement of the latter)";
  r.table7.row_header = "comparison";
  r.table7.columns = cols;
  for (const auto& [first, second] : {std::pair{"mse", "md"}, {"mse", "qqc"}, {"md", "qqc"}}) {
    for (const auto& [lib, suffix] : {std::pair{"symmetric", "s"}, {"augmented", "a"}}) {
      const std::string f = first, s = second, sf = suffix;
      std::string name = f + "_vs_" + s + "_" + lib;
      for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      r.table7.add_row(name, pct_diff(r.table5.row("ES_" + f + "_" + sf), r.table5.row("ES_" + s + "_" + sf)));
    }
  }
  r.figure3.title = "Ensembles vs QRNN (% improvement over QRNN)";
  r.figure3.columns = cols;
  if (r.table4.has_row("QRNN")) {
    if (r.table4.has_row("ES_av")) r.figure3.add_row("ES_av", pct_diff(r.table4.row("QRNN"), r.table4.row("ES_av")));
    r.figure3.add_row("ES_qqc_a", pct_diff(r.table4.row("QRNN"), r.table5.row("ES_qqc_a")));
  }

  r.markdowns = roster.markdowns;
  r.markdowns.insert(ensembles.markdowns.begin(), ensembles.markdowns.end());
  r.notes = roster.notes;
  r.notes.insert(r.notes.end(), ensembles.notes.begin(), ensembles.notes.end());

  std::ostringstream hist;
  hist << "method,a,bin_low,bin_high,count\n";
  append_histograms(hist, roster, y, roster_rows(roster));
  append_histograms(hist, ensembles, y, ensembles.methods);
  r.histograms_csv = hist.str();

  std::ostringstream m;
  m << "asymcast " << kVersion << " sweep manifest\n"
    << "seed = " << cfg.seed << '\n'
    << "dataset_hash = " << std::hex << prep.dataset_hash << std::dec << '\n'
    << "rows = " << prep.data.rows() << " (ats " << prep.splits.ats.rows() << ", validation "
    << prep.splits.validation.rows() << ", test " << prep.splits.test.rows() << ")\n"
    << "library_symmetric = " << prep.symmetric.size() << '\n'
    << "library_augmented = " << prep.augmented.size() << '\n';
  for (const auto& [spec, why] : prep.augmented.skipped) m << "skipped = " << spec << " (" << why << ")\n";
  m << "\n[config]\n" << config_to_text(cfg) << "\n[choices]\n";
  for (const auto& n : r.notes) m << n << '\n';
  m << "\n[markdown]\nmethod";
  for (const auto& c : cols) m << ',' << c;
  m << '\n';
  for (const auto& [name, mds] : r.markdowns) {
    m << name;
    for (const auto& md : mds) m << ',' << (md ? format_md(*md) : "NA");
    m << '\n';
  }
  m << "\n[unmarked]\n";
  std::ostringstream inner_csv;
  write_table_csv(r.inner, inner_csv);
  m << inner_csv.str();
  r.manifest = m.str();
  return r;
}

void emit_report(const SweepResult& result, const std::filesystem::path& dir, bool histograms) {
  auto csv = [](const ResultsTable& t) {
    std::ostringstream s;
    write_table_csv(t, s);
    return s.str();
  };
  write_text_file(dir, "table4.csv", csv(result.table4));
  write_text_file(dir, "table5.csv", csv(result.table5));
  write_text_file(dir, "table6.csv", csv(result.table6));
  write_text_file(dir, "table7.csv", csv(result.table7));
  write_text_file(dir, "figure3.csv", csv(result.figure3));
  write_text_file(dir, "tables.txt",
                  render_table(result.table4) + '\n' + render_table(result.table5) + '\n' +
                      render_table(result.table6, true) + '\n' + render_table(result.table7, true) +
                      '\n' + render_table(result.figure3, true));
  write_text_file(dir, "manifest.txt", result.manifest);
  if (histograms) write_text_file(dir, "residual_histograms.csv", result.histograms_csv);
}

}  // namespace asymcast
