#include "commands.hpp"

#include <asymcast/ensemble.hpp>
#include <asymcast/errors.hpp>
#include <asymcast/experiment.hpp>
#include <asymcast/markdown.hpp>
#include <asymcast/report.hpp>
#include <asymcast/text.hpp>
#include <asymcast/verify.hpp>

#include <fstream>
#include <sstream>

namespace asymcast::cli {

ExperimentConfig resolve_config(const Invocation& inv, bool require_file) {
  std::vector<std::string> overrides = inv.overrides;
  if (inv.seed) overrides.push_back("run.seed=" + std::to_string(*inv.seed));
  if (inv.jobs) overrides.push_back("run.jobs=" + std::to_string(*inv.jobs));
  if (inv.out) overrides.push_back("output.dir=" + inv.out->string());
  if (inv.config) return load_config(*inv.config, overrides);
  if (require_file) throw ConfigError("this command needs --config PATH");
  return parse_config("", overrides);
}

int cmd_synth(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.data.kind != DataSource::Kind::Synth) {
    throw ConfigError("synth: [data] source must be synth");
  }
  const auto data = load_dataset(cfg);
  std::ostringstream csv;
  const auto schema = write_csv(data, csv);
  write_text_file(cfg.output_dir, "data.csv", csv.str());
  write_text_file(cfg.output_dir, "schema.txt", schema.to_text());
  out << "wrote " << data.rows() << " rows to " << (cfg.output_dir / "data.csv").string() << '\n'
      << "dataset_hash " << std::hex << dataset_hash(data) << std::dec << '\n';
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& out) {
  const auto prep = prepare_experiment(cfg);
  const auto& lib = cfg.augment ? prep.augmented : prep.symmetric;
  const auto dir = cfg.output_dir / "library";
  save_library(lib, dir);
  out << "trained " << lib.size() << " models (" << lib.skipped.size() << " skipped)\n"
      << "bundle " << dir.string() << '\n';
  return 0;
}

int cmd_select(const ExperimentConfig& cfg, std::ostream& out) {
  const auto dir = cfg.output_dir / "library";
  const auto lib = load_library(dir);
  const auto preds = lib.validation_predictions();
  const auto& y = lib.validation_target;

  std::ostringstream m;
  m << "library " << dir.string() << " (" << lib.size() << " models)\n";
  auto members = [&](const EnsembleModel& e) {
    const auto w = e.weights(lib.size());
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) s += "  " + text::format_fixed(w[i], 6) + " " + lib.entries[i].label + '\n';
    }
    return s;
  };
  const auto best = select_best(lib, CostSpec::squared_error());
  m << "best_single_mse " << lib.entries[best].label << '\n';

  const auto es_mse = ensemble_select(preds, y, CostSpec::squared_error());
  m << "\n[ES_mse] validation score " << text::format_double(es_mse.score()) << '\n' << members(es_mse);
  std::ofstream trace(cfg.output_dir / "trace_mse.csv");
  write_trace_csv(es_mse, trace);
  const Vector val_mse = ensemble_predict(es_mse, preds);

  m << "\n[markdown of ES_mse]\n";
  for (double a : cfg.a_grid) {
    const auto fit = fit_markdown(val_mse, y, CostSpec::qqc(a, 1.0));
    m << "a=" << text::format_double(a) << " md=" << text::format_fixed(fit.md, 6) << '\n';
  }
  for (double a : cfg.a_grid) {
    const auto es = ensemble_select(preds, y, CostSpec::qqc(a, 1.0));
    m << "\n[ES_qqc a=" << text::format_double(a) << "] validation score "
      << text::format_double(es.score()) << '\n' << members(es);
  }
  write_text_file(cfg.output_dir, "selection.txt", m.str());
  out << m.str();
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  const auto result = run_sweep(cfg);
  emit_report(result, cfg.output_dir, cfg.histograms);
  out << render_table(result.table4) << '\n' << render_table(result.table5) << '\n'
      << render_table(result.table6, true) << '\n' << render_table(result.table7, true) << '\n'
      << render_table(result.figure3, true) << '\n'
      << "reports written to " << cfg.output_dir.string() << '\n';
  return 0;
}

int cmd_report(const ExperimentConfig& cfg, std::ostream& out) {
  std::string text_out;
  for (const auto* name : {"table4", "table5", "table6", "table7", "figure3"}) {
    const auto path = cfg.output_dir / (std::string(name) + ".csv");
    std::ifstream in(path);
    if (!in) throw IoError("report: cannot read " + path.string() + " (run sweep first)");
    auto table = read_table_csv(in);
    table.title = name;
    const bool percent = std::string(name) != "table4" && std::string(name) != "table5";
    text_out += render_table(table, percent) + '\n';
  }
  out << text_out;
  return 0;
}

int cmd_verify(std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_builtin_checks()) {
    out << r.name << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.detail << ")\n";
    ok = ok && r.pass;
  }
  if (!ok) throw VerificationError("one or more built-in checks failed");
  return 0;
}

}  // namespace asymcast::cli
