#include "asymcast/config.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace asymcast {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"data", {"source", "path", "schema", "n", "noise_sd", "drift"}},
      {"run", {"seed", "jobs"}},
      {"sweep", {"a_grid"}},
      {"library",
       {"families", "ols", "ridge_lambda", "knn_k", "knn_algorithm", "tree_cp", "tree_min_node",
        "nn_hidden", "nn_lambda", "nn_activation", "nn_epochs", "nn_learning_rate",
        "nn_batch_size", "bagged_bags", "forest_trees", "forest_mtry", "ensemble_tree_cp",
        "ensemble_tree_min_node"}},
      {"augment", {"enabled", "a", "hidden", "lambda"}},
      {"roster", {"lin_reg", "qr", "qrnn", "nnac", "mbl", "mbnl", "es_av"}},
      {"output", {"dir", "histograms"}},
  };
  return keys;
}

std::string where(const std::string& section, const std::string& key) {
  return "config [" + section + "] " + key + ": ";
}

double to_real(const std::string& s, const std::string& sec, const std::string& key) {
  const auto v = text::parse_double(text::trim(s));
  if (!v) throw ConfigError(where(sec, key) + "not a number: '" + s + "'");
  return *v;
}

std::uint64_t to_count(const std::string& s, const std::string& sec, const std::string& key) {
  const auto v = text::parse_uint(text::trim(s));
  if (!v) throw ConfigError(where(sec, key) + "not a non-negative integer: '" + s + "'");
  return *v;
}

bool to_bool(const std::string& s, const std::string& sec, const std::string& key) {
  const auto v = text::lower(text::trim(s));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(where(sec, key) + "expected true or false, got '" + s + "'");
}

std::vector<double> to_reals(const std::string& s, const std::string& sec, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : text::split_list(s, ',')) {
    if (!text::trim(item).empty()) out.push_back(to_real(item, sec, key));
  }
  return out;
}

std::vector<std::size_t> to_counts(const std::string& s, const std::string& sec,
                                   const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& item : text::split_list(s, ',')) {
    if (!text::trim(item).empty()) out.push_back(to_count(item, sec, key));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += text::format_double(v);
    else out += std::to_string(v);
  }
  return out;
}

// Disables every family not named in the list.
void restrict_families(LibraryConfig& lib, const std::string& list) {
  std::set<ModelFamily> enabled;
  for (const auto& item : text::split_list(list, ',')) {
    if (text::trim(item).empty()) continue;
    enabled.insert(parse_model_family(item));
  }
  auto off = [&](ModelFamily f) { return enabled.count(f) == 0; };
  if (off(ModelFamily::OLS)) lib.ols = false;
  if (off(ModelFamily::Ridge)) lib.ridge_lambda.clear();
  if (off(ModelFamily::KNN)) lib.knn_k.clear();
  if (off(ModelFamily::Tree)) lib.tree_cp.clear();
  if (off(ModelFamily::NeuralNet)) lib.nn_hidden.clear();
  if (off(ModelFamily::BaggedTree)) lib.bagged_bags.clear();
  if (off(ModelFamily::RandomForest)) lib.forest_trees.clear();
  if (enabled.count(ModelFamily::QuantileReg)) {
    throw ConfigError(
        "config [library] families: quantile models are asymmetric and enter through [augment]");
  }
}

void apply(ExperimentConfig& cfg, const std::string& sec, const std::string& key,
           const std::string& value) {
  const auto& keys = known_keys();
  const auto it = keys.find(sec);
  if (it == keys.end()) throw ConfigError("config: unknown section [" + sec + "]");
  if (!it->second.count(key)) throw ConfigError("config: unknown key '" + key + "' in [" + sec + "]");
  auto& lib = cfg.library;
  const std::string v(text::trim(value));
  if (sec == "data") {
    if (key == "source") {
      const auto s = text::lower(v);
      if (s == "synth") cfg.data.kind = DataSource::Kind::Synth;
      else if (s == "csv") cfg.data.kind = DataSource::Kind::Csv;
      else throw ConfigError(where(sec, key) + "expected synth or csv, got '" + v + "'");
    } else if (key == "path") {
      cfg.data.csv = v;
    } else if (key == "schema") {
      cfg.data.schema = v;
    } else if (key == "n") {
      cfg.data.synth.n = to_count(v, sec, key);
    } else if (key == "noise_sd") {
      cfg.data.synth.noise_sd = to_real(v, sec, key);
    } else if (key == "drift") {
      cfg.data.synth.drift = to_real(v, sec, key);
    }
  } else if (sec == "run") {
    if (key == "seed") cfg.seed = to_count(v, sec, key);
    else if (key == "jobs") cfg.jobs = static_cast<unsigned>(to_count(v, sec, key));
  } else if (sec == "sweep") {
    cfg.a_grid = to_reals(v, sec, key);
  } else if (sec == "library") {
    if (key == "families") restrict_families(lib, v);
    else if (key == "ols") lib.ols = to_bool(v, sec, key);
    else if (key == "ridge_lambda") lib.ridge_lambda = to_reals(v, sec, key);
    else if (key == "knn_k") lib.knn_k = to_counts(v, sec, key);
    else if (key == "knn_algorithm") {
      const auto s = text::lower(v);
      if (s == "kdtree") lib.knn_algorithm = KnnAlgorithm::KdTree;
      else if (s == "brute") lib.knn_algorithm = KnnAlgorithm::BruteForce;
      else throw ConfigError(where(sec, key) + "expected kdtree or brute, got '" + v + "'");
    } else if (key == "tree_cp") lib.tree_cp = to_reals(v, sec, key);
    else if (key == "tree_min_node") lib.tree_min_node = to_counts(v, sec, key);
    else if (key == "nn_hidden") lib.nn_hidden = to_counts(v, sec, key);
    else if (key == "nn_lambda") lib.nn_lambda = to_reals(v, sec, key);
    else if (key == "nn_activation") {
      const auto s = text::lower(v);
      if (s == "logistic") lib.nn_base.activation = Activation::Logistic;
      else if (s == "tanh") lib.nn_base.activation = Activation::Tanh;
      else throw ConfigError(where(sec, key) + "expected logistic or tanh, got '" + v + "'");
    } else if (key == "nn_epochs") lib.nn_base.epochs = to_count(v, sec, key);
    else if (key == "nn_learning_rate") lib.nn_base.learning_rate = to_real(v, sec, key);
    else if (key == "nn_batch_size") lib.nn_base.batch_size = to_count(v, sec, key);
    else if (key == "bagged_bags") lib.bagged_bags = to_counts(v, sec, key);
    else if (key == "forest_trees") lib.forest_trees = to_counts(v, sec, key);
    else if (key == "forest_mtry") lib.forest_mtry = to_counts(v, sec, key);
    else if (key == "ensemble_tree_cp") lib.ensemble_tree.complexity = to_real(v, sec, key);
    else if (key == "ensemble_tree_min_node") lib.ensemble_tree.min_node = to_count(v, sec, key);
  } else if (sec == "augment") {
    if (key == "enabled") cfg.augment = to_bool(v, sec, key);
    else if (key == "a") lib.augment_a = to_reals(v, sec, key);
    else if (key == "hidden") lib.augment_hidden = to_counts(v, sec, key);
    else if (key == "lambda") lib.augment_lambda = to_real(v, sec, key);
  } else if (sec == "roster") {
    const bool on = to_bool(v, sec, key);
    auto& r = cfg.roster;
    if (key == "lin_reg") r.lin_reg = on;
    else if (key == "qr") r.qr = on;
    else if (key == "qrnn") r.qrnn = on;
    else if (key == "nnac") r.nnac = on;
    else if (key == "mbl") r.mbl = on;
    else if (key == "mbnl") r.mbnl = on;
    else if (key == "es_av") r.es_av = on;
  } else if (sec == "output") {
    if (key == "dir") cfg.output_dir = v;
    else if (key == "histograms") cfg.histograms = to_bool(v, sec, key);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (a_grid.empty()) throw ConfigError("config [sweep] a_grid: at least one level is required");
  for (double a : a_grid) {
    if (!(a > 0.0 && a <= 1.0)) {
      throw ConfigError("config [sweep] a_grid: levels must lie in (0, 1], got " +
                        text::format_double(a));
    }
  }
  if (jobs == 0) throw ConfigError("config [run] jobs: must be at least 1");
  if (data.kind == DataSource::Kind::Csv && (data.csv.empty() || data.schema.empty())) {
    throw ConfigError("config [data]: csv source needs both path and schema");
  }
  if (data.kind == DataSource::Kind::Synth) data.synth.validate();
  library.validate();
}

ExperimentConfig parse_config(std::string_view text_in, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  std::istringstream in{std::string(text_in)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' must live inside a [section]");
    }
    for (const auto& [key, value] : body) apply(cfg, section, key, value.data());
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override '" + ov + "': expected section.key=value");
    }
    apply(cfg, std::string(text::trim(ov.substr(0, dot))),
          std::string(text::trim(ov.substr(dot + 1, eq - dot - 1))),
          ov.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str(), overrides);
}

std::string config_to_text(const ExperimentConfig& c) {
  const auto& lib = c.library;
  std::ostringstream out;
  out << "[data]\n"
      << "source = " << (c.data.kind == DataSource::Kind::Synth ? "synth" : "csv") << '\n';
  if (c.data.kind == DataSource::Kind::Csv) {
    out << "path = " << c.data.csv.string() << '\n' << "schema = " << c.data.schema.string() << '\n';
  }
  out << "n = " << c.data.synth.n << '\n'
      << "noise_sd = " << text::format_double(c.data.synth.noise_sd) << '\n'
      << "drift = " << text::format_double(c.data.synth.drift) << "\n\n"
      << "[run]\nseed = " << c.seed << "\njobs = " << c.jobs << "\n\n"
      << "[sweep]\na_grid = " << join(c.a_grid) << "\n\n"
      << "[library]\n"
      << "ols = " << (lib.ols ? "true" : "false") << '\n'
      << "ridge_lambda = " << join(lib.ridge_lambda) << '\n'
      << "knn_k = " << join(lib.knn_k) << '\n'
      << "knn_algorithm = " << (lib.knn_algorithm == KnnAlgorithm::KdTree ? "kdtree" : "brute") << '\n'
      << "tree_cp = " << join(lib.tree_cp) << '\n'
      << "tree_min_node = " << join(lib.tree_min_node) << '\n'
      << "nn_hidden = " << join(lib.nn_hidden) << '\n'
      << "nn_lambda = " << join(lib.nn_lambda) << '\n'
      << "nn_activation = " << (lib.nn_base.activation == Activation::Tanh ? "tanh" : "logistic") << '\n'
      << "nn_epochs = " << lib.nn_base.epochs << '\n'
      << "nn_learning_rate = " << text::format_double(lib.nn_base.learning_rate) << '\n'
      << "nn_batch_size = " << lib.nn_base.batch_size << '\n'
      << "bagged_bags = " << join(lib.bagged_bags) << '\n'
      << "forest_trees = " << join(lib.forest_trees) << '\n'
      << "forest_mtry = " << join(lib.forest_mtry) << '\n'
      << "ensemble_tree_cp = " << text::format_double(lib.ensemble_tree.complexity) << '\n'
      << "ensemble_tree_min_node = " << lib.ensemble_tree.min_node << "\n\n"
      << "[augment]\n"
      << "enabled = " << (c.augment ? "true" : "false") << '\n'
      << "a = " << join(lib.augment_a) << '\n'
      << "hidden = " << join(lib.augment_hidden) << '\n'
      << "lambda = " << text::format_double(lib.augment_lambda) << "\n\n";
  const auto& r = c.roster;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "[roster]\n"
      << "lin_reg = " << b(r.lin_reg) << "\nqr = " << b(r.qr) << "\nqrnn = " << b(r.qrnn)
      << "\nnnac = " << b(r.nnac) << "\nmbl = " << b(r.mbl) << "\nmbnl = " << b(r.mbnl)
      << "\nes_av = " << b(r.es_av) << "\n\n"
      << "[output]\ndir = " << c.output_dir.string() << "\nhistograms = " << b(c.histograms) << '\n';
  return out.str();
}

}  // namespace asymcast
