#include "asymcast/errors.hpp"
#include "asymcast/library.hpp"
#include "asymcast/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>

using namespace asymcast;

namespace {

DataSplits small_splits() {
  SynthConfig cfg;
  cfg.n = 400;
  cfg.seed = 5;
  return standardize(split(synth_generate(cfg), 9));
}

LibraryConfig tiny() {
  LibraryConfig c;
  c.ridge_lambda = {1.0};
  c.knn_k = {10};
  c.tree_cp = {0.01};
  c.tree_min_node = {20};
  c.nn_hidden = {2};
  c.nn_lambda = {1e-3};
  c.nn_base.epochs = 10;
  c.bagged_bags = {2};
  c.forest_trees = {3};
  c.forest_mtry = {3};
  c.augment_a = {0.5, 1.0};
  c.augment_hidden = {2};
  return c;
}

}  // namespace

TEST_SUITE("library") {

TEST_CASE("spec enumeration and augmentation") {
  const auto base = library_specs(tiny(), false, 1);
  const auto aug = library_specs(tiny(), true, 1);
  CHECK(base.size() == 7);
  // Per a level: one QR, one QRNN and one NNAC per hidden size.
  CHECK(aug.size() == base.size() + 2 * 3);
  CHECK(std::all_of(base.begin(), base.end(),
                    [](const ModelSpec& s) { return s.provenance() == Provenance::Symmetric; }));
  CHECK(std::count_if(aug.begin(), aug.end(), [](const ModelSpec& s) {
          return s.provenance() == Provenance::Asymmetric;
        }) >= 4);
  // The symmetric prefix is shared, so the symmetric library is a subset.
  CHECK(std::equal(base.begin(), base.end(), aug.begin()));
  CHECK(library_specs(tiny(), true, 1) == aug);
  CHECK(library_specs(tiny(), true, 2) != aug);
}

TEST_CASE("default grid sizes") {
  const LibraryConfig c;
  CHECK(library_specs(c, false, 1).size() == 51);
  CHECK(library_specs(c, true, 1).size() == 101);
}

TEST_CASE("validation predictions are cached at fit time") {
  const auto splits = small_splits();
  const auto lib = build_library(splits, tiny(), true, 3);
  CHECK(lib.size() == library_specs(tiny(), true, 3).size());
  CHECK(lib.validation_target == splits.validation.target);
  for (const auto& e : lib.entries) {
    REQUIRE(e.model);
    CHECK((e.model->predict(splits.validation.features) - e.validation_predictions)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(e.provenance == e.spec.provenance());
  }
}

TEST_CASE("parallel fitting matches serial fitting") {
  const auto splits = small_splits();
  const auto specs = library_specs(tiny(), true, 3);
  const auto a = fit_library(splits, specs, 1);
  const auto b = fit_library(splits, specs, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.entries[i].validation_predictions == b.entries[i].validation_predictions);
}

TEST_CASE("select_best on stub predictions") {
  Vector y{{1.0, 2.0, 3.0}};
  auto lib = ModelLibrary::from_predictions(
      {Vector{{1.5, 2.5, 3.5}}, Vector{{0.8, 1.8, 2.8}}, Vector{{1.0, 2.0, 3.3}}}, y);
  CHECK(lib.entries[0].label == "M1");
  CHECK(select_best(lib, CostSpec::squared_error()) == 2);
  // Under cheap positive residuals the low forecaster wins.
  CHECK(select_best(lib, CostSpec::qqc(0.1, 1)) == 1);
  CHECK(select_best(lib, CostSpec::squared_error(),
                    [](const LibraryEntry& e) { return e.label != "M3"; }) == 1);
  CHECK(select_best(lib, CostSpec::squared_error(),
                    [](const LibraryEntry& e) { return e.label == "M1"; }) == 0);
  // Ties go to the lowest index.
  auto tie = ModelLibrary::from_predictions({Vector{{1.0, 2.0, 3.1}}, Vector{{1.0, 2.0, 3.1}}}, y);
  CHECK(select_best(tie, CostSpec::squared_error()) == 0);
  CHECK_THROWS(select_best(lib, CostSpec::squared_error(), [](const LibraryEntry&) { return false; }));
}

TEST_CASE("library bundle round trip") {
  const auto splits = small_splits();
  const auto lib = build_library(splits, tiny(), false, 4);
  const auto dir = std::filesystem::temp_directory_path() / "asymcast-lib-test";
  std::filesystem::remove_all(dir);
  save_library(lib, dir);
  const auto back = load_library(dir);
  REQUIRE(back.size() == lib.size());
  for (std::size_t i = 0; i < lib.size(); ++i) {
    CHECK(back.entries[i].spec == lib.entries[i].spec);
    CHECK(back.entries[i].validation_predictions == lib.entries[i].validation_predictions);
    CHECK(back.entries[i].model->predict(splits.test.features) ==
          lib.entries[i].model->predict(splits.test.features));
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS(load_library(dir));
}

}  // TEST_SUITE
