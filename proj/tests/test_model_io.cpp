#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lcen/common.hpp"
#include "lcen/datagen.hpp"
#include "lcen/model_io.hpp"
#include "lcen/pipeline.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace lcen;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("lcen_io_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

FittedModel fit_small_model(std::uint64_t seed) {
  const GeneratedDataset g = gen_linear5(120, NoiseSpec::percent(20.0, seed));
  HyperGrid grid = HyperGrid::defaults();
  grid.degrees = {1};
  grid.cutoff = 0.02;
  FitOptions opt;
  opt.seed = seed;
  opt.feature_names = g.data.feature_names;
  return fit_pipeline(g.data.X, g.data.y, grid, PipelineSpec::lcen(), opt);
}

}  // namespace

TEST_CASE("term json round trip") {
  ExpansionConfig cfg;
  cfg.degree = 3;
  cfg.lag = 1;
  const auto terms = enumerate_terms(2, cfg);
  for (const FeatureTerm& t : terms) {
    const nlohmann::json j = term_to_json(t);
    const FeatureTerm back = term_from_json(j);
    CHECK(back == t);
    CHECK(j.at("display").get<std::string>() == t.display());
  }
}

TEST_CASE("model json round trip preserves predictions bit for bit") {
  TempDir tmp;
  const GeneratedDataset g = gen_linear5(120, NoiseSpec::percent(20.0, 3));
  const FittedModel m = fit_small_model(3);

  const auto path = (tmp.path / "model.json").string();
  save_model(m, path, {{"command", "test"}});
  const FittedModel back = load_model(path);

  CHECK(back.terms == m.terms);
  CHECK(back.n_features_selected == m.n_features_selected);
  CHECK(back.hyperparameters.alpha == m.hyperparameters.alpha);
  CHECK(back.hyperparameters.pipeline == m.hyperparameters.pipeline);
  CHECK(back.seed == m.seed);
  REQUIRE(back.unscaled_beta.size() == m.unscaled_beta.size());
  CHECK(std::memcmp(back.unscaled_beta.data(), m.unscaled_beta.data(),
                    sizeof(double) * static_cast<std::size_t>(m.unscaled_beta.size())) == 0);

  const Eigen::VectorXd p1 = predict(m, g.data.X);
  const Eigen::VectorXd p2 = predict(back, g.data.X);
  CHECK(std::memcmp(p1.data(), p2.data(),
                    sizeof(double) * static_cast<std::size_t>(p1.size())) == 0);

  // The reserialized document is identical.
  CHECK(model_to_json(back) == model_to_json(m));
}

TEST_CASE("fitting twice with one seed gives byte-identical model documents") {
  const FittedModel a = fit_small_model(7);
  const FittedModel b = fit_small_model(7);
  CHECK(model_to_json(a).dump() == model_to_json(b).dump());
}

TEST_CASE("malformed model files raise data_error") {
  TempDir tmp;
  const auto bad = (tmp.path / "bad.json").string();
  std::ofstream(bad) << "{not json";
  CHECK_THROWS_AS(load_model(bad), data_error);

  const auto missing = (tmp.path / "missing.json").string();
  std::ofstream(missing) << "{\"pipeline\": \"LCEN\"}";
  CHECK_THROWS_AS(load_model(missing), data_error);

  CHECK_THROWS_AS(load_model((tmp.path / "absent.json").string()), data_error);
}

TEST_CASE("dataset sidecar document") {
  const GeneratedDataset g = gen_relativistic(50, 100.0, NoiseSpec::percent(5.0, 2));
  const nlohmann::json j = dataset_meta_to_json(g);
  CHECK(j.at("generator") == "relativistic");
  CHECK(j.at("seed") == 2);
  CHECK(j.at("params").at("mass_max") == 100.0);
  CHECK(j.at("true_model").at("terms").size() == 2);
  CHECK(j.at("true_model").at("coefficients").size() == 2);
}
