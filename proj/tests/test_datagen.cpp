#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lcen/common.hpp"
#include "lcen/datagen.hpp"
#include "lcen/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lcen;

namespace {

double eval_true_model(const GeneratedDataset& g, const Eigen::VectorXd& row) {
  const Eigen::VectorXd f = evaluate_terms(g.true_support, row);
  return g.true_intercept + f.dot(g.true_coefficients);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("lcen_datagen_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("noise spec validation") {
  CHECK_THROWS_AS(NoiseSpec{}.validate(), std::invalid_argument);
  NoiseSpec both;
  both.level = 1.0;
  both.variance = 1.0;
  CHECK_THROWS_AS(both.validate(), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::percent(-1.0), std::invalid_argument);
  CHECK(NoiseSpec::percent(50.0).sigma_for(2.0) == doctest::Approx(1.0));
  CHECK(NoiseSpec::direct_variance(4.0).sigma_for(123.0) == doctest::Approx(2.0));
}

TEST_CASE("linear5 generator") {
  SUBCASE("true model at the all-ones row sums the coefficients") {
    const GeneratedDataset g = gen_linear5(100, NoiseSpec::none(1));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
    CHECK(eval_true_model(g, ones) == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("zero noise reproduces the noiseless output exactly") {
    const GeneratedDataset g = gen_linear5(50, NoiseSpec::none(2));
    CHECK((g.data.y - g.y_noiseless).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("ground-truth consistency on every row") {
    const GeneratedDataset g = gen_linear5(64, NoiseSpec::percent(25.0, 3));
    for (int i = 0; i < g.data.rows(); ++i) {
      const Eigen::VectorXd row = g.data.X.row(i);
      CHECK(eval_true_model(g, row) ==
            doctest::Approx(g.y_noiseless(i)).epsilon(1e-10));
    }
  }
  SUBCASE("noise calibration at n = 1e4") {
    const GeneratedDataset g = gen_linear5(10000, NoiseSpec::percent(50.0, 4));
    const Eigen::VectorXd eps = g.data.y - g.y_noiseless;
    const double sd_eps = std::sqrt(
        (eps.array() - eps.mean()).square().sum() / (eps.size() - 1));
    const double sd_sig =
        std::sqrt((g.y_noiseless.array() - g.y_noiseless.mean()).square().sum() /
                  (g.y_noiseless.size() - 1));
    CHECK(sd_eps / sd_sig == doctest::Approx(0.5).epsilon(0.05));
  }
  SUBCASE("seeded determinism byte-for-byte after serialization") {
    TempDir tmp;
    const auto p1 = tmp.path / "a.csv";
    const auto p2 = tmp.path / "b.csv";
    save_csv(p1.string(), gen_linear5(200, NoiseSpec::percent(10.0, 9)).data);
    save_csv(p2.string(), gen_linear5(200, NoiseSpec::percent(10.0, 9)).data);
    CHECK(read_file(p1) == read_file(p2));
  }
  SUBCASE("n too small") {
    CHECK_THROWS_AS(gen_linear5(5, NoiseSpec::none(0)), std::invalid_argument);
  }
}

TEST_CASE("multicollinear generator") {
  SUBCASE("eps1 = 0 duplicates the column and VIF reports +inf") {
    const GeneratedDataset g =
        gen_multicollinear(100, NoiseSpec::percent(0.0, 1), NoiseSpec::percent(0.0, 1));
    CHECK((g.data.X.col(0) - g.data.X.col(1)).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd v = vif(g.data.X);
    CHECK(std::isinf(v(0)));
    CHECK(std::isinf(v(1)));
  }
  SUBCASE("column correlation matches the closed form") {
    const GeneratedDataset g = gen_multicollinear(
        50000, NoiseSpec::percent(30.0, 5), NoiseSpec::percent(0.0, 5));
    const Eigen::VectorXd a = g.data.X.col(0).array() - g.data.X.col(0).mean();
    const Eigen::VectorXd b = g.data.X.col(1).array() - g.data.X.col(1).mean();
    const double r = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    const double sx = g.params.at("sigma_x");
    const double se = g.params.at("sigma_eps1");
    const double expected = sx / std::sqrt(sx * sx + se * se);
    CHECK(r == doctest::Approx(expected).epsilon(0.01));
  }
  SUBCASE("changing eps2 leaves X untouched") {
    const GeneratedDataset a = gen_multicollinear(
        100, NoiseSpec::percent(5.0, 3), NoiseSpec::percent(1.0, 3));
    const GeneratedDataset b = gen_multicollinear(
        100, NoiseSpec::percent(5.0, 3), NoiseSpec::percent(50.0, 3));
    CHECK((a.data.X - b.data.X).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("relativistic generator") {
  SUBCASE("direct formula at m=5, v=1e8") {
    const GeneratedDataset g = gen_relativistic(100, 100.0, NoiseSpec::none(1));
    Eigen::VectorXd row(2);
    row << 5.0, 1.0e8;
    const double c2 = kSpeedOfLight * kSpeedOfLight;
    const double expected = 25.0 * c2 * c2 + 25.0e16 * c2;
    CHECK(eval_true_model(g, row) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("relativistic term share averages about 20.4 percent") {
    const GeneratedDataset g = gen_relativistic(200000, 100.0, NoiseSpec::none(2));
    const double c2 = kSpeedOfLight * kSpeedOfLight;
    double share = 0.0;
    for (int i = 0; i < g.data.rows(); ++i) {
      const double v2 = g.data.X(i, 1) * g.data.X(i, 1);
      share += v2 / (c2 + v2);
    }
    share /= g.data.rows();
    CHECK(share * 100.0 == doctest::Approx(20.4).epsilon(0.05));
  }
  SUBCASE("mass range is honored and recorded") {
    const GeneratedDataset g = gen_relativistic(500, 10.0, NoiseSpec::none(3));
    CHECK(g.data.X.col(0).minCoeff() >= 1.0);
    CHECK(g.data.X.col(0).maxCoeff() < 10.0);
    CHECK(g.params.at("mass_max") == 10.0);
  }
}

TEST_CASE("quartic generator") {
  SUBCASE("formula at X = 2") {
    const QuarticPair q = gen_quartic(30, 100, 0.0, 1);
    Eigen::VectorXd row(1);
    row << 2.0;
    CHECK(eval_true_model(q.train, row) == doctest::Approx(5.6).epsilon(1e-12));
  }
  SUBCASE("shapes and shared ground truth") {
    const QuarticPair q = gen_quartic(30, 1000, 4.0, 2);
    CHECK(q.train.data.rows() == 30);
    CHECK(q.test.data.rows() == 1000);
    CHECK(q.train.true_coefficients == q.test.true_coefficients);
  }
  SUBCASE("zero noise variance, degree-4 fit predicts the test set") {
    const QuarticPair q = gen_quartic(30, 1000, 0.0, 3);
    HyperGrid grid = HyperGrid::defaults();
    grid.degrees = {4};
    grid.cutoff = 0.01;
    const FittedModel m = fit_pipeline(q.train.data.X, q.train.data.y, grid,
                                       PipelineSpec::lcen(), {});
    const Eigen::VectorXd pred = predict(m, q.test.data.X);
    const Metrics t = compute_metrics(q.test.data.y, pred);
    CHECK(t.mse <= 1e-6);
  }
}

TEST_CASE("kepler tables") {
  const GeneratedDataset modern = kepler_data(KeplerVersion::kModern);
  const GeneratedDataset original = kepler_data(KeplerVersion::kOriginal1619);
  CHECK(modern.data.rows() == 8);
  CHECK(original.data.rows() == 6);

  // Earth row of the modern table: T / a^1.5 is Kepler's constant.
  int earth = -1;
  for (int i = 0; i < modern.data.rows(); ++i) {
    if (std::abs(modern.data.X(i, 0) - 1.0) < 1e-3) earth = i;
  }
  REQUIRE(earth >= 0);
  const double k = modern.data.y(earth) /
                   std::pow(modern.data.X(earth, 0), 1.5);
  CHECK(k == doctest::Approx(365.25).epsilon(2e-4));

  CHECK(original.true_coefficients(0) == 365.15);
  CHECK(modern.true_support[0].display({"a"}, "T") == "a^1.5");
}

TEST_CASE("csv load and save") {
  TempDir tmp;

  SUBCASE("three columns, target last by default") {
    const auto p = tmp.path / "basic.csv";
    std::ofstream(p) << "u,v,w\n1,2,3\n4,5,6\n";
    const Dataset ds = load_csv(p.string());
    CHECK(ds.features() == 2);
    CHECK(ds.rows() == 2);
    CHECK(ds.feature_names == std::vector<std::string>{"u", "v"});
    CHECK(ds.target_name == "w");
    CHECK(ds.y(1) == 6.0);
    CHECK(ds.X(1, 0) == 4.0);
  }
  SUBCASE("named target column anywhere") {
    const auto p = tmp.path / "named.csv";
    std::ofstream(p) << "u,v,w\n1,2,3\n";
    const Dataset ds = load_csv(p.string(), "u");
    CHECK(ds.target_name == "u");
    CHECK(ds.y(0) == 1.0);
    CHECK(ds.feature_names == std::vector<std::string>{"v", "w"});
  }
  SUBCASE("missing target names the column") {
    const auto p = tmp.path / "missing.csv";
    std::ofstream(p) << "u,v\n1,2\n";
    try {
      load_csv(p.string(), "nope");
      FAIL("expected data_error");
    } catch (const data_error& e) {
      CHECK(std::string(e.what()).find("nope") != std::string::npos);
    }
  }
  SUBCASE("ragged row") {
    const auto p = tmp.path / "ragged.csv";
    std::ofstream(p) << "u,v\n1,2\n3\n";
    CHECK_THROWS_AS(load_csv(p.string()), data_error);
  }
  SUBCASE("non-numeric cell names the position") {
    const auto p = tmp.path / "nonnum.csv";
    std::ofstream(p) << "u,v\n1,abc\n";
    try {
      load_csv(p.string());
      FAIL("expected data_error");
    } catch (const data_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("abc") != std::string::npos);
      CHECK(msg.find("v") != std::string::npos);
    }
  }
  SUBCASE("empty file") {
    const auto p = tmp.path / "empty.csv";
    { std::ofstream touch(p); }
    CHECK_THROWS_AS(load_csv(p.string()), data_error);
  }
  SUBCASE("write/read round trip is bit-exact") {
    const GeneratedDataset g = gen_relativistic(64, 100.0, NoiseSpec::percent(15.0, 6));
    const auto p = tmp.path / "rt.csv";
    save_csv(p.string(), g.data);
    const Dataset back = load_csv(p.string(), g.data.target_name);
    REQUIRE(back.rows() == g.data.rows());
    CHECK((back.X - g.data.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.y - g.data.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.feature_names == g.data.feature_names);
  }
}
