// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the exit code is the number of failures. The first argument must be the
// path of the lcen command-line binary (used by the external-data harness
// criterion).

#include "lcen/common.hpp"
#include "lcen/datagen.hpp"
#include "lcen/enet.hpp"
#include "lcen/model_io.hpp"
#include "lcen/pipeline.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace lcen;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

struct Checker {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

int g_failures = 0;

void criterion(int number, const std::string& name,
               const std::function<void(Checker&)>& body) {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.note(std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", c.ok ? "PASS" : "FAIL",
              number, name.c_str(), secs, c.detail.empty() ? "" : " -- ",
              c.detail.c_str());
  std::fflush(stdout);
  if (!c.ok) ++g_failures;
}

std::set<std::string> support_of(const FittedModel& m) {
  std::set<std::string> out;
  for (const auto& t : m.terms) {
    if (!t.is_intercept()) out.insert(t.display(m.feature_names, m.target_name));
  }
  return out;
}

double coefficient_of(const FittedModel& m, const std::string& display) {
  for (std::size_t t = 0; t < m.terms.size(); ++t) {
    if (!m.terms[t].is_intercept() &&
        m.terms[t].display(m.feature_names, m.target_name) == display) {
      return m.unscaled_beta(static_cast<int>(t));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string fmtg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion1_linear5(Checker& c) {
  const std::set<std::string> truth = {"X0", "X1", "X2", "X3", "X4"};

  // Noiseless run: n = 1000, degrees <= 3, fixed seed, under one minute.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const GeneratedDataset g = gen_linear5(1000, NoiseSpec::none(1));
    HyperGrid grid = HyperGrid::defaults();
    grid.degrees = {1, 2, 3};
    grid.cutoff = 0.05;
    FitOptions opt;
    opt.seed = 1;
    const FittedModel m = fit_pipeline(g.data.X, g.data.y, grid,
                                       PipelineSpec::lcen(), opt);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    c.expect(support_of(m) == truth, "noiseless support is not {X0..X4}");
    double sq = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double err = coefficient_of(m, "X" + std::to_string(j)) -
                         g.true_coefficients(j);
      sq += err * err;
    }
    const double rmse = std::sqrt(sq / 5.0);
    c.expect(rmse <= 1e-4, "noiseless coefficient RMSE " + fmtg(rmse) + " > 1e-4");
    c.expect(secs < 60.0, "noiseless runtime over one minute");
    c.note("coef RMSE " + fmtg(rmse));
  }

  // Sigma-relative noise grid; support must hold on >= 9 of 10 seeds per
  // level. Under this noise definition the X-vs-sqrt(X) ambiguity needs a
  // larger sample than the noiseless run, so these fits use n = 200000 and
  // the log-spaced positive alpha grid (alpha = 0 degenerates to a spread
  // interpolation on the near-collinear transform blocks).
  for (double level : {60.0, 119.0, 238.0}) {
    int exact = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const GeneratedDataset g = gen_linear5(200000, NoiseSpec::percent(level, seed));
      HyperGrid grid = HyperGrid::defaults();
      std::erase(grid.alphas, 0.0);
      grid.degrees = {1, 2, 3};
      grid.cutoff = 0.05;
      FitOptions opt;
      opt.seed = seed;
      const FittedModel m = fit_pipeline(g.data.X, g.data.y, grid,
                                         PipelineSpec::lcen(), opt);
      if (support_of(m) == truth) ++exact;
    }
    c.expect(exact >= 9, "support exact on only " + std::to_string(exact) +
                             "/10 seeds at " + fmtg(level) + "% noise");
    c.note(fmtg(level) + "%: " + std::to_string(exact) + "/10");
  }
}

void criterion2_relativistic(Checker& c) {
  const double c2 = kSpeedOfLight * kSpeedOfLight;
  const double c4 = c2 * c2;
  for (double level : {0.0, 5.0, 10.0, 15.0, 20.0, 30.0}) {
    const GeneratedDataset g =
        gen_relativistic(50000, 100.0, NoiseSpec::percent(level, 1));
    HyperGrid grid = HyperGrid::defaults();
    grid.degrees = {1, 2, 3, 4, 5, 6};
    grid.cutoff = 0.1;
    FitOptions opt;
    opt.seed = 1;
    opt.feature_names = g.data.feature_names;
    opt.target_name = g.data.target_name;
    const FittedModel m = fit_pipeline(g.data.X, g.data.y, grid,
                                       PipelineSpec::lcen(), opt);

    const std::set<std::string> want = {"m^2", "m^2*v^2"};
    std::set<std::string> got;
    for (std::size_t t = 1; t < m.terms.size(); ++t) {
      got.insert(m.terms[t].display(g.data.feature_names, g.data.target_name));
    }
    c.expect(got == want, "support wrong at " + fmtg(level) + "% noise");
    if (got == want) {
      double e1 = 0.0, e2 = 0.0;
      for (std::size_t t = 1; t < m.terms.size(); ++t) {
        const std::string d =
            m.terms[t].display(g.data.feature_names, g.data.target_name);
        const double b = m.unscaled_beta(static_cast<int>(t));
        if (d == "m^2") e1 = std::abs(b - c4) / c4;
        if (d == "m^2*v^2") e2 = std::abs(b - c2) / c2;
      }
      const double bound = level == 0.0 ? 1e-3 : 1e-2;
      c.expect(std::max(e1, e2) <= bound,
               "coefficient errors " + fmtg(100 * e1) + "%, " + fmtg(100 * e2) +
                   "% exceed bound at " + fmtg(level) + "% noise");
      if (level == 0.0 || level == 30.0) {
        c.note(fmtg(level) + "%: errs " + fmtg(100 * e1) + "% / " +
               fmtg(100 * e2) + "%");
      }
    }
  }
}

void criterion3_kepler(Checker& c) {
  auto fit_kepler = [](KeplerVersion v) {
    const GeneratedDataset g = kepler_data(v);
    HyperGrid grid = HyperGrid::defaults();
    // The alpha = 0 entry degenerates to a minimum-norm interpolation on
    // these tiny p > n tables; the L1 path needs the positive grid.
    std::erase(grid.alphas, 0.0);
    grid.cutoff = 0.1;
    FitOptions opt;
    opt.seed = 1;
    opt.feature_names = g.data.feature_names;
    opt.target_name = g.data.target_name;
    return fit_pipeline(g.data.X, g.data.y, grid, PipelineSpec::lcen(), opt);
  };

  const FittedModel modern = fit_kepler(KeplerVersion::kModern);
  c.expect(modern.n_features_selected == 1 &&
               modern.terms[1].display({"a"}, "T") == "a^1.5",
           "modern: support is not exactly {a^1.5}");
  const double k_modern = modern.unscaled_beta(1);
  c.expect(std::abs(k_modern - 365.25) / 365.25 <= 0.005,
           "modern coefficient " + fmtg(k_modern) + " off 365.25 by > 0.5%");

  const FittedModel original = fit_kepler(KeplerVersion::kOriginal1619);
  c.expect(original.n_features_selected == 1 &&
               original.terms[1].display({"a"}, "T") == "a^1.5",
           "1619: support is not exactly {a^1.5}");
  const double k_orig = original.unscaled_beta(1);
  c.expect(std::abs(k_orig - 365.15) / 365.15 <= 0.01,
           "1619 coefficient " + fmtg(k_orig) + " off 365.15 by > 1%");
  c.note("k = " + fmtg(k_modern) + " (modern), " + fmtg(k_orig) + " (1619)");
}

void criterion4_multicollinearity(Checker& c) {
  const std::set<std::string> want = {"X0", "X1"};
  int cells = 0, good = 0;
  double worst = 0.0;
  for (double e1 : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    for (double e2 : {0.0, 1.0, 2.0, 5.0, 10.0, 20.0}) {
      if (e2 > e1) continue;  // red region: eps1 > 0 and eps1 >= eps2
      ++cells;
      const GeneratedDataset g = gen_multicollinear(
          2000, NoiseSpec::percent(e1, 7), NoiseSpec::percent(e2, 11));
      HyperGrid grid = HyperGrid::defaults();
      grid.degrees = {1, 2, 3};
      grid.cutoff = 0.05;
      FitOptions opt;
      opt.seed = 1;
      const FittedModel m = fit_pipeline(g.data.X, g.data.y, grid,
                                         PipelineSpec::lcen(), opt);
      if (support_of(m) != want) {
        c.expect(false, "cell (" + fmtg(e1) + ", " + fmtg(e2) +
                            ") did not select both variables");
        continue;
      }
      double err = 0.0;
      for (std::size_t t = 1; t < m.terms.size(); ++t) {
        err = std::max(err,
                       std::abs(m.unscaled_beta(static_cast<int>(t)) - 2.0) / 2.0);
      }
      worst = std::max(worst, err);
      if (err <= 0.10) {
        ++good;
      } else {
        c.expect(false, "cell (" + fmtg(e1) + ", " + fmtg(e2) +
                            ") coefficient error " + fmtg(100 * err) + "%");
      }
    }
  }
  c.note(std::to_string(good) + "/" + std::to_string(cells) +
         " cells, worst err " + fmtg(100 * worst) + "%");
}

void criterion5_degree_selection(Checker& c) {
  auto frac_degree = [&](double variance, int degree) {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const QuarticPair q = gen_quartic(30, 100, variance, seed);
      HyperGrid grid = HyperGrid::defaults();
      grid.degrees = {2, 4};
      grid.cutoff = 0.01;
      FitOptions opt;
      opt.seed = seed;
      const FittedModel m = fit_pipeline(q.train.data.X, q.train.data.y, grid,
                                         PipelineSpec::lcen(), opt);
      if (m.hyperparameters.degree == degree) ++hits;
    }
    return hits / 50.0;
  };

  const double deg4_at_0 = frac_degree(0.0, 4);
  const double deg2_at_0 = 1.0 - deg4_at_0;
  const double deg2_at_30 = frac_degree(30.0, 2);
  const double deg2_at_100 = frac_degree(100.0, 2);

  c.expect(deg4_at_0 >= 0.90, "degree 4 chosen in only " +
                                  fmtg(100 * deg4_at_0) + "% of seeds at zero noise");
  c.expect(deg2_at_30 > deg2_at_0,
           "no shift toward degree 2 at noise variance 30");
  c.expect(deg2_at_100 > deg2_at_30,
           "no further shift toward degree 2 at noise variance 100");
  c.note("degree-2 share: " + fmtg(100 * deg2_at_0) + "% -> " +
         fmtg(100 * deg2_at_30) + "% -> " + fmtg(100 * deg2_at_100) + "%");
}

void criterion6_ablation(Checker& c) {
  const double c2 = kSpeedOfLight * kSpeedOfLight;
  const double c4 = c2 * c2;
  const GeneratedDataset g = gen_relativistic(50000, 100.0, NoiseSpec::none(1));
  HyperGrid grid = HyperGrid::defaults();
  grid.degrees = {1, 2, 3, 4, 5, 6};
  grid.cutoff = 0.1;
  FitOptions opt;
  opt.seed = 1;
  opt.feature_names = g.data.feature_names;
  opt.target_name = g.data.target_name;

  std::map<std::string, double> err;
  std::map<std::string, double> secs;
  for (const std::string& name : PipelineSpec::known_names()) {
    const auto t0 = std::chrono::steady_clock::now();
    const FittedModel m = fit_pipeline(g.data.X, g.data.y, grid,
                                       PipelineSpec::from_name(name), opt);
    secs[name] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double b1 = coefficient_of(m, "m^2");
    const double b2 = coefficient_of(m, "m^2*v^2");
    err[name] = std::max(std::isnan(b1) ? 1.0 : std::abs(b1 - c4) / c4,
                         std::isnan(b2) ? 1.0 : std::abs(b2 - c2) / c2);
  }

  for (const char* name : {"LCEN", "LCL", "ENCEN"}) {
    c.expect(err[name] < 0.01, std::string(name) + " error " +
                                   fmtg(100 * err[name]) + "% not < 1%");
  }
  for (const char* name : {"LC", "ENC", "LEN"}) {
    c.expect(err[name] > 0.10, std::string(name) + " error " +
                                   fmtg(100 * err[name]) + "% not > 10%");
  }
  c.expect(secs["ENC"] >= 3.0 * secs["LCEN"],
           "ENC only " + fmtg(secs["ENC"] / secs["LCEN"]) + "x slower than LCEN");
  c.expect(secs["ENCEN"] >= 3.0 * secs["LCEN"],
           "ENCEN only " + fmtg(secs["ENCEN"] / secs["LCEN"]) + "x slower than LCEN");
  c.note("errors %: LC " + fmtg(100 * err["LC"]) + ", ENC " + fmtg(100 * err["ENC"]) +
         ", LEN " + fmtg(100 * err["LEN"]) + "; ENC/LCEN time " +
         fmtg(secs["ENC"] / secs["LCEN"]) + "x");
}

void criterion7_solver_oracles(Checker& c) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto randn = [&](int r, int cc) {
    Eigen::MatrixXd M(r, cc);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < cc; ++j) M(i, j) = dist(rng);
    }
    return M;
  };
  auto make_design = [](const Eigen::MatrixXd& X) {
    DesignMatrix dm;
    dm.values.resize(X.rows(), X.cols() + 1);
    dm.values.col(0).setOnes();
    dm.values.rightCols(X.cols()) = X;
    dm.terms.push_back(FeatureTerm{});
    for (int j = 0; j < X.cols(); ++j) {
      dm.terms.push_back(FeatureTerm{{{j, 0, Transform::kPower, 0, 1}}});
    }
    dm.scaling.mean = Eigen::VectorXd::Zero(X.cols() + 1);
    dm.scaling.std = Eigen::VectorXd::Ones(X.cols() + 1);
    return dm;
  };

  // alpha = 0 against an independent normal-equations oracle.
  double worst_ols = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 50 + inst, p = 5;
    const Eigen::MatrixXd X = randn(n, p);
    const Eigen::VectorXd y = X * randn(p, 1) + 0.1 * randn(n, 1);
    const Coefficients fit = fit_enet(make_design(X), y, EnetConfig{});
    const Eigen::RowVectorXd mu = X.colwise().mean();
    const Eigen::MatrixXd Xc = X.rowwise() - mu;
    const Eigen::VectorXd yc = y.array() - y.mean();
    const Eigen::VectorXd oracle =
        (Xc.transpose() * Xc).fullPivLu().solve(Xc.transpose() * yc);
    for (int j = 0; j < p; ++j) {
      worst_ols = std::max(worst_ols, std::abs(fit.beta(j + 1) - oracle(j)) /
                                          (std::abs(oracle(j)) + 1.0));
    }
  }
  c.expect(worst_ols <= 1e-7, "alpha=0 vs normal equations: worst relative " +
                                  fmtg(worst_ols));

  // Lasso on an orthonormalized design against the soft-threshold closed form.
  {
    const int n = 200, p = 6;
    Eigen::MatrixXd A = randn(n, p);
    A.rowwise() -= A.colwise().mean();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    Q.rowwise() -= Q.colwise().mean();
    for (int j = 0; j < p; ++j) Q.col(j) /= Q.col(j).norm();
    const Eigen::MatrixXd X = std::sqrt(static_cast<double>(n)) * Q;
    const Eigen::VectorXd y = randn(n, 1);
    const Eigen::VectorXd yc = y.array() - y.mean();
    const Eigen::VectorXd bols = X.transpose() * yc / n;
    double worst = 0.0;
    for (double alpha : {0.02, 0.1, 0.3}) {
      EnetConfig cfg;
      cfg.alpha = alpha;
      cfg.l1_ratio = 1.0;
      cfg.tol = 1e-12;
      const Coefficients fit = fit_enet(make_design(X), y, cfg);
      for (int j = 0; j < p; ++j) {
        worst = std::max(worst,
                         std::abs(fit.beta(j + 1) - soft_threshold(bols(j), alpha)));
      }
    }
    c.expect(worst <= 1e-8, "orthonormal lasso vs closed form: worst " + fmtg(worst));
  }

  // Ridge special case against its closed form.
  {
    const int n = 150, p = 5;
    Eigen::MatrixXd X = randn(n, p);
    X.rowwise() -= X.colwise().mean();
    Eigen::VectorXd y = randn(n, 1);
    y.array() -= y.mean();
    double worst = 0.0;
    for (double alpha : {0.05, 0.5, 2.0}) {
      EnetConfig cfg;
      cfg.alpha = alpha;
      cfg.l1_ratio = 0.0;
      cfg.tol = 1e-12;
      cfg.max_iter = 200000;
      const Coefficients fit = fit_enet(make_design(X), y, cfg);
      const Eigen::VectorXd closed =
          (X.transpose() * X + n * alpha * Eigen::MatrixXd::Identity(p, p))
              .ldlt()
              .solve(X.transpose() * y);
      for (int j = 0; j < p; ++j) {
        worst = std::max(worst, std::abs(fit.beta(j + 1) - closed(j)) /
                                    (std::abs(closed(j)) + 1.0));
      }
    }
    c.expect(worst <= 1e-7, "ridge vs closed form: worst relative " + fmtg(worst));
  }
}

void criterion8_expansion(Checker& c) {
  ExpansionConfig cfg;
  cfg.degree = 1;
  c.expect(enumerate_terms(3, cfg).size() == 13,
           "enumerate_terms(3, degree=1) != 13");

  // Nesting across degrees 1..5 (the lower-degree list is a prefix).
  for (int d = 2; d <= 5; ++d) {
    ExpansionConfig lo, hi;
    lo.degree = d - 1;
    hi.degree = d;
    const auto a = enumerate_terms(3, lo);
    const auto b = enumerate_terms(3, hi);
    bool prefix = a.size() < b.size();
    for (std::size_t i = 0; prefix && i < a.size(); ++i) prefix = a[i] == b[i];
    c.expect(prefix, "degree " + std::to_string(d - 1) +
                         " terms are not nested in degree " + std::to_string(d));
  }

  // Term/evaluate round trip within 1e-12 relative.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.5, 9.5);
  Eigen::MatrixXd X(30, 3);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = unif(rng);
  }
  ExpansionConfig c3;
  c3.degree = 3;
  const DesignMatrix dm = expand(X, c3);
  double worst = 0.0;
  for (int i = 0; i < dm.rows(); ++i) {
    const Eigen::VectorXd row = X.row(i);
    const Eigen::VectorXd f = evaluate_terms(dm.terms, row);
    for (int j = 0; j < dm.cols(); ++j) {
      const double recon = dm.values(i, j) * dm.scaling.std(j) + dm.scaling.mean(j);
      worst = std::max(worst,
                       std::abs(recon - f(j)) / std::max(1.0, std::abs(f(j))));
    }
  }
  c.expect(worst <= 1e-12, "round-trip relative error " + fmtg(worst));
}

void criterion9_properties(Checker& c) {
  // Clip monotonicity via a sparsification sweep on correlated data.
  {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> dist(0.0, 1.0);
    const int n = 300;
    Eigen::MatrixXd Z(n, 8);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 8; ++j) Z(i, j) = dist(rng);
    }
    Eigen::MatrixXd X = Z;
    for (int j = 1; j < 8; ++j) X.col(j) = 0.6 * Z.col(0) + 0.8 * Z.col(j);
    Eigen::VectorXd noise(n);
    for (int i = 0; i < n; ++i) noise(i) = dist(rng);
    const Eigen::VectorXd y =
        3.0 * X.col(0) - 2.0 * X.col(1) + 0.5 * X.col(4) + 0.3 * noise;

    HyperGrid grid = HyperGrid::defaults();
    grid.degrees = {1};
    grid.cutoff = 0.01;
    FitOptions opt;
    opt.seed = 2;
    const FittedModel base = fit_pipeline(X, y, grid, PipelineSpec::lcen(), opt);
    const auto models =
        sparsify(base, X, y, {0.01, 0.05, 0.12, 0.3, 100.0}, opt);
    int prev = 1 << 20;
    bool monotone = true;
    std::string counts;
    for (const auto& m : models) {
      monotone = monotone && m.n_features_selected <= prev;
      prev = m.n_features_selected;
      counts += std::to_string(m.n_features_selected) + " ";
    }
    c.expect(monotone, "feature counts not monotone: " + counts);
    c.expect(models.back().n_features_selected == 0,
             "extreme cutoff did not reach the intercept-only model");
    c.note("sweep counts: " + counts);
  }

  // Stage-2 support containment and the LCEN(0) == LEN(0) equivalence.
  {
    const GeneratedDataset g = gen_linear5(300, NoiseSpec::percent(60.0, 17));
    HyperGrid grid = HyperGrid::defaults();
    grid.degrees = {1, 2};
    grid.cutoff = 0.02;
    FitOptions opt;
    opt.seed = 9;
    const FittedModel lcen = fit_pipeline(g.data.X, g.data.y, grid,
                                          PipelineSpec::lcen(), opt);
    const FittedModel lc = fit_pipeline(g.data.X, g.data.y, grid,
                                        PipelineSpec::lc(), opt);
    const auto stage1 = support_of(lc);
    bool contained = true;
    for (const auto& d : support_of(lcen)) contained = contained && stage1.count(d);
    c.expect(contained, "LCEN support not contained in the clipped stage-1 support");
  }
  {
    const GeneratedDataset g = gen_linear5(150, NoiseSpec::percent(30.0, 13));
    HyperGrid grid = HyperGrid::defaults();
    grid.degrees = {1};
    grid.cutoff = 0.0;
    FitOptions opt;
    opt.seed = 4;
    const FittedModel a = fit_pipeline(g.data.X, g.data.y, grid,
                                       PipelineSpec::lcen(), opt);
    const FittedModel b = fit_pipeline(g.data.X, g.data.y, grid,
                                       PipelineSpec::len(), opt);
    const bool same = a.terms == b.terms &&
                      a.scaled_beta.size() == b.scaled_beta.size() &&
                      (a.scaled_beta - b.scaled_beta).cwiseAbs().maxCoeff() == 0.0;
    c.expect(same, "LCEN(cutoff=0) differs from LEN(cutoff=0)");
  }

  // Seeded end-to-end determinism: byte-identical model documents.
  {
    const GeneratedDataset g = gen_linear5(200, NoiseSpec::percent(40.0, 5));
    HyperGrid grid = HyperGrid::defaults();
    grid.degrees = {1, 2};
    grid.cutoff = 0.02;
    FitOptions opt;
    opt.seed = 7;
    opt.threads = 2;
    const FittedModel a = fit_pipeline(g.data.X, g.data.y, grid,
                                       PipelineSpec::lcen(), opt);
    opt.threads = 1;
    const FittedModel b = fit_pipeline(g.data.X, g.data.y, grid,
                                       PipelineSpec::lcen(), opt);
    c.expect(model_to_json(a).dump() == model_to_json(b).dump(),
             "two runs (different thread counts) produced different model JSON");
  }
}

void criterion10_external_harness(Checker& c) {
  if (g_cli_path.empty()) {
    c.expect(false, "no CLI path supplied");
    return;
  }
  const fs::path dir =
      fs::temp_directory_path() / ("lcen_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  // Stand-in for a user-supplied empirical dataset: correlated spectra-like
  // features, sparse ground truth, noisy response, train/test files.
  {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> dist(0.0, 1.0);
    const int n = 400, m = 20;
    std::ofstream train(dir / "train.csv");
    std::ofstream test(dir / "test.csv");
    for (auto* out : {&train, &test}) {
      for (int j = 0; j < m; ++j) *out << "w" << j << ",";
      *out << "response\n";
    }
    for (int i = 0; i < n + 200; ++i) {
      Eigen::VectorXd z(m);
      for (int j = 0; j < m; ++j) z(j) = dist(rng);
      Eigen::VectorXd x(m);
      x(0) = z(0);
      for (int j = 1; j < m; ++j) x(j) = 0.5 * z(j - 1) + 0.9 * z(j);
      const double y = 2.0 * x(0) - 1.5 * x(7) + 0.8 * x(13) + 0.2 * dist(rng);
      auto* out = i < n ? &train : &test;
      for (int j = 0; j < m; ++j) *out << x(j) << ",";
      *out << y << "\n";
    }
  }

  auto run = [&](const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " > " +
                            (dir / "out.txt").string() + " 2> " +
                            (dir / "err.txt").string();
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  auto slurp = [&](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };

  const std::string train = (dir / "train.csv").string();
  const std::string test = (dir / "test.csv").string();

  c.expect(run("fit " + train + " --target response --degree-list 1 "
               "--cutoff 0.01 --seed 1 --out " + (dir / "model.json").string()) == 0,
           "fit failed on the user CSV");
  c.expect(fs::exists(dir / "model.json"), "model.json missing");

  c.expect(run("predict " + (dir / "model.json").string() + " " + test +
               " --target response --out " + (dir / "pred.csv").string()) == 0,
           "predict failed on the test CSV");

  const int sweep_rc =
      run("sweep " + train + " --target response --degree-list 1 --seed 1 "
          "--cutoffs 0.01,0.05,0.2,1.0 --test " + test + " --out " +
          (dir / "sweep.tsv").string());
  c.expect(sweep_rc == 0, "sweep failed");
  if (sweep_rc == 0) {
    // Table format: cutoff, n_features, val RMSE, test RMSE; monotone
    // feature counts down the rows.
    const std::string tsv = slurp(dir / "sweep.tsv");
    std::istringstream is(tsv);
    std::string line;
    int prev = 1 << 20, rows = 0;
    bool header_ok = false, monotone = true;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header_ok) {
        header_ok = line == "cutoff\tn_features\tval_rmse\ttest_rmse";
        continue;
      }
      std::istringstream ls(line);
      std::string cutoff, nfeat, val, tst;
      std::getline(ls, cutoff, '\t');
      std::getline(ls, nfeat, '\t');
      std::getline(ls, val, '\t');
      std::getline(ls, tst, '\t');
      monotone = monotone && std::stoi(nfeat) <= prev;
      prev = std::stoi(nfeat);
      c.expect(std::stod(val) > 0.0 && std::stod(tst) > 0.0,
               "sweep row missing RMSE values");
      ++rows;
    }
    c.expect(header_ok, "sweep table header mismatch");
    c.expect(rows == 4, "sweep table row count " + std::to_string(rows));
    c.expect(monotone, "sweep feature counts not monotone");
  }

  const int ablate_rc = run("ablate " + train + " --target response "
                            "--degree-list 1 --seed 1 --cutoff 0.05 --out " +
                            (dir / "ablate.tsv").string());
  c.expect(ablate_rc == 0, "ablate failed");
  if (ablate_rc == 0) {
    const std::string tsv = slurp(dir / "ablate.tsv");
    int rows = 0;
    std::istringstream is(tsv);
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line[0] != '#') ++rows;
    }
    c.expect(rows == 7, "ablate table should have a header and six pipelines");
  }

  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];

  criterion(1, "linear 5-variable recovery", criterion1_linear5);
  criterion(2, "relativistic energy rediscovery", criterion2_relativistic);
  criterion(3, "Kepler's third law rediscovery", criterion3_kepler);
  criterion(4, "multicollinearity map", criterion4_multicollinearity);
  criterion(5, "bias-variance degree selection", criterion5_degree_selection);
  criterion(6, "ablation ordering", criterion6_ablation);
  criterion(7, "solver oracles", criterion7_solver_oracles);
  criterion(8, "expansion counts and round trip", criterion8_expansion);
  criterion(9, "property suite", criterion9_properties);
  criterion(10, "external-data harness", criterion10_external_harness);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria failed\n", g_failures);
  }
  return g_failures;
}
