// Compares the OpenMP kernels against their serial reference
// implementations: basis expansion (column-parallel) and the CV grid search
// (parallel over fold/ratio work items). Also reports the Gram-based
// coordinate-descent path throughput.

#include "lcen/common.hpp"
#include "lcen/datagen.hpp"
#include "lcen/enet.hpp"
#include "lcen/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

using namespace lcen;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s < best) best = s;
  }
  return best;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  const int threads = resolve_threads(0);
  const int reps = quick ? 1 : 3;

  std::printf("lcen benchmark (%d worker threads)\n\n", threads);

  // Basis expansion: n x m inputs, degree-3 family set.
  {
    const int n = quick ? 2000 : 20000;
    const GeneratedDataset g = gen_linear5(n, NoiseSpec::percent(20.0, 1));
    Eigen::MatrixXd X(n, 8);
    X.leftCols(5) = g.data.X;
    X.col(5) = g.data.X.col(0).array() * 1.7 + 0.3;
    X.col(6) = g.data.X.col(1).array() + g.data.X.col(2).array();
    X.col(7) = g.data.X.col(3).array() * g.data.X.col(4).array() / 10.0;
    ExpansionConfig cfg;
    cfg.degree = 3;

    DesignMatrix serial, parallel;
    const double t_ref =
        time_of([&] { serial = expand_reference(X, &g.data.y, cfg); }, reps);
    const double t_one =
        time_of([&] { parallel = expand(X, &g.data.y, cfg, 1); }, reps);
    const double t_par =
        time_of([&] { parallel = expand(X, &g.data.y, cfg, threads); }, reps);
    std::printf("expansion  n=%d cols=%d\n", n, serial.cols());
    std::printf("  reference        %8.2f ms\n", 1e3 * t_ref);
    std::printf("  parallel (T=1)   %8.2f ms\n", 1e3 * t_one);
    std::printf("  parallel (T=%d)   %8.2f ms   speedup vs reference %.2fx\n",
                threads, 1e3 * t_par, t_ref / t_par);
    std::printf("  bitwise match: %s\n\n",
                bitwise_equal(serial.values, parallel.values) ? "yes" : "NO");
  }

  // CV grid search: production (Gram cache + warm starts + threads) against
  // the naive serial reference.
  {
    const int n = quick ? 300 : 2000;
    const GeneratedDataset g = gen_linear5(n, NoiseSpec::percent(40.0, 2));
    CvOptions o;
    o.alphas = HyperGrid::default_alphas();
    o.l1_ratios = {1.0, 0.5};
    o.degrees = {1, 2};
    o.folds = 5;
    o.seed = 3;

    CVResult serial1, parallel, reference;
    o.threads = 1;
    const double t_one = time_of([&] { serial1 = cv_search(g.data.X, g.data.y, o); }, reps);
    o.threads = threads;
    const double t_par = time_of([&] { parallel = cv_search(g.data.X, g.data.y, o); }, reps);
    const double t_ref = time_of(
        [&] { reference = cv_search_reference(g.data.X, g.data.y, o); }, quick ? 1 : 2);

    bool identical = serial1.records.size() == parallel.records.size() &&
                     serial1.best_index == parallel.best_index;
    for (std::size_t i = 0; identical && i < serial1.records.size(); ++i) {
      identical = std::memcmp(&serial1.records[i].mean_mse,
                              &parallel.records[i].mean_mse, sizeof(double)) == 0;
    }
    std::printf("cv grid    n=%d combos=%zu folds=%d\n", n, serial1.records.size(),
                o.folds);
    std::printf("  naive reference  %8.2f ms\n", 1e3 * t_ref);
    std::printf("  production (T=1) %8.2f ms   speedup %.2fx\n", 1e3 * t_one,
                t_ref / t_one);
    std::printf("  production (T=%d) %8.2f ms   speedup %.2fx\n", threads,
                1e3 * t_par, t_ref / t_par);
    std::printf("  T=1 and T=%d tables bit-identical: %s\n", threads,
                identical ? "yes" : "NO");
    const CVRecord& bp = parallel.best();
    const CVRecord& br = reference.best();
    std::printf("  argmin agreement with reference: %s\n\n",
                bp.alpha == br.alpha && bp.degree == br.degree &&
                        bp.l1_ratio == br.l1_ratio
                    ? "yes"
                    : "NO");
  }

  // Coordinate-descent path on a fixed Gram problem.
  {
    const int n = quick ? 2000 : 20000;
    const GeneratedDataset g = gen_relativistic(n, 100.0, NoiseSpec::percent(10.0, 4));
    ExpansionConfig cfg;
    cfg.degree = 5;
    const DesignMatrix dm = expand(g.data.X, &g.data.y, cfg);
    const Eigen::VectorXd ys =
        (g.data.y.array() - dm.scaling.y_mean) / dm.scaling.y_std;
    std::vector<int> rows(static_cast<std::size_t>(dm.rows()));
    for (int i = 0; i < dm.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
    std::vector<int> cols;
    for (int j = 0; j < dm.cols(); ++j) {
      if (j != dm.intercept_column()) cols.push_back(j);
    }

    GramProblem gp;
    const double t_gram = time_of(
        [&] { gp = GramProblem::build_subset(dm.values, ys, rows, cols); }, reps);
    std::vector<double> alphas = HyperGrid::default_alphas();
    std::sort(alphas.rbegin(), alphas.rend());
    const double t_path = time_of(
        [&] { fit_enet_path(gp, alphas, 1.0, 1e-6, 10000); }, reps);
    std::printf("solver     p=%d n=%d\n", static_cast<int>(cols.size()),
                static_cast<int>(rows.size()));
    std::printf("  gram build       %8.2f ms\n", 1e3 * t_gram);
    std::printf("  21-alpha path    %8.2f ms\n", 1e3 * t_path);
  }
  return 0;
}
