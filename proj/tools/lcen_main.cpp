// Command-line front end: dataset generation, fitting, prediction,
// forecasting, sparsification sweeps, ablation comparison, and VIF
// diagnostics. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numerical failure.

#include "lcen/common.hpp"
#include "lcen/datagen.hpp"
#include "lcen/model_io.hpp"
#include "lcen/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using lcen::Dataset;
using lcen::FittedModel;
using lcen::FitOptions;
using lcen::FoldScheme;
using lcen::HyperGrid;
using lcen::PipelineSpec;

using Provenance = std::map<std::string, std::string>;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

std::string join_int(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

// Options shared by fit / sweep / ablate.
struct FitFlags {
  std::string data_path;
  std::string target;
  std::string pipeline = "LCEN";
  std::vector<double> alphas;
  std::vector<double> l1_ratios;
  std::vector<int> degree_list = {1, 2, 3};
  int lag = 0;
  double cutoff = 1e-2;
  int folds = 5;
  std::uint64_t seed = 1;
  int threads = 0;
  double tol = 1e-6;
  int max_iter = 10000;
  bool positive_alphas = false;
  bool cross_lag = false;
  std::string guard = "auto";
  std::string fold_scheme = "auto";

  void attach(CLI::App* cmd, bool with_pipeline = true) {
    cmd->add_option("data", data_path, "Input CSV file")->required();
    cmd->add_option("--target", target,
                    "Target column name (default: last column)");
    if (with_pipeline) {
      cmd->add_option("--pipeline", pipeline, "Pipeline preset")
          ->check(CLI::IsMember(PipelineSpec::known_names()))
          ->capture_default_str();
    }
    cmd->add_option("--alphas", alphas, "Regularization grid (comma separated)")
        ->delimiter(',');
    cmd->add_flag("--positive-alphas", positive_alphas,
                  "Drop the exact 0 from the default alpha grid");
    cmd->add_option("--l1-ratios", l1_ratios, "L1 ratio grid (comma separated)")
        ->delimiter(',');
    cmd->add_option("--degree-list", degree_list, "Expansion degrees to search")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--lag", lag, "Number of lagged time steps")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--cutoff", cutoff, "Clip threshold on scaled coefficients")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--folds", folds, "Cross-validation folds")
        ->check(CLI::Range(2, 1000))
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Fold-assignment seed")->capture_default_str();
    cmd->add_option("--threads", threads,
                    "Worker threads (0 = LCEN_THREADS env or OpenMP default)");
    cmd->add_option("--tol", tol, "Solver convergence tolerance")
        ->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Solver sweep cap")
        ->capture_default_str();
    cmd->add_flag("--cross-lag-interactions", cross_lag,
                  "Expand lagged variables beyond degree 1");
    cmd->add_option("--guard", guard, "Domain guard for positive-only transforms")
        ->check(CLI::IsMember({"auto", "strict"}))
        ->capture_default_str();
    cmd->add_option("--fold-scheme", fold_scheme,
                    "Fold assignment: auto, shuffled, or ordered")
        ->check(CLI::IsMember({"auto", "shuffled", "ordered"}))
        ->capture_default_str();
  }

  HyperGrid grid() const {
    HyperGrid g = HyperGrid::defaults();
    if (!alphas.empty()) g.alphas = alphas;
    if (positive_alphas) {
      std::erase(g.alphas, 0.0);
      if (g.alphas.empty()) throw lcen::data_error("alpha grid is empty");
    }
    if (!l1_ratios.empty()) g.l1_ratios = l1_ratios;
    g.degrees = degree_list;
    g.lags = {lag};
    g.cutoff = cutoff;
    g.folds = folds;
    g.validate();
    return g;
  }

  FitOptions options(const Dataset& ds) const {
    FitOptions o;
    o.seed = seed;
    o.threads = threads;
    o.tol = tol;
    o.max_iter = max_iter;
    o.cross_lag_interactions = cross_lag;
    o.domain_guard = guard == "strict" ? lcen::DomainGuard::kStrict
                                       : lcen::DomainGuard::kAuto;
    o.fold_scheme = fold_scheme == "ordered"    ? FoldScheme::kOrdered
                    : fold_scheme == "shuffled" ? FoldScheme::kShuffled
                                                : FoldScheme::kAuto;
    o.feature_names = ds.feature_names;
    o.target_name = ds.target_name;
    return o;
  }

  Provenance provenance() const {
    const HyperGrid g = grid();
    Provenance p;
    p["data"] = data_path;
    p["target"] = target.empty() ? "(last column)" : target;
    p["pipeline"] = pipeline;
    p["alphas"] = join(g.alphas);
    p["l1_ratios"] = join(g.l1_ratios);
    p["degree_list"] = join_int(g.degrees);
    p["lag"] = std::to_string(lag);
    p["cutoff"] = fmt(cutoff);
    p["folds"] = std::to_string(folds);
    p["seed"] = std::to_string(seed);
    p["tol"] = fmt(tol);
    p["max_iter"] = std::to_string(max_iter);
    p["guard"] = guard;
    p["fold_scheme"] = fold_scheme;
    p["cross_lag_interactions"] = cross_lag ? "true" : "false";
    p["library_version"] = lcen::kLibraryVersion;
    return p;
  }
};

double validation_rmse(const FittedModel& m) {
  const lcen::CVResult& cv = m.stage2_cv.has_value() ? *m.stage2_cv : m.stage1_cv;
  return std::sqrt(cv.best().mean_mse);
}

void print_cv_table(std::ostream& os, const char* title, const lcen::CVResult& cv) {
  os << title << " (degree, lag, alpha, l1_ratio -> mean validation MSE):\n";
  for (const auto& r : cv.records) {
    os << "  " << r.degree << '\t' << r.lag << '\t' << fmt(r.alpha) << '\t'
       << fmt(r.l1_ratio) << '\t'
       << (r.failed ? std::string("failed") : fmt(r.mean_mse)) << '\n';
  }
}

void print_report(std::ostream& os, const FittedModel& m, const Dataset& ds,
                  const Provenance& prov, double seconds) {
  os << "pipeline: " << m.hyperparameters.pipeline << '\n';
  os << "data: n=" << ds.rows() << " features=" << ds.features() << " target=\""
     << ds.target_name << "\"\n";
  os << "config:\n";
  for (const auto& [k, v] : prov) os << "  " << k << " = " << v << '\n';
  os << "chosen hyperparameters: degree=" << m.hyperparameters.degree
     << " lag=" << m.hyperparameters.lag << " alpha=" << fmt(m.hyperparameters.alpha)
     << " l1_ratio=" << fmt(m.hyperparameters.l1_ratio)
     << " cutoff=" << fmt(m.hyperparameters.cutoff) << '\n';
  os << "model: " << m.equation() << '\n';
  os << "features selected: " << m.n_features_selected << '\n';
  if (m.degenerate) {
    os << "warning: degenerate model (every feature was clipped); "
          "predictions are the training mean\n";
  }
  os << "train rmse: " << fmt6(m.train_metrics.rmse)
     << "  mse: " << fmt6(m.train_metrics.mse)
     << "  mean relative error: " << fmt6(m.train_metrics.mean_relative_error)
     << "%\n";
  os << "validation rmse: " << fmt6(validation_rmse(m)) << '\n';
  os << "runtime: " << fmt6(seconds) << " s\n";
  print_cv_table(os, "stage 1 CV", m.stage1_cv);
  if (m.stage2_cv.has_value()) print_cv_table(os, "stage 2 CV", *m.stage2_cv);
}

void write_provenance_comments(std::ostream& os, const Provenance& prov) {
  for (const auto& [k, v] : prov) os << "# " << k << " = " << v << '\n';
}

// ---------------------------------------------------------------------------
// gen

struct GenFlags {
  std::string generator;
  std::string out = "dataset";
  int n = 1000;
  int n_train = 30;
  int n_test = 1000;
  double noise = 0.0;
  double noise_variance = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double mass_max = 100.0;
  std::uint64_t seed = 1;
};

void write_generated(const lcen::GeneratedDataset& g, const std::string& csv_path,
                     const std::string& meta_path, const Provenance& prov) {
  lcen::save_csv(csv_path, g.data);
  nlohmann::json meta = lcen::dataset_meta_to_json(g);
  meta["config"] = prov;
  std::ofstream out(meta_path);
  if (!out) throw lcen::data_error("cannot write sidecar: " + meta_path);
  out << meta.dump(2) << '\n';
}

int cmd_gen(const GenFlags& f) {
  Provenance prov;
  prov["generator"] = f.generator;
  prov["seed"] = std::to_string(f.seed);
  prov["out"] = f.out;

  using lcen::NoiseSpec;
  if (f.generator == "linear5") {
    prov["n"] = std::to_string(f.n);
    prov["noise"] = fmt(f.noise);
    write_generated(lcen::gen_linear5(f.n, NoiseSpec::percent(f.noise, f.seed)),
                    f.out + ".csv", f.out + ".json", prov);
  } else if (f.generator == "multicollinear") {
    prov["n"] = std::to_string(f.n);
    prov["eps1"] = fmt(f.eps1);
    prov["eps2"] = fmt(f.eps2);
    write_generated(
        lcen::gen_multicollinear(f.n, NoiseSpec::percent(f.eps1, f.seed),
                                 NoiseSpec::percent(f.eps2, f.seed)),
        f.out + ".csv", f.out + ".json", prov);
  } else if (f.generator == "relativistic") {
    prov["n"] = std::to_string(f.n);
    prov["noise"] = fmt(f.noise);
    prov["mass_max"] = fmt(f.mass_max);
    write_generated(
        lcen::gen_relativistic(f.n, f.mass_max, NoiseSpec::percent(f.noise, f.seed)),
        f.out + ".csv", f.out + ".json", prov);
  } else if (f.generator == "quartic") {
    prov["n_train"] = std::to_string(f.n_train);
    prov["n_test"] = std::to_string(f.n_test);
    prov["noise_variance"] = fmt(f.noise_variance);
    const lcen::QuarticPair q =
        lcen::gen_quartic(f.n_train, f.n_test, f.noise_variance, f.seed);
    write_generated(q.train, f.out + "_train.csv", f.out + "_train.json", prov);
    write_generated(q.test, f.out + "_test.csv", f.out + "_test.json", prov);
    std::cout << "wrote " << f.out << "_train.csv and " << f.out << "_test.csv\n";
    return 0;
  } else if (f.generator == "kepler_modern") {
    write_generated(lcen::kepler_data(lcen::KeplerVersion::kModern),
                    f.out + ".csv", f.out + ".json", prov);
  } else if (f.generator == "kepler_1619") {
    write_generated(lcen::kepler_data(lcen::KeplerVersion::kOriginal1619),
                    f.out + ".csv", f.out + ".json", prov);
  } else {
    throw lcen::data_error("unknown generator: " + f.generator);
  }
  std::cout << "wrote " << f.out << ".csv and " << f.out << ".json\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const FitFlags& f, const std::string& out_path,
            const std::string& report_path) {
  const Dataset ds = lcen::load_csv(f.data_path, f.target);
  const HyperGrid grid = f.grid();
  const FitOptions opt = f.options(ds);
  const PipelineSpec spec = PipelineSpec::from_name(f.pipeline);

  const auto t0 = std::chrono::steady_clock::now();
  const FittedModel model = lcen::fit_pipeline(ds.X, ds.y, grid, spec, opt);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const Provenance prov = f.provenance();
  lcen::save_model(model, out_path, prov);

  std::ostringstream report;
  print_report(report, model, ds, prov, seconds);
  std::cout << report.str();
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw lcen::data_error("cannot write report: " + report_path);
    out << report.str();
  }
  if (model.degenerate) {
    std::cerr << "warning: degenerate model (every feature was clipped)\n";
  }
  std::cout << "model written to " << out_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// predict / forecast

Dataset load_for_model(const std::string& path, const std::string& target,
                       bool no_target) {
  Dataset ds = lcen::load_csv(path, target);
  if (no_target) {
    // Treat every column as a feature; the model provides no truth to score.
    Eigen::MatrixXd X(ds.rows(), ds.features() + 1);
    X.leftCols(ds.features()) = ds.X;
    X.col(ds.features()) = ds.y;
    ds.X = std::move(X);
    ds.feature_names.push_back(ds.target_name);
    ds.y.resize(0);
  }
  return ds;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& target, bool no_target,
                const std::string& out_path) {
  const FittedModel model = lcen::load_model(model_path);
  const Dataset ds = load_for_model(data_path, target, no_target);
  if (model.hyperparameters.lag > 0 && no_target) {
    throw lcen::data_error("lagged models need the target column as history");
  }

  const Eigen::VectorXd preds =
      lcen::predict(model, ds.X, ds.y.size() > 0 ? &ds.y : nullptr);
  const int offset = model.hyperparameters.lag;

  std::ofstream out(out_path);
  if (!out) throw lcen::data_error("cannot write predictions: " + out_path);
  out << "row,prediction" << (no_target ? "" : ",truth") << '\n';
  for (int i = 0; i < preds.size(); ++i) {
    out << (offset + i) << ',' << fmt(preds(i));
    if (!no_target) out << ',' << fmt(ds.y(offset + i));
    out << '\n';
  }
  std::cout << "predictions written to " << out_path << " (" << preds.size()
            << " rows)\n";

  if (!no_target) {
    const Eigen::VectorXd truth = ds.y.tail(preds.size());
    const lcen::Metrics m = lcen::compute_metrics(truth, preds);
    std::cout << "rmse: " << fmt6(m.rmse) << "  mse: " << fmt6(m.mse)
              << "  mean relative error: " << fmt6(m.mean_relative_error)
              << "%\n";
  }
  return 0;
}

int cmd_forecast(const std::string& model_path, const std::string& data_path,
                 const std::string& target, int horizon,
                 const std::string& future_path, const std::string& out_path) {
  const FittedModel model = lcen::load_model(model_path);
  const Dataset hist = lcen::load_csv(data_path, target);

  lcen::History h;
  h.X = hist.X;
  h.y = hist.y;

  std::optional<Dataset> future;
  if (!future_path.empty()) future = lcen::load_csv(future_path, target);

  const Eigen::VectorXd f = lcen::forecast(
      model, h, horizon, future.has_value() ? &future->X : nullptr);

  std::ofstream out(out_path);
  if (!out) throw lcen::data_error("cannot write forecast: " + out_path);
  const bool with_truth = future.has_value() && future->rows() >= horizon;
  out << "step,forecast" << (with_truth ? ",truth" : "") << '\n';
  for (int s = 0; s < horizon; ++s) {
    out << (s + 1) << ',' << fmt(f(s));
    if (with_truth) out << ',' << fmt(future->y(s));
    out << '\n';
  }
  std::cout << "forecast written to " << out_path << " (" << horizon
            << " steps)\n";
  if (with_truth) {
    const Eigen::VectorXd truth = future->y.head(horizon);
    const lcen::Metrics m = lcen::compute_metrics(truth, f);
    std::cout << "rmse: " << fmt6(m.rmse) << "  mse: " << fmt6(m.mse)
              << "  mean relative error: " << fmt6(m.mean_relative_error)
              << "%\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep / ablate / vif

int cmd_sweep(const FitFlags& f, std::vector<double> cutoffs,
              const std::string& test_path, const std::string& out_path) {
  if (cutoffs.empty()) throw lcen::data_error("sweep: no cutoffs given");
  std::sort(cutoffs.begin(), cutoffs.end());

  const Dataset ds = lcen::load_csv(f.data_path, f.target);
  HyperGrid grid = f.grid();
  grid.cutoff = cutoffs.front();
  const FitOptions opt = f.options(ds);
  const PipelineSpec spec = PipelineSpec::from_name(f.pipeline);

  const FittedModel base = lcen::fit_pipeline(ds.X, ds.y, grid, spec, opt);
  const std::vector<FittedModel> models =
      lcen::sparsify(base, ds.X, ds.y, cutoffs, opt);

  std::optional<Dataset> test;
  if (!test_path.empty()) test = lcen::load_csv(test_path, f.target);

  std::ostringstream table;
  Provenance prov = f.provenance();
  prov["cutoffs"] = join(cutoffs);
  write_provenance_comments(table, prov);
  table << "cutoff\tn_features\tval_rmse\ttest_rmse\n";
  for (const FittedModel& m : models) {
    table << fmt(m.hyperparameters.cutoff) << '\t' << m.n_features_selected
          << '\t' << fmt6(validation_rmse(m)) << '\t';
    if (test.has_value()) {
      const Eigen::VectorXd pred =
          lcen::predict(m, test->X, test->y.size() > 0 ? &test->y : nullptr);
      const Eigen::VectorXd truth = test->y.tail(pred.size());
      table << fmt6(lcen::compute_metrics(truth, pred).rmse);
    } else {
      table << "nan";
    }
    table << '\n';
  }
  std::cout << table.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw lcen::data_error("cannot write table: " + out_path);
    out << table.str();
  }
  return 0;
}

int cmd_ablate(const FitFlags& f, const std::string& test_path,
               const std::string& out_path) {
  const Dataset ds = lcen::load_csv(f.data_path, f.target);
  const HyperGrid grid = f.grid();
  const FitOptions opt = f.options(ds);

  std::optional<Dataset> test;
  if (!test_path.empty()) test = lcen::load_csv(test_path, f.target);

  std::ostringstream table;
  write_provenance_comments(table, f.provenance());
  table << "pipeline\tval_rmse\ttest_rmse\tn_features\truntime_s\n";
  for (const std::string& name : PipelineSpec::known_names()) {
    const auto t0 = std::chrono::steady_clock::now();
    const FittedModel m =
        lcen::fit_pipeline(ds.X, ds.y, grid, PipelineSpec::from_name(name), opt);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    table << name << '\t' << fmt6(validation_rmse(m)) << '\t';
    if (test.has_value()) {
      const Eigen::VectorXd pred =
          lcen::predict(m, test->X, test->y.size() > 0 ? &test->y : nullptr);
      const Eigen::VectorXd truth = test->y.tail(pred.size());
      table << fmt6(lcen::compute_metrics(truth, pred).rmse);
    } else {
      table << "nan";
    }
    table << '\t' << m.n_features_selected << '\t' << fmt6(secs) << '\n';
  }
  std::cout << table.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw lcen::data_error("cannot write table: " + out_path);
    out << table.str();
  }
  return 0;
}

int cmd_vif(const std::string& data_path, const std::string& target) {
  const Dataset ds = lcen::load_csv(data_path, target);
  const Eigen::VectorXd v = lcen::vif(ds.X);
  std::cout << "feature\tvif\n";
  for (int j = 0; j < v.size(); ++j) {
    const std::string name = j < static_cast<int>(ds.feature_names.size())
                                 ? ds.feature_names[static_cast<std::size_t>(j)]
                                 : "X" + std::to_string(j);
    std::cout << name << '\t' << (std::isinf(v(j)) ? "inf" : fmt6(v(j))) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LCEN: sparse nonlinear regression via LASSO-Clip-EN"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI-style options file, one [section] per subcommand");

  std::function<int()> run;

  // gen
  GenFlags gen;
  CLI::App* cgen = app.add_subcommand("gen", "Generate an artificial dataset");
  cgen->add_option("generator", gen.generator,
                   "linear5 | multicollinear | relativistic | quartic | "
                   "kepler_modern | kepler_1619")
      ->required();
  cgen->add_option("--out", gen.out, "Output path prefix")->capture_default_str();
  cgen->add_option("--n", gen.n, "Sample count")->capture_default_str();
  cgen->add_option("--n-train", gen.n_train, "Training samples (quartic)")
      ->capture_default_str();
  cgen->add_option("--n-test", gen.n_test, "Test samples (quartic)")
      ->capture_default_str();
  cgen->add_option("--noise", gen.noise, "Noise level, percent of signal std")
      ->capture_default_str();
  cgen->add_option("--noise-variance", gen.noise_variance,
                   "Direct noise variance (quartic)")
      ->capture_default_str();
  cgen->add_option("--eps1", gen.eps1, "X noise percent (multicollinear)")
      ->capture_default_str();
  cgen->add_option("--eps2", gen.eps2, "y noise percent (multicollinear)")
      ->capture_default_str();
  cgen->add_option("--mass-max", gen.mass_max, "Mass range upper bound")
      ->capture_default_str();
  cgen->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  cgen->callback([&] { run = [&] { return cmd_gen(gen); }; });

  // fit
  FitFlags fit;
  std::string fit_out = "model.json";
  std::string fit_report;
  CLI::App* cfit = app.add_subcommand("fit", "Fit a pipeline to a CSV dataset");
  fit.attach(cfit);
  cfit->add_option("--out", fit_out, "Model JSON output path")->capture_default_str();
  cfit->add_option("--report", fit_report, "Also write the report to this file");
  cfit->callback([&] { run = [&] { return cmd_fit(fit, fit_out, fit_report); }; });

  // predict
  std::string p_model, p_data, p_target, p_out = "predictions.csv";
  bool p_no_target = false;
  CLI::App* cpred = app.add_subcommand("predict", "Predict with a saved model");
  cpred->add_option("model", p_model, "Model JSON path")->required();
  cpred->add_option("data", p_data, "Input CSV file")->required();
  cpred->add_option("--target", p_target, "Target column name");
  cpred->add_flag("--no-target", p_no_target,
                  "Data has no target column (metrics suppressed)");
  cpred->add_option("--out", p_out, "Predictions CSV path")->capture_default_str();
  cpred->callback([&] {
    run = [&] { return cmd_predict(p_model, p_data, p_target, p_no_target, p_out); };
  });

  // forecast
  std::string fc_model, fc_data, fc_target, fc_future, fc_out = "forecast.csv";
  int fc_horizon = 24;
  CLI::App* cfc = app.add_subcommand(
      "forecast", "Recursive multi-step forecast from a lagged model");
  cfc->add_option("model", fc_model, "Model JSON path")->required();
  cfc->add_option("data", fc_data, "History CSV (tail is used as context)")
      ->required();
  cfc->add_option("--target", fc_target, "Target column name");
  cfc->add_option("--horizon", fc_horizon, "Steps to forecast")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cfc->add_option("--future", fc_future,
                  "CSV with future rows (exogenous inputs and/or truth)");
  cfc->add_option("--out", fc_out, "Forecast CSV path")->capture_default_str();
  cfc->callback([&] {
    run = [&] {
      return cmd_forecast(fc_model, fc_data, fc_target, fc_horizon, fc_future, fc_out);
    };
  });

  // sweep
  FitFlags sweep;
  std::vector<double> sweep_cutoffs;
  std::string sweep_test, sweep_out;
  CLI::App* csweep = app.add_subcommand(
      "sweep", "Sparsification sweep over ascending cutoffs");
  sweep.attach(csweep);
  csweep->add_option("--cutoffs", sweep_cutoffs, "Cutoff values (comma separated)")
      ->delimiter(',')
      ->required();
  csweep->add_option("--test", sweep_test, "Test CSV for held-out RMSE");
  csweep->add_option("--out", sweep_out, "Write the TSV table to this file");
  csweep->callback([&] {
    run = [&] { return cmd_sweep(sweep, sweep_cutoffs, sweep_test, sweep_out); };
  });

  // ablate
  FitFlags ablate;
  std::string ablate_test, ablate_out;
  CLI::App* cab = app.add_subcommand(
      "ablate", "Compare LCEN against its ablated and variant pipelines");
  ablate.attach(cab, /*with_pipeline=*/false);
  cab->add_option("--test", ablate_test, "Test CSV for held-out RMSE");
  cab->add_option("--out", ablate_out, "Write the TSV table to this file");
  cab->callback([&] {
    run = [&] { return cmd_ablate(ablate, ablate_test, ablate_out); };
  });

  // vif
  std::string v_data, v_target;
  CLI::App* cvif = app.add_subcommand(
      "vif", "Variance inflation factors of the feature columns");
  cvif->add_option("data", v_data, "Input CSV file")->required();
  cvif->add_option("--target", v_target, "Target column name");
  cvif->callback([&] { run = [&] { return cmd_vif(v_data, v_target); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return run();
  } catch (const lcen::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const lcen::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
