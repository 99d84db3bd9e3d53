#pragma once

#include "lcen/enet.hpp"
#include "lcen/expansion.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lcen {

/// Cross-validated search space. Defaults follow the shipped grids:
/// alpha = 0 plus 20 log-spaced values in [1e-4.3, 1], thirteen l1 ratios,
/// degrees {1,2,3}, static data (lag 0), cutoff 1e-2, 5 folds.
struct HyperGrid {
  std::vector<double> alphas;
  std::vector<double> l1_ratios;
  std::vector<int> degrees = {1, 2, 3};
  std::vector<int> lags = {0};
  double cutoff = 1e-2;
  int folds = 5;

  static HyperGrid defaults();
  static std::vector<double> default_alphas();
  static std::vector<double> default_l1_ratios();
  void validate() const;
};

enum class Stage : std::uint8_t { kLasso, kEnet, kNone };

/// kAuto: shuffled folds for static data, contiguous folds when any lag in
/// the grid is positive. The explicit values override that rule (contiguous
/// folds reward models that extrapolate, e.g. on small ordered tables).
enum class FoldScheme : std::uint8_t { kAuto, kShuffled, kOrdered };


/// Ordered step list: first stage, optional clip, optional second stage,
/// optional final clip. Named presets cover LCEN and its ablations.
struct PipelineSpec {
  Stage first_stage = Stage::kLasso;
  bool clip_after_first = true;
  Stage second_stage = Stage::kEnet;
  bool clip_after_second = true;
  std::string name = "LCEN";

  static PipelineSpec lcen();    // lasso, clip, enet, clip
  static PipelineSpec lc();      // lasso, clip
  static PipelineSpec enc();     // enet, clip
  static PipelineSpec len();     // lasso, enet (no clips)
  static PipelineSpec lcl();     // lasso, clip, lasso, clip
  static PipelineSpec encen();   // enet, clip, enet, clip
  static PipelineSpec from_name(const std::string& name);
  static const std::vector<std::string>& known_names();
};

struct CVRecord {
  double alpha = 0.0;
  double l1_ratio = 1.0;
  int degree = 1;
  int lag = 0;
  double mean_mse = 0.0;  // validation MSE in original output units
  bool failed = false;
};

struct CVResult {
  std::vector<CVRecord> records;
  int best_index = -1;
  std::uint64_t seed = 0;
  const CVRecord& best() const;
};

struct Metrics {
  double rmse = 0.0;
  double mse = 0.0;
  double mean_relative_error = 0.0;  // percent, over entries with y != 0
};

/// rmse/mse plus mean(|yhat-y|/|y|)*100 over nonzero truths.
Metrics compute_metrics(const Eigen::VectorXd& y_true,
                        const Eigen::VectorXd& y_pred);

struct ChosenHyperparams {
  double alpha = 0.0;
  double l1_ratio = 1.0;
  int degree = 1;
  int lag = 0;
  double cutoff = 0.0;
  int folds = 5;
  std::string pipeline = "LCEN";
};

/// Final fitted model: surviving terms (intercept first), coefficients in
/// both unit systems, chosen hyperparameters, and full CV provenance.
/// unscaled_beta[0] holds the intercept in original units.
struct FittedModel {
  std::vector<FeatureTerm> terms;
  Eigen::VectorXd scaled_beta;
  Eigen::VectorXd unscaled_beta;
  double intercept = 0.0;
  ChosenHyperparams hyperparameters;
  CVResult stage1_cv;
  std::optional<CVResult> stage2_cv;
  Metrics train_metrics;
  int n_features_selected = 0;
  bool degenerate = false;
  std::uint64_t seed = 0;

  // Prediction context.
  ScalingInfo scaling;  // aligned with `terms`
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  DomainGuard domain_guard = DomainGuard::kAuto;
  TransformFamilies families;
  bool cross_lag_interactions = false;
  FoldScheme fold_scheme = FoldScheme::kAuto;

  std::string equation(int sig_digits = 6) const;
};

/// Fold id per row. ordered=true gives contiguous blocks (time series);
/// otherwise a seeded shuffle. Sizes differ by at most one, larger folds
/// first.
std::vector<int> kfold_split(int n, int k, bool ordered, std::uint64_t seed);

struct CvOptions {
  std::vector<double> alphas;
  std::vector<double> l1_ratios;
  std::vector<int> degrees = {1};
  std::vector<int> lags = {0};
  int folds = 5;
  std::uint64_t seed = 0;
  FoldScheme fold_scheme = FoldScheme::kAuto;
  ExpansionConfig expansion;  // degree/lag overridden per combination
  /// Column filter into the expansion at the (single) degree/lag; used by
  /// the second pipeline stage.
  std::optional<std::vector<int>> support;
  double tol = 1e-6;
  int max_iter = 10000;
  int threads = 0;
};

/// Grid search: for each (alpha, l1_ratio, degree, lag) combination, expand
/// at (degree, lag), fit on k-1 folds, score MSE on the held-out fold, and
/// average. Ties in the argmin prefer larger alpha, then smaller degree,
/// then smaller lag, then larger l1_ratio. Work items run in parallel; the
/// table and argmin are identical to the sequential result.
CVResult cv_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const CvOptions& options);

/// Naive serial reference: cold solver calls, no Gram caching or warm
/// starts. Kept for equivalence tests and the benchmark.
CVResult cv_search_reference(const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y,
                             const CvOptions& options);

/// Zero every entry with |beta_j| < cutoff; the intercept is untouched.
Coefficients clip(Coefficients coefs, double cutoff);

struct FitOptions {
  std::uint64_t seed = 0;
  int threads = 0;
  FoldScheme fold_scheme = FoldScheme::kAuto;
  double tol = 1e-6;
  int max_iter = 10000;
  TransformFamilies families;
  DomainGuard domain_guard = DomainGuard::kAuto;
  bool cross_lag_interactions = false;
  int max_degree_guardrail = 10;
  std::vector<std::string> feature_names;
  std::string target_name = "y";
};

/// Run a pipeline end to end. An all-clipped first stage yields an
/// intercept-only model flagged degenerate rather than an error.
FittedModel fit_pipeline(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const HyperGrid& grid, const PipelineSpec& spec,
                         const FitOptions& options = {});

/// Re-run the final clip + second-stage refit at each cutoff (ascending,
/// each >= the model's own). Supports shrink monotonically because each
/// step clips the previous step's survivors.
std::vector<FittedModel> sparsify(const FittedModel& model,
                                  const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const std::vector<double>& cutoffs,
                                  const FitOptions& options = {});

/// One-step-ahead predictions from raw rows. For lag L > 0 the first L rows
/// are consumed as history (requires y) and n - L predictions are returned.
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd* y = nullptr);

/// Recursive multi-step forecast: each prediction feeds back as a lagged
/// output. `future_X` (horizon x m) supplies exogenous inputs when the
/// model uses input factors.
Eigen::VectorXd forecast(const FittedModel& model, const History& history,
                         int horizon,
                         const Eigen::MatrixXd* future_X = nullptr);

/// Variance inflation factors: VIF_j = 1 / (1 - R_j^2) from regressing
/// column j on the others. Perfect collinearity reports +inf.
Eigen::VectorXd vif(const Eigen::MatrixXd& X);

}  // namespace lcen
