#pragma once

#include "lcen/expansion.hpp"

#include <Eigen/Dense>

#include <vector>

namespace lcen {

/// Solver settings. Objective on n samples:
///   (1/2n) * ||y - X b||^2 + alpha * (l1_ratio * ||b||_1
///                                     + (1 - l1_ratio)/2 * ||b||_2^2)
/// alpha = 0 falls back to least squares (ridge-jittered when rank
/// deficient); l1_ratio = 0 is ridge.
struct EnetConfig {
  double alpha = 0.0;
  double l1_ratio = 1.0;
  double tol = 1e-6;   // max coefficient change per sweep
  int max_iter = 10000;  // sweep cap
};

/// Fit result in standardized units, aligned with the design-matrix terms.
/// The intercept slot of `beta` is kept at 0; the intercept itself lives in
/// the dedicated field.
struct Coefficients {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  int n_iters = 0;
  bool converged = true;
};

/// sign(z) * max(|z| - t, 0)
double soft_threshold(double z, double t);

/// Second-moment summaries of column-centered data; the coordinate-descent
/// loop runs on these, so a sweep costs O(p^2) regardless of n.
struct GramProblem {
  Eigen::MatrixXd gram;      // Xc^T Xc / n
  Eigen::VectorXd corr;      // Xc^T yc / n
  double y_var = 0.0;        // yc^T yc / n
  Eigen::VectorXd col_mean;  // original column means
  double y_mean = 0.0;
  int n_samples = 0;

  static GramProblem build(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y);
  /// Restricted to `rows` x `cols` of X (train-fold subsets).
  static GramProblem build_subset(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const std::vector<int>& rows,
                                  const std::vector<int>& cols);
};

struct GramFit {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  int n_iters = 0;
  bool converged = true;
};

/// Cyclic coordinate descent with soft-thresholding on a Gram problem.
/// Deterministic: fixed input (and warm start) gives bit-identical output.
GramFit fit_enet_gram(const GramProblem& p, const EnetConfig& cfg,
                      const Eigen::VectorXd* warm_start = nullptr);

/// Warm-started fits along a descending alpha sequence at fixed l1_ratio.
std::vector<GramFit> fit_enet_path(const GramProblem& p,
                                   const std::vector<double>& alphas_descending,
                                   double l1_ratio, double tol, int max_iter);

/// Penalized objective value; used by the monotonicity checks.
double enet_objective(const GramProblem& p, const Eigen::VectorXd& beta,
                      double alpha, double l1_ratio);

/// Fit on a design matrix (intercept column excluded from the penalty and
/// from the descent). Columns are expected standardized; fold subsets that
/// are merely near-centered are handled by the internal centering.
Coefficients fit_enet(const DesignMatrix& D, const Eigen::VectorXd& y,
                      const EnetConfig& cfg);

struct UnscaledModel {
  Eigen::VectorXd beta;  // term-aligned; intercept slot 0
  double intercept = 0.0;
};

/// Map standardized coefficients back to original units so that predictions
/// from raw features match the standardized path.
UnscaledModel unscale(const Coefficients& coefs, const ScalingInfo& scaling);

}  // namespace lcen
