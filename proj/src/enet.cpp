#include "lcen/enet.hpp"

#include "lcen/common.hpp"

#include <cmath>
#include <stdexcept>

namespace lcen {

namespace {

void validate_config(const EnetConfig& cfg) {
  if (cfg.alpha < 0.0) throw std::invalid_argument("enet: alpha < 0");
  if (cfg.l1_ratio < 0.0 || cfg.l1_ratio > 1.0) {
    throw std::invalid_argument("enet: l1_ratio outside [0, 1]");
  }
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("enet: tol must be > 0");
  if (cfg.max_iter < 1) throw std::invalid_argument("enet: max_iter < 1");
}

// alpha = 0: plain least squares on the Gram system; rank-deficient systems
// get a 1e-12 diagonal jitter (ridge limit, approximates the minimum-norm
// solution).
Eigen::VectorXd solve_least_squares(const GramProblem& p) {
  const int dim = static_cast<int>(p.gram.rows());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.gram);
  if (qr.rank() == dim) return qr.solve(p.corr);
  Eigen::MatrixXd jittered = p.gram;
  jittered.diagonal().array() += 1e-12;
  return jittered.ldlt().solve(p.corr);
}

}  // namespace

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

GramProblem GramProblem::build(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (X.rows() != y.size()) {
    throw std::invalid_argument("gram: X and y row counts differ");
  }
  if (X.rows() < 1) throw std::invalid_argument("gram: empty data");

  GramProblem p;
  const double n = static_cast<double>(X.rows());
  p.n_samples = static_cast<int>(X.rows());
  p.col_mean = X.colwise().mean();
  p.y_mean = y.mean();

  Eigen::MatrixXd Xc = X.rowwise() - p.col_mean.transpose();
  Eigen::VectorXd yc = y.array() - p.y_mean;
  p.gram.noalias() = Xc.transpose() * Xc / n;
  p.corr.noalias() = Xc.transpose() * yc / n;
  p.y_var = yc.squaredNorm() / n;
  return p;
}

GramProblem GramProblem::build_subset(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y,
                                      const std::vector<int>& rows,
                                      const std::vector<int>& cols) {
  Eigen::MatrixXd Xs = X(rows, cols);
  Eigen::VectorXd ys = y(rows);
  return build(Xs, ys);
}

GramFit fit_enet_gram(const GramProblem& p, const EnetConfig& cfg,
                      const Eigen::VectorXd* warm_start) {
  validate_config(cfg);
  const int dim = static_cast<int>(p.gram.rows());

  GramFit fit;
  if (dim == 0) {
    fit.beta.resize(0);
    fit.intercept = p.y_mean;
    return fit;
  }

  if (cfg.alpha == 0.0) {
    fit.beta = solve_least_squares(p);
    fit.intercept = p.y_mean - fit.beta.dot(p.col_mean);
    return fit;
  }

  const double lam1 = cfg.alpha * cfg.l1_ratio;
  const double lam2 = cfg.alpha * (1.0 - cfg.l1_ratio);

  Eigen::VectorXd beta;
  if (warm_start != nullptr && warm_start->size() == dim) {
    beta = *warm_start;
  } else {
    beta = Eigen::VectorXd::Zero(dim);
  }
  Eigen::VectorXd q = p.gram * beta;  // gram * beta, maintained incrementally

  auto update_coord = [&](int j) {
    const double gjj = p.gram(j, j);
    const double denom = gjj + lam2;
    const double z = p.corr(j) - q(j) + gjj * beta(j);
    const double bj = denom > 0.0 ? soft_threshold(z, lam1) / denom : 0.0;
    const double d = bj - beta(j);
    if (d != 0.0) {
      q.noalias() += p.gram.col(j) * d;
      beta(j) = bj;
    }
    return std::abs(d);
  };
  auto coord_kkt = [&](int j) {
    const double g = p.corr(j) - q(j);
    if (beta(j) != 0.0) {
      return std::abs(g - lam2 * beta(j) - lam1 * (beta(j) > 0.0 ? 1.0 : -1.0));
    }
    return std::max(0.0, std::abs(g) - lam1);
  };

  // Converged means a full sweep moved no coefficient by more than tol AND
  // every coordinate meets its stationarity condition to 10*tol. The delta
  // criterion alone stalls on near-collinear designs long before the
  // optimum, so between full sweeps the active (nonzero) set is iterated
  // until its own KKT residuals clear. Full sweeps count toward max_iter.
  constexpr int kMaxInnerSweeps = 10000;
  const double kkt_tol = 10.0 * cfg.tol;

  fit.converged = false;
  int iter = 0;
  std::vector<int> active;
  active.reserve(static_cast<std::size_t>(dim));
  while (iter < cfg.max_iter) {
    ++iter;
    double max_delta = 0.0;
    for (int j = 0; j < dim; ++j) max_delta = std::max(max_delta, update_coord(j));

    double worst_kkt = 0.0;
    for (int j = 0; j < dim; ++j) worst_kkt = std::max(worst_kkt, coord_kkt(j));
    if (max_delta <= cfg.tol && worst_kkt <= kkt_tol) {
      fit.converged = true;
      break;
    }

    active.clear();
    for (int j = 0; j < dim; ++j) {
      if (beta(j) != 0.0) active.push_back(j);
    }
    for (int inner = 0; inner < kMaxInnerSweeps && !active.empty(); ++inner) {
      double inner_delta = 0.0;
      for (int j : active) inner_delta = std::max(inner_delta, update_coord(j));
      if (inner_delta > cfg.tol) continue;
      double inner_kkt = 0.0;
      for (int j : active) inner_kkt = std::max(inner_kkt, coord_kkt(j));
      if (inner_kkt <= kkt_tol) break;
    }
  }

  fit.beta = std::move(beta);
  fit.intercept = p.y_mean - fit.beta.dot(p.col_mean);
  fit.n_iters = iter;
  return fit;
}

std::vector<GramFit> fit_enet_path(const GramProblem& p,
                                   const std::vector<double>& alphas_descending,
                                   double l1_ratio, double tol, int max_iter) {
  for (std::size_t i = 1; i < alphas_descending.size(); ++i) {
    if (alphas_descending[i] > alphas_descending[i - 1]) {
      throw std::invalid_argument("enet path: alphas must be non-increasing");
    }
  }
  std::vector<GramFit> fits;
  fits.reserve(alphas_descending.size());
  const Eigen::VectorXd* warm = nullptr;
  for (double alpha : alphas_descending) {
    EnetConfig cfg;
    cfg.alpha = alpha;
    cfg.l1_ratio = l1_ratio;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    fits.push_back(fit_enet_gram(p, cfg, warm));
    warm = &fits.back().beta;
  }
  return fits;
}

double enet_objective(const GramProblem& p, const Eigen::VectorXd& beta,
                      double alpha, double l1_ratio) {
  const double quad = beta.dot(p.gram * beta);
  const double fit = 0.5 * (p.y_var - 2.0 * beta.dot(p.corr) + quad);
  const double pen = alpha * (l1_ratio * beta.lpNorm<1>() +
                              0.5 * (1.0 - l1_ratio) * beta.squaredNorm());
  return fit + pen;
}

Coefficients fit_enet(const DesignMatrix& D, const Eigen::VectorXd& y,
                      const EnetConfig& cfg) {
  validate_config(cfg);
  if (D.values.rows() != y.size()) {
    throw std::invalid_argument("fit_enet: design and output row counts differ");
  }
  if (D.values.rows() < 2) throw std::invalid_argument("fit_enet: n < 2");

  const int ic = D.intercept_column();
  std::vector<int> cols;
  cols.reserve(D.terms.size());
  for (int j = 0; j < D.cols(); ++j) {
    if (j != ic) cols.push_back(j);
  }

  std::vector<int> rows(static_cast<std::size_t>(D.rows()));
  for (int i = 0; i < D.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  const GramProblem p = GramProblem::build_subset(D.values, y, rows, cols);
  const GramFit g = fit_enet_gram(p, cfg);

  Coefficients out;
  out.beta = Eigen::VectorXd::Zero(D.cols());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.beta(cols[k]) = g.beta(static_cast<int>(k));
  }
  out.intercept = g.intercept;
  out.n_iters = g.n_iters;
  out.converged = g.converged;
  return out;
}

UnscaledModel unscale(const Coefficients& coefs, const ScalingInfo& scaling) {
  if (coefs.beta.size() != scaling.mean.size() ||
      coefs.beta.size() != scaling.std.size()) {
    throw std::invalid_argument("unscale: scaling does not match coefficients");
  }
  UnscaledModel u;
  u.beta = Eigen::VectorXd::Zero(coefs.beta.size());
  double shift = 0.0;
  for (int j = 0; j < coefs.beta.size(); ++j) {
    u.beta(j) = scaling.y_std * coefs.beta(j) / scaling.std(j);
    shift += u.beta(j) * scaling.mean(j);
  }
  u.intercept = scaling.y_mean + scaling.y_std * coefs.intercept - shift;
  return u;
}

}  // namespace lcen
