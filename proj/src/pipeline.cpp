#include "lcen/pipeline.hpp"

#include "lcen/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_sig(double v, int sig_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// grids and pipeline presets

std::vector<double> HyperGrid::default_alphas() {
  std::vector<double> a;
  a.push_back(0.0);
  for (int i = 0; i < 20; ++i) {
    a.push_back(std::pow(10.0, -4.3 + 4.3 * i / 19.0));
  }
  return a;
}

std::vector<double> HyperGrid::default_l1_ratios() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99};
}

HyperGrid HyperGrid::defaults() {
  HyperGrid g;
  g.alphas = default_alphas();
  g.l1_ratios = default_l1_ratios();
  return g;
}

void HyperGrid::validate() const {
  if (alphas.empty() || l1_ratios.empty() || degrees.empty() || lags.empty()) {
    throw std::invalid_argument("hyper grid: empty hyperparameter list");
  }
  for (double a : alphas) {
    if (!(a >= 0.0)) throw std::invalid_argument("hyper grid: alpha < 0");
  }
  for (double r : l1_ratios) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw std::invalid_argument("hyper grid: l1_ratio outside [0, 1]");
    }
  }
  for (int d : degrees) {
    if (d < 1) throw std::invalid_argument("hyper grid: degree < 1");
  }
  for (int l : lags) {
    if (l < 0) throw std::invalid_argument("hyper grid: lag < 0");
  }
  if (!(cutoff >= 0.0)) throw std::invalid_argument("hyper grid: cutoff < 0");
  if (folds < 2) throw std::invalid_argument("hyper grid: folds < 2");
}

PipelineSpec PipelineSpec::lcen() {
  return {Stage::kLasso, true, Stage::kEnet, true, "LCEN"};
}
PipelineSpec PipelineSpec::lc() {
  return {Stage::kLasso, true, Stage::kNone, false, "LC"};
}
PipelineSpec PipelineSpec::enc() {
  return {Stage::kEnet, true, Stage::kNone, false, "ENC"};
}
PipelineSpec PipelineSpec::len() {
  return {Stage::kLasso, false, Stage::kEnet, false, "LEN"};
}
PipelineSpec PipelineSpec::lcl() {
  return {Stage::kLasso, true, Stage::kLasso, true, "LCL"};
}
PipelineSpec PipelineSpec::encen() {
  return {Stage::kEnet, true, Stage::kEnet, true, "ENCEN"};
}

const std::vector<std::string>& PipelineSpec::known_names() {
  static const std::vector<std::string> names = {"LCEN", "LC",  "ENC",
                                                 "LEN",  "LCL", "ENCEN"};
  return names;
}

PipelineSpec PipelineSpec::from_name(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (up == "LCEN") return lcen();
  if (up == "LC") return lc();
  if (up == "ENC") return enc();
  if (up == "LEN") return len();
  if (up == "LCL") return lcl();
  if (up == "ENCEN") return encen();
  throw data_error("unknown pipeline: " + name +
                   " (expected LCEN, LC, ENC, LEN, LCL, or ENCEN)");
}

const CVRecord& CVResult::best() const {
  if (best_index < 0 || best_index >= static_cast<int>(records.size())) {
    throw std::logic_error("cv result has no best record");
  }
  return records[static_cast<std::size_t>(best_index)];
}

// ---------------------------------------------------------------------------
// metrics and folds

Metrics compute_metrics(const Eigen::VectorXd& y_true,
                        const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("metrics: length mismatch");
  }
  if (y_true.size() == 0) throw std::invalid_argument("metrics: empty input");

  Metrics m;
  const int n = static_cast<int>(y_true.size());
  m.mse = (y_pred - y_true).squaredNorm() / n;
  m.rmse = std::sqrt(m.mse);

  double acc = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (y_true(i) != 0.0) {
      acc += std::abs(y_pred(i) - y_true(i)) / std::abs(y_true(i));
      ++count;
    }
  }
  if (count == 0) {
    throw std::invalid_argument(
        "metrics: mean relative error undefined (all y values are zero)");
  }
  m.mean_relative_error = 100.0 * acc / count;
  return m;
}

std::vector<int> kfold_split(int n, int k, bool ordered, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: folds < 2");
  if (n < k) throw std::invalid_argument("kfold: n < folds");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (!ordered) {
    // Hand-rolled Fisher-Yates so the assignment does not depend on the
    // standard library's shuffle implementation.
    std::mt19937_64 rng(seed);
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
    }
  }

  std::vector<int> assignment(static_cast<std::size_t>(n));
  const int base = n / k;
  const int rem = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < rem ? 1 : 0);
    for (int s = 0; s < size; ++s) {
      assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])] = f;
    }
  }
  return assignment;
}

// ---------------------------------------------------------------------------
// cross-validated grid search

namespace {

bool better_record(const CVRecord& a, const CVRecord& b) {
  if (a.failed != b.failed) return !a.failed;
  if (a.mean_mse != b.mean_mse) return a.mean_mse < b.mean_mse;
  if (a.alpha != b.alpha) return a.alpha > b.alpha;
  if (a.degree != b.degree) return a.degree < b.degree;
  if (a.lag != b.lag) return a.lag < b.lag;
  return a.l1_ratio > b.l1_ratio;
}

void validate_cv_options(const CvOptions& o) {
  if (o.alphas.empty() || o.l1_ratios.empty() || o.degrees.empty() ||
      o.lags.empty()) {
    throw std::invalid_argument("cv_search: empty hyperparameter list");
  }
  if (o.folds < 2) throw std::invalid_argument("cv_search: folds < 2");
  if (o.support.has_value() && (o.degrees.size() != 1 || o.lags.size() != 1)) {
    throw std::invalid_argument(
        "cv_search: a support filter requires a single degree and lag");
  }
}

struct FoldPlan {
  std::vector<std::vector<int>> train_rows;
  std::vector<std::vector<int>> val_rows;
};

FoldPlan make_fold_plan(int n, int k, bool ordered, std::uint64_t seed) {
  const std::vector<int> assignment = kfold_split(n, k, ordered, seed);
  FoldPlan plan;
  plan.train_rows.resize(static_cast<std::size_t>(k));
  plan.val_rows.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    const int f = assignment[static_cast<std::size_t>(i)];
    for (int g = 0; g < k; ++g) {
      if (g == f) {
        plan.val_rows[static_cast<std::size_t>(g)].push_back(i);
      } else {
        plan.train_rows[static_cast<std::size_t>(g)].push_back(i);
      }
    }
  }
  return plan;
}

std::vector<int> descent_order(const std::vector<double>& alphas) {
  std::vector<int> order(alphas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return alphas[static_cast<std::size_t>(a)] > alphas[static_cast<std::size_t>(b)];
  });
  return order;
}

std::vector<int> design_cd_columns(const DesignMatrix& dm,
                                   const std::optional<std::vector<int>>& support) {
  const int ic = dm.intercept_column();
  std::vector<int> cols;
  if (support.has_value()) {
    cols = *support;
    std::sort(cols.begin(), cols.end());
    for (int c : cols) {
      if (c < 0 || c >= dm.cols() || c == ic) {
        throw std::invalid_argument("cv_search: invalid support column index");
      }
    }
  } else {
    for (int j = 0; j < dm.cols(); ++j) {
      if (j != ic) cols.push_back(j);
    }
  }
  return cols;
}

}  // namespace

CVResult cv_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const CvOptions& opt) {
  validate_cv_options(opt);
  const int nthreads = resolve_threads(opt.threads);
  const int A = static_cast<int>(opt.alphas.size());
  const int R = static_cast<int>(opt.l1_ratios.size());
  const int D = static_cast<int>(opt.degrees.size());
  const int L = static_cast<int>(opt.lags.size());
  const bool ordered =
      opt.fold_scheme == FoldScheme::kOrdered ||
      (opt.fold_scheme == FoldScheme::kAuto &&
       std::any_of(opt.lags.begin(), opt.lags.end(), [](int l) { return l > 0; }));

  CVResult result;
  result.seed = opt.seed;
  result.records.resize(static_cast<std::size_t>(A) * R * D * L);
  auto record_at = [&](int di, int li, int ri, int ai) -> CVRecord& {
    const std::size_t idx =
        ((static_cast<std::size_t>(di) * L + li) * R + ri) * A + ai;
    return result.records[idx];
  };
  for (int di = 0; di < D; ++di) {
    for (int li = 0; li < L; ++li) {
      for (int ri = 0; ri < R; ++ri) {
        for (int ai = 0; ai < A; ++ai) {
          CVRecord& rec = record_at(di, li, ri, ai);
          rec.alpha = opt.alphas[static_cast<std::size_t>(ai)];
          rec.l1_ratio = opt.l1_ratios[static_cast<std::size_t>(ri)];
          rec.degree = opt.degrees[static_cast<std::size_t>(di)];
          rec.lag = opt.lags[static_cast<std::size_t>(li)];
          rec.mean_mse = kInf;
          rec.failed = true;
        }
      }
    }
  }

  const std::vector<int> alpha_desc = descent_order(opt.alphas);
  std::vector<double> alphas_sorted(alpha_desc.size());
  for (std::size_t p = 0; p < alpha_desc.size(); ++p) {
    alphas_sorted[p] = opt.alphas[static_cast<std::size_t>(alpha_desc[p])];
  }

  std::string first_error;
  for (int di = 0; di < D; ++di) {
    for (int li = 0; li < L; ++li) {
      try {
        ExpansionConfig cfg = opt.expansion;
        cfg.degree = opt.degrees[static_cast<std::size_t>(di)];
        cfg.lag = opt.lags[static_cast<std::size_t>(li)];
        const DesignMatrix dm = expand(X, &y, cfg, nthreads);
        const int n_use = dm.rows();
        const double y_scale = dm.scaling.y_std;
        const Eigen::VectorXd ys =
            (y.tail(n_use).array() - dm.scaling.y_mean) / y_scale;

        const std::vector<int> cols = design_cd_columns(dm, opt.support);
        const FoldPlan folds = make_fold_plan(n_use, opt.folds, ordered, opt.seed);
        const int F = opt.folds;

        std::vector<GramProblem> grams(static_cast<std::size_t>(F));
        std::vector<Eigen::MatrixXd> x_val(static_cast<std::size_t>(F));
        std::vector<Eigen::VectorXd> y_val(static_cast<std::size_t>(F));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads)
#endif
        for (int f = 0; f < F; ++f) {
          grams[static_cast<std::size_t>(f)] = GramProblem::build_subset(
              dm.values, ys, folds.train_rows[static_cast<std::size_t>(f)], cols);
          x_val[static_cast<std::size_t>(f)] =
              dm.values(folds.val_rows[static_cast<std::size_t>(f)], cols);
          y_val[static_cast<std::size_t>(f)] =
              ys(folds.val_rows[static_cast<std::size_t>(f)]);
        }

        // (fold, l1_ratio) work items; each writes its own table slots.
        std::vector<double> fold_mse(static_cast<std::size_t>(F) * R * A, kInf);
        const int items = F * R;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
#endif
        for (int item = 0; item < items; ++item) {
          const int f = item / R;
          const int ri = item % R;
          const GramProblem& gp = grams[static_cast<std::size_t>(f)];
          const std::vector<GramFit> path = fit_enet_path(
              gp, alphas_sorted, opt.l1_ratios[static_cast<std::size_t>(ri)],
              opt.tol, opt.max_iter);
          const Eigen::MatrixXd& Xv = x_val[static_cast<std::size_t>(f)];
          const Eigen::VectorXd& yv = y_val[static_cast<std::size_t>(f)];
          for (std::size_t p = 0; p < path.size(); ++p) {
            const int ai = alpha_desc[p];
            Eigen::VectorXd pred = Xv * path[p].beta;
            pred.array() += path[p].intercept;
            const double mse_std = (pred - yv).squaredNorm() / yv.size();
            fold_mse[(static_cast<std::size_t>(ri) * A + ai) * F + f] =
                mse_std * y_scale * y_scale;
          }
        }

        for (int ri = 0; ri < R; ++ri) {
          for (int ai = 0; ai < A; ++ai) {
            double sum = 0.0;
            for (int f = 0; f < F; ++f) {
              sum += fold_mse[(static_cast<std::size_t>(ri) * A + ai) * F + f];
            }
            CVRecord& rec = record_at(di, li, ri, ai);
            rec.mean_mse = sum / F;
            rec.failed = !std::isfinite(rec.mean_mse);
          }
        }
      } catch (const std::exception& e) {
        if (first_error.empty()) first_error = e.what();
        // records for this (degree, lag) stay failed
      }
    }
  }

  int best = -1;
  for (int i = 0; i < static_cast<int>(result.records.size()); ++i) {
    if (best < 0 || better_record(result.records[static_cast<std::size_t>(i)],
                                  result.records[static_cast<std::size_t>(best)])) {
      best = i;
    }
  }
  if (best < 0 || result.records[static_cast<std::size_t>(best)].failed) {
    throw numerical_error("cv_search: all hyperparameter combinations failed" +
                          (first_error.empty() ? std::string()
                                               : " (first error: " + first_error + ")"));
  }
  result.best_index = best;
  return result;
}

CVResult cv_search_reference(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const CvOptions& opt) {
  validate_cv_options(opt);
  const int A = static_cast<int>(opt.alphas.size());
  const int R = static_cast<int>(opt.l1_ratios.size());
  const bool ordered =
      opt.fold_scheme == FoldScheme::kOrdered ||
      (opt.fold_scheme == FoldScheme::kAuto &&
       std::any_of(opt.lags.begin(), opt.lags.end(), [](int l) { return l > 0; }));

  CVResult result;
  result.seed = opt.seed;
  std::string first_error;

  for (int degree : opt.degrees) {
    for (int lag : opt.lags) {
      std::vector<CVRecord> block(static_cast<std::size_t>(R) * A);
      for (int ri = 0; ri < R; ++ri) {
        for (int ai = 0; ai < A; ++ai) {
          CVRecord& rec = block[static_cast<std::size_t>(ri) * A + ai];
          rec.alpha = opt.alphas[static_cast<std::size_t>(ai)];
          rec.l1_ratio = opt.l1_ratios[static_cast<std::size_t>(ri)];
          rec.degree = degree;
          rec.lag = lag;
          rec.mean_mse = kInf;
          rec.failed = true;
        }
      }
      try {
        ExpansionConfig cfg = opt.expansion;
        cfg.degree = degree;
        cfg.lag = lag;
        const DesignMatrix dm = expand_reference(X, &y, cfg);
        const int n_use = dm.rows();
        const double y_scale = dm.scaling.y_std;
        const Eigen::VectorXd ys =
            (y.tail(n_use).array() - dm.scaling.y_mean) / y_scale;
        const std::vector<int> cols = design_cd_columns(dm, opt.support);
        const int ic = dm.intercept_column();
        const FoldPlan folds = make_fold_plan(n_use, opt.folds, ordered, opt.seed);

        std::vector<int> keep;
        keep.push_back(ic);
        keep.insert(keep.end(), cols.begin(), cols.end());
        std::sort(keep.begin(), keep.end());

        for (int ri = 0; ri < R; ++ri) {
          for (int ai = 0; ai < A; ++ai) {
            double sum = 0.0;
            for (int f = 0; f < opt.folds; ++f) {
              const auto& tr = folds.train_rows[static_cast<std::size_t>(f)];
              const auto& va = folds.val_rows[static_cast<std::size_t>(f)];
              DesignMatrix sub;
              sub.values = dm.values(tr, keep);
              for (int c : keep) sub.terms.push_back(dm.terms[static_cast<std::size_t>(c)]);
              sub.scaling.mean = dm.scaling.mean(keep);
              sub.scaling.std = dm.scaling.std(keep);
              sub.scaling.y_mean = dm.scaling.y_mean;
              sub.scaling.y_std = dm.scaling.y_std;
              EnetConfig ecfg;
              ecfg.alpha = opt.alphas[static_cast<std::size_t>(ai)];
              ecfg.l1_ratio = opt.l1_ratios[static_cast<std::size_t>(ri)];
              ecfg.tol = opt.tol;
              ecfg.max_iter = opt.max_iter;
              const Coefficients fit = fit_enet(sub, ys(tr), ecfg);
              const Eigen::MatrixXd Xv = dm.values(va, keep);
              Eigen::VectorXd pred = Xv * fit.beta;
              pred.array() += fit.intercept;
              const Eigen::VectorXd yva = ys(va);
              const double mse_std =
                  (pred - yva).squaredNorm() / static_cast<double>(va.size());
              sum += mse_std * y_scale * y_scale;
            }
            CVRecord& rec = block[static_cast<std::size_t>(ri) * A + ai];
            rec.mean_mse = sum / opt.folds;
            rec.failed = !std::isfinite(rec.mean_mse);
          }
        }
      } catch (const std::exception& e) {
        if (first_error.empty()) first_error = e.what();
      }
      result.records.insert(result.records.end(), block.begin(), block.end());
    }
  }

  int best = -1;
  for (int i = 0; i < static_cast<int>(result.records.size()); ++i) {
    if (best < 0 || better_record(result.records[static_cast<std::size_t>(i)],
                                  result.records[static_cast<std::size_t>(best)])) {
      best = i;
    }
  }
  if (best < 0 || result.records[static_cast<std::size_t>(best)].failed) {
    throw numerical_error("cv_search: all hyperparameter combinations failed" +
                          (first_error.empty() ? std::string()
                                               : " (first error: " + first_error + ")"));
  }
  result.best_index = best;
  return result;
}

// ---------------------------------------------------------------------------
// clip and pipeline assembly

Coefficients clip(Coefficients coefs, double cutoff) {
  if (!(cutoff >= 0.0)) throw std::invalid_argument("clip: cutoff < 0");
  for (int j = 0; j < coefs.beta.size(); ++j) {
    if (std::abs(coefs.beta(j)) < cutoff) coefs.beta(j) = 0.0;
  }
  return coefs;
}

namespace {

ExpansionConfig expansion_config_from(const FitOptions& o, int degree, int lag) {
  ExpansionConfig c;
  c.degree = degree;
  c.lag = lag;
  c.families = o.families;
  c.domain_guard = o.domain_guard;
  c.cross_lag_interactions = o.cross_lag_interactions;
  c.max_degree_guardrail = o.max_degree_guardrail;
  return c;
}

struct DesignView {
  const std::vector<FeatureTerm>* terms;
  const ScalingInfo* scaling;
};

DesignMatrix slice_design(const DesignMatrix& dm, const std::vector<int>& support) {
  const int ic = dm.intercept_column();
  std::vector<int> keep;
  keep.push_back(ic);
  keep.insert(keep.end(), support.begin(), support.end());
  std::sort(keep.begin(), keep.end());

  DesignMatrix out;
  out.values = dm.values(Eigen::all, keep);
  out.terms.reserve(keep.size());
  for (int c : keep) out.terms.push_back(dm.terms[static_cast<std::size_t>(c)]);
  out.scaling.mean = dm.scaling.mean(keep);
  out.scaling.std = dm.scaling.std(keep);
  out.scaling.y_mean = dm.scaling.y_mean;
  out.scaling.y_std = dm.scaling.y_std;
  out.scaling.dropped_constant_columns = dm.scaling.dropped_constant_columns;
  return out;
}

/// Keep the intercept plus every nonzero coefficient; unscale; fill the
/// model's term-aligned arrays and train metrics.
void finalize_model(FittedModel& model, const DesignView& view,
                    const Coefficients& coefs, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y) {
  const auto& terms = *view.terms;
  const auto& scaling = *view.scaling;

  int ic = -1;
  std::vector<int> kept;
  for (int j = 0; j < static_cast<int>(terms.size()); ++j) {
    if (terms[static_cast<std::size_t>(j)].is_intercept()) {
      ic = j;
    } else if (coefs.beta(j) != 0.0) {
      kept.push_back(j);
    }
  }
  if (ic < 0) throw std::logic_error("finalize: design has no intercept term");

  const UnscaledModel un = unscale(coefs, scaling);

  const int out_n = static_cast<int>(kept.size()) + 1;
  model.terms.clear();
  model.terms.reserve(static_cast<std::size_t>(out_n));
  model.scaled_beta.resize(out_n);
  model.unscaled_beta.resize(out_n);
  model.scaling.mean.resize(out_n);
  model.scaling.std.resize(out_n);

  model.terms.push_back(terms[static_cast<std::size_t>(ic)]);
  model.scaled_beta(0) = coefs.intercept;
  model.unscaled_beta(0) = un.intercept;
  model.scaling.mean(0) = 0.0;
  model.scaling.std(0) = 1.0;
  for (int k = 0; k < static_cast<int>(kept.size()); ++k) {
    const int j = kept[static_cast<std::size_t>(k)];
    model.terms.push_back(terms[static_cast<std::size_t>(j)]);
    model.scaled_beta(k + 1) = coefs.beta(j);
    model.unscaled_beta(k + 1) = un.beta(j);
    model.scaling.mean(k + 1) = scaling.mean(j);
    model.scaling.std(k + 1) = scaling.std(j);
  }
  model.scaling.y_mean = scaling.y_mean;
  model.scaling.y_std = scaling.y_std;
  model.scaling.dropped_constant_columns = scaling.dropped_constant_columns;
  model.intercept = un.intercept;
  model.n_features_selected = static_cast<int>(kept.size());
  if (kept.empty()) model.degenerate = true;

  const Eigen::VectorXd preds = predict(model, X, &y);
  model.train_metrics = compute_metrics(y.tail(preds.size()), preds);
}

}  // namespace

FittedModel fit_pipeline(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const HyperGrid& grid, const PipelineSpec& spec,
                         const FitOptions& opt) {
  grid.validate();
  if (X.rows() != y.size()) {
    throw std::invalid_argument("fit_pipeline: X and y row counts differ");
  }
  const int nthreads = resolve_threads(opt.threads);

  FittedModel model;
  model.seed = opt.seed;
  model.feature_names = opt.feature_names;
  model.target_name = opt.target_name.empty() ? "y" : opt.target_name;
  model.domain_guard = opt.domain_guard;
  model.families = opt.families;
  model.cross_lag_interactions = opt.cross_lag_interactions;
  model.fold_scheme = opt.fold_scheme;

  // Stage 1: CV over (alpha, degree, lag); a LASSO first stage pins
  // l1_ratio to 1 for the search.
  CvOptions cv1;
  cv1.alphas = grid.alphas;
  cv1.l1_ratios = spec.first_stage == Stage::kLasso ? std::vector<double>{1.0}
                                                    : grid.l1_ratios;
  cv1.degrees = grid.degrees;
  cv1.lags = grid.lags;
  cv1.folds = grid.folds;
  cv1.seed = opt.seed;
  cv1.fold_scheme = opt.fold_scheme;
  cv1.expansion = expansion_config_from(opt, grid.degrees.front(), grid.lags.front());
  cv1.tol = opt.tol;
  cv1.max_iter = opt.max_iter;
  cv1.threads = nthreads;
  model.stage1_cv = cv_search(X, y, cv1);
  const CVRecord best1 = model.stage1_cv.best();

  model.hyperparameters.alpha = best1.alpha;
  model.hyperparameters.l1_ratio = best1.l1_ratio;
  model.hyperparameters.degree = best1.degree;
  model.hyperparameters.lag = best1.lag;
  model.hyperparameters.cutoff = grid.cutoff;
  model.hyperparameters.folds = grid.folds;
  model.hyperparameters.pipeline = spec.name;

  const ExpansionConfig cfg = expansion_config_from(opt, best1.degree, best1.lag);
  const DesignMatrix dm = expand(X, &y, cfg, nthreads);
  const Eigen::VectorXd ys =
      (y.tail(dm.rows()).array() - dm.scaling.y_mean) / dm.scaling.y_std;

  EnetConfig ecfg1;
  ecfg1.alpha = best1.alpha;
  ecfg1.l1_ratio = best1.l1_ratio;
  ecfg1.tol = opt.tol;
  ecfg1.max_iter = opt.max_iter;
  const Coefficients beta1 = fit_enet(dm, ys, ecfg1);

  // Clip step: features with |scaled beta| >= cutoff survive. A cutoff of 0
  // keeps every column, which is what makes LCEN(cutoff=0) coincide with LEN.
  const double cut1 = spec.clip_after_first ? grid.cutoff : 0.0;
  const int ic = dm.intercept_column();
  std::vector<int> support;
  for (int j = 0; j < dm.cols(); ++j) {
    if (j != ic && std::abs(beta1.beta(j)) >= cut1) support.push_back(j);
  }

  const DesignView full_view{&dm.terms, &dm.scaling};
  if (spec.second_stage == Stage::kNone) {
    finalize_model(model, full_view, clip(beta1, cut1), X, y);
    return model;
  }

  if (support.empty()) {
    Coefficients intercept_only;
    intercept_only.beta = Eigen::VectorXd::Zero(dm.cols());
    intercept_only.intercept = ys.mean();
    model.degenerate = true;
    finalize_model(model, full_view, intercept_only, X, y);
    return model;
  }

  // Stage 2: CV over (alpha, l1_ratio) at the recorded degree and lag,
  // restricted to the clip survivors.
  CvOptions cv2 = cv1;
  cv2.l1_ratios = spec.second_stage == Stage::kLasso ? std::vector<double>{1.0}
                                                     : grid.l1_ratios;
  cv2.degrees = {best1.degree};
  cv2.lags = {best1.lag};
  cv2.support = support;
  model.stage2_cv = cv_search(X, y, cv2);
  const CVRecord best2 = model.stage2_cv->best();
  model.hyperparameters.alpha = best2.alpha;
  model.hyperparameters.l1_ratio = best2.l1_ratio;

  const DesignMatrix reduced = slice_design(dm, support);
  EnetConfig ecfg2;
  ecfg2.alpha = best2.alpha;
  ecfg2.l1_ratio = best2.l1_ratio;
  ecfg2.tol = opt.tol;
  ecfg2.max_iter = opt.max_iter;
  const Coefficients beta2 = fit_enet(reduced, ys, ecfg2);

  const double cut2 = spec.clip_after_second ? grid.cutoff : 0.0;
  const DesignView reduced_view{&reduced.terms, &reduced.scaling};
  finalize_model(model, reduced_view, clip(beta2, cut2), X, y);
  return model;
}

std::vector<FittedModel> sparsify(const FittedModel& model,
                                  const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  const std::vector<double>& cutoffs,
                                  const FitOptions& options) {
  if (cutoffs.empty()) throw std::invalid_argument("sparsify: no cutoffs");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] < model.hyperparameters.cutoff) {
      throw std::invalid_argument("sparsify: cutoff below the model's own");
    }
    if (i > 0 && cutoffs[i] < cutoffs[i - 1]) {
      throw std::invalid_argument("sparsify: cutoffs must be ascending");
    }
  }
  const PipelineSpec spec = PipelineSpec::from_name(model.hyperparameters.pipeline);
  const int nthreads = resolve_threads(options.threads);

  FitOptions opt = options;
  opt.seed = model.seed;
  opt.fold_scheme = model.fold_scheme;
  opt.families = model.families;
  opt.domain_guard = model.domain_guard;
  opt.cross_lag_interactions = model.cross_lag_interactions;
  opt.feature_names = model.feature_names;
  opt.target_name = model.target_name;

  // One expansion serves every cutoff; the model's degree/lag are fixed.
  const ExpansionConfig cfg = expansion_config_from(
      opt, model.hyperparameters.degree, model.hyperparameters.lag);
  const DesignMatrix dm = expand(X, &y, cfg, nthreads);
  const Eigen::VectorXd ys =
      (y.tail(dm.rows()).array() - dm.scaling.y_mean) / dm.scaling.y_std;
  const DesignView full_view{&dm.terms, &dm.scaling};

  auto column_of_term = [&](const FeatureTerm& t) {
    for (int j = 0; j < dm.cols(); ++j) {
      if (dm.terms[static_cast<std::size_t>(j)] == t) return j;
    }
    throw std::logic_error("sparsify: model term missing from expansion");
  };

  // Recover the stage-2 search lists from the model's CV provenance.
  std::vector<double> alphas;
  std::vector<double> ratios;
  const CVResult& stage = model.stage2_cv.has_value() ? *model.stage2_cv
                                                      : model.stage1_cv;
  for (const CVRecord& r : stage.records) {
    if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) {
      alphas.push_back(r.alpha);
    }
    if (std::find(ratios.begin(), ratios.end(), r.l1_ratio) == ratios.end()) {
      ratios.push_back(r.l1_ratio);
    }
  }

  std::vector<FittedModel> out;
  const FittedModel* prev = &model;
  for (double c : cutoffs) {
    std::vector<int> surviving_cols;
    bool all_survive = true;
    for (int t = 0; t < static_cast<int>(prev->terms.size()); ++t) {
      if (prev->terms[static_cast<std::size_t>(t)].is_intercept()) continue;
      if (std::abs(prev->scaled_beta(t)) >= c) {
        surviving_cols.push_back(column_of_term(prev->terms[static_cast<std::size_t>(t)]));
      } else {
        all_survive = false;
      }
    }

    FittedModel next = *prev;
    next.hyperparameters.cutoff = c;
    if (all_survive) {
      // Nothing newly clipped: the refit would reproduce the same model.
      out.push_back(std::move(next));
      prev = &out.back();
      continue;
    }

    if (surviving_cols.empty() || spec.second_stage == Stage::kNone) {
      // Clip in standardized units, then re-derive the unscaled model.
      Coefficients coefs;
      coefs.beta = Eigen::VectorXd::Zero(dm.cols());
      coefs.intercept = prev->scaled_beta(0);
      for (int t = 0; t < static_cast<int>(prev->terms.size()); ++t) {
        const FeatureTerm& term = prev->terms[static_cast<std::size_t>(t)];
        if (term.is_intercept()) continue;
        if (std::abs(prev->scaled_beta(t)) >= c) {
          coefs.beta(column_of_term(term)) = prev->scaled_beta(t);
        }
      }
      next.degenerate = surviving_cols.empty();
      finalize_model(next, full_view, coefs, X, y);
      out.push_back(std::move(next));
      prev = &out.back();
      continue;
    }

    CvOptions cv2;
    cv2.alphas = alphas;
    cv2.l1_ratios = ratios;
    cv2.degrees = {model.hyperparameters.degree};
    cv2.lags = {model.hyperparameters.lag};
    cv2.folds = model.hyperparameters.folds;
    cv2.seed = model.seed;
    cv2.fold_scheme = model.fold_scheme;
    cv2.expansion = cfg;
    cv2.support = surviving_cols;
    cv2.tol = opt.tol;
    cv2.max_iter = opt.max_iter;
    cv2.threads = nthreads;
    next.stage2_cv = cv_search(X, y, cv2);
    const CVRecord best = next.stage2_cv->best();
    next.hyperparameters.alpha = best.alpha;
    next.hyperparameters.l1_ratio = best.l1_ratio;

    const DesignMatrix reduced = slice_design(dm, surviving_cols);
    EnetConfig ecfg;
    ecfg.alpha = best.alpha;
    ecfg.l1_ratio = best.l1_ratio;
    ecfg.tol = opt.tol;
    ecfg.max_iter = opt.max_iter;
    const Coefficients beta = fit_enet(reduced, ys, ecfg);
    const DesignView reduced_view{&reduced.terms, &reduced.scaling};
    next.degenerate = false;
    finalize_model(next, reduced_view, clip(beta, c), X, y);
    out.push_back(std::move(next));
    prev = &out.back();
  }
  return out;
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd* y) {
  const int lag = model.hyperparameters.lag;
  const int n = static_cast<int>(X.rows());
  if (lag > 0) {
    if (y == nullptr) {
      throw std::invalid_argument("predict: lagged model requires the output history");
    }
    if (y->size() != n) throw std::invalid_argument("predict: X and y row counts differ");
    if (n <= lag) throw std::invalid_argument("predict: not enough rows for the model lag");
  }

  int max_var = -1;
  for (const FeatureTerm& t : model.terms) {
    for (const Factor& f : t.factors) max_var = std::max(max_var, f.variable);
  }
  if (max_var >= X.cols()) {
    throw std::invalid_argument("predict: model references feature index " +
                                std::to_string(max_var) + " but data has " +
                                std::to_string(X.cols()) + " columns");
  }

  const int n_out = n - lag;
  Eigen::VectorXd out(n_out);
  Eigen::VectorXd row;
  for (int i = 0; i < n_out; ++i) {
    const int r = lag + i;
    row = X.row(r);
    auto lagged = [&](int variable, int l) {
      return variable == kOutputVariable ? (*y)(r - l) : X(r - l, variable);
    };
    double acc = 0.0;
    for (std::size_t t = 0; t < model.terms.size(); ++t) {
      const double v = model.terms[t].eval(row, lagged);
      if (model.domain_guard == DomainGuard::kStrict && !std::isfinite(v)) {
        throw numerical_error("predict: non-finite value for term " +
                              model.terms[t].display(model.feature_names,
                                                     model.target_name));
      }
      acc += model.unscaled_beta(static_cast<int>(t)) * v;
    }
    out(i) = acc;
  }
  return out;
}

Eigen::VectorXd forecast(const FittedModel& model, const History& history,
                         int horizon, const Eigen::MatrixXd* future_X) {
  const int lag = model.hyperparameters.lag;
  if (lag <= 0) throw std::invalid_argument("forecast: model has no lag");
  if (horizon < 1) throw std::invalid_argument("forecast: horizon < 1");
  if (history.depth() < lag) {
    throw std::invalid_argument("forecast: history depth is smaller than the model lag");
  }

  bool uses_inputs = false;
  for (const FeatureTerm& t : model.terms) uses_inputs |= t.uses_inputs();
  if (uses_inputs) {
    if (future_X == nullptr || future_X->rows() < horizon) {
      throw std::invalid_argument(
          "forecast: model uses input features; future_X must supply one row per step");
    }
    if (history.X.rows() != history.y.size()) {
      throw std::invalid_argument("forecast: history X/y depth mismatch");
    }
  }

  const int depth = history.depth();
  const int m = uses_inputs ? static_cast<int>(future_X->cols()) : 0;
  Eigen::MatrixXd x_ext;
  if (uses_inputs) {
    x_ext.resize(depth + horizon, m);
    x_ext.topRows(depth) = history.X;
    x_ext.bottomRows(horizon) = *future_X;
  }
  Eigen::VectorXd y_ext(depth + horizon);
  y_ext.head(depth) = history.y;

  Eigen::VectorXd out(horizon);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(m);
  for (int s = 0; s < horizon; ++s) {
    const int r = depth + s;
    if (uses_inputs) row = x_ext.row(r);
    auto lagged = [&](int variable, int l) {
      return variable == kOutputVariable ? y_ext(r - l) : x_ext(r - l, variable);
    };
    double acc = 0.0;
    for (std::size_t t = 0; t < model.terms.size(); ++t) {
      const double v = model.terms[t].eval(row, lagged);
      if (model.domain_guard == DomainGuard::kStrict && !std::isfinite(v)) {
        throw numerical_error("forecast: non-finite value for term " +
                              model.terms[t].display(model.feature_names,
                                                     model.target_name));
      }
      acc += model.unscaled_beta(static_cast<int>(t)) * v;
    }
    out(s) = acc;
    y_ext(r) = acc;
  }
  return out;
}

Eigen::VectorXd vif(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(X.cols());
  if (m < 2) throw std::invalid_argument("vif: fewer than 2 columns");
  if (n <= m) throw std::invalid_argument("vif: requires more rows than columns");

  Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  Eigen::VectorXd out(m);
  Eigen::MatrixXd others(n, m - 1);
  for (int j = 0; j < m; ++j) {
    const double sst = Xc.col(j).squaredNorm();
    if (sst == 0.0) {
      out(j) = kInf;
      continue;
    }
    int c = 0;
    for (int k = 0; k < m; ++k) {
      if (k != j) others.col(c++) = Xc.col(k);
    }
    const Eigen::VectorXd beta = others.colPivHouseholderQr().solve(Xc.col(j));
    const double ssr = (Xc.col(j) - others * beta).squaredNorm();
    const double r2 = 1.0 - ssr / sst;
    out(j) = r2 >= 1.0 - 1e-12 ? kInf : 1.0 / (1.0 - r2);
  }
  return out;
}

std::string FittedModel::equation(int sig_digits) const {
  std::string out = target_name + " = ";
  bool first = true;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (terms[t].is_intercept()) continue;
    const double c = unscaled_beta(static_cast<int>(t));
    const std::string mag = format_sig(std::abs(c), sig_digits);
    if (first) {
      out += (c < 0 ? "-" : "") + mag;
      first = false;
    } else {
      out += (c < 0 ? " - " : " + ") + mag;
    }
    out += "*" + terms[t].display(feature_names, target_name);
  }
  if (first) {
    out += format_sig(intercept, sig_digits);
  } else if (intercept != 0.0) {
    out += (intercept < 0 ? " - " : " + ") + format_sig(std::abs(intercept), sig_digits);
  }
  return out;
}

}  // namespace lcen
