#include "lcen/expansion.hpp"

#include "lcen/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcen {

namespace {

// Deterministic integer power (exponentiation by squaring).
double ipow(double x, int e) {
  double r = 1.0;
  double base = x;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

std::string var_label(int variable, int lag,
                      const std::vector<std::string>& names,
                      const std::string& target_name) {
  std::string base;
  if (variable == kOutputVariable) {
    base = target_name;
  } else if (variable >= 0 && variable < static_cast<int>(names.size()) &&
             !names[variable].empty()) {
    base = names[variable];
  } else {
    base = "X" + std::to_string(variable);
  }
  if (lag > 0) base += "[t-" + std::to_string(lag) + "]";
  return base;
}

std::string factor_display(const Factor& f, const std::vector<std::string>& names,
                           const std::string& target_name) {
  const std::string v = var_label(f.variable, f.lag, names, target_name);
  switch (f.transform) {
    case Transform::kPower:
      return f.b == 1 ? v : v + "^" + std::to_string(f.b);
    case Transform::kLogPower:
      return f.a == 1 ? "ln(" + v + ")"
                      : "ln(" + v + ")^" + std::to_string(f.a);
    case Transform::kHalfPower:
      return v + "^" + std::to_string(f.b - 1) + ".5";
    case Transform::kInversePower:
      return f.b == 1 ? "1/" + v : "1/" + v + "^" + std::to_string(f.b);
    case Transform::kLogOverPower: {
      std::string num = f.a == 1 ? "ln(" + v + ")"
                                 : "ln(" + v + ")^" + std::to_string(f.a);
      std::string den = f.b == 1 ? v : v + "^" + std::to_string(f.b);
      return num + "/" + den;
    }
  }
  return "?";
}

}  // namespace

const char* transform_name(Transform t) {
  switch (t) {
    case Transform::kPower: return "power";
    case Transform::kLogPower: return "log_power";
    case Transform::kHalfPower: return "half_power";
    case Transform::kInversePower: return "inverse_power";
    case Transform::kLogOverPower: return "log_over_power";
  }
  return "?";
}

Transform transform_from_name(const std::string& name) {
  if (name == "power") return Transform::kPower;
  if (name == "log_power") return Transform::kLogPower;
  if (name == "half_power") return Transform::kHalfPower;
  if (name == "inverse_power") return Transform::kInversePower;
  if (name == "log_over_power") return Transform::kLogOverPower;
  throw data_error("unknown transform name: " + name);
}

int Factor::degree() const {
  switch (transform) {
    case Transform::kPower: return b;
    case Transform::kLogPower: return a;
    case Transform::kHalfPower: return b;
    case Transform::kInversePower: return b;
    case Transform::kLogOverPower: return a + b;
  }
  return 0;
}

double Factor::eval(double x) const {
  switch (transform) {
    case Transform::kPower:
      return ipow(x, b);
    case Transform::kLogPower:
      return ipow(std::log(x), a);
    case Transform::kHalfPower:
      return b == 1 ? std::sqrt(x) : ipow(x, b - 1) * std::sqrt(x);
    case Transform::kInversePower:
      return 1.0 / ipow(x, b);
    case Transform::kLogOverPower:
      return ipow(std::log(x), a) / ipow(x, b);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

int FeatureTerm::degree() const {
  int d = 0;
  for (const Factor& f : factors) d += f.degree();
  return d;
}

int FeatureTerm::max_lag() const {
  int l = 0;
  for (const Factor& f : factors) l = std::max(l, f.lag);
  return l;
}

bool FeatureTerm::uses_inputs() const {
  return std::any_of(factors.begin(), factors.end(), [](const Factor& f) {
    return f.variable != kOutputVariable;
  });
}

std::string FeatureTerm::display(const std::vector<std::string>& names,
                                 const std::string& target_name) const {
  if (factors.empty()) return "1";
  std::string out = factor_display(factors.front(), names, target_name);
  for (std::size_t i = 1; i < factors.size(); ++i) {
    out += "*";
    out += factor_display(factors[i], names, target_name);
  }
  return out;
}

int term_degree(const FeatureTerm& term) { return term.degree(); }

int DesignMatrix::intercept_column() const {
  for (int j = 0; j < cols(); ++j) {
    if (terms[j].is_intercept()) return j;
  }
  return -1;
}

namespace detail {

std::vector<VariableRef> variable_universe(int n_features, int lag) {
  if (lag < 0) throw std::invalid_argument("expansion lag < 0");
  if (n_features < 0) throw std::invalid_argument("negative feature count");
  std::vector<VariableRef> u;
  u.reserve(static_cast<std::size_t>(n_features) * (lag + 1) + lag);
  for (int k = 0; k < n_features; ++k) {
    for (int l = 0; l <= lag; ++l) u.push_back({k, l});
  }
  for (int l = 1; l <= lag; ++l) u.push_back({kOutputVariable, l});
  return u;
}

void column_stats(const double* data, int n, double& mean, double& sd) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += data[i];
  mean = s / n;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = data[i] - mean;
    ss += d * d;
  }
  sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

bool is_constant_column(double mean, double sd) {
  // NaN stats (non-finite columns) also land here and get dropped.
  return !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
}

std::vector<FeatureTerm> enumerate_terms_masked(
    int n_features, const ExpansionConfig& config,
    const std::vector<TransformFamilies>& masks) {
  if (config.degree < 1) throw std::invalid_argument("expansion degree < 1");
  if (config.degree > config.max_degree_guardrail) {
    throw std::invalid_argument("expansion degree exceeds guardrail (" +
                                std::to_string(config.max_degree_guardrail) +
                                ")");
  }
  if (config.lag < 0) throw std::invalid_argument("expansion lag < 0");
  if (n_features < 0) throw std::invalid_argument("negative feature count");

  const std::vector<VariableRef> universe =
      variable_universe(n_features, config.lag);
  if (universe.empty()) {
    throw std::invalid_argument("empty variable universe (no inputs, lag 0)");
  }
  if (masks.size() != universe.size()) {
    throw std::invalid_argument("family mask does not match universe");
  }

  // Lagged variables join only the degree-1 families unless cross-lag
  // expansion is requested.
  auto eligible = [&](int ui, int d) {
    return d == 1 || config.cross_lag_interactions || universe[ui].lag == 0;
  };

  std::vector<FeatureTerm> terms;
  terms.push_back(FeatureTerm{});  // intercept

  for (int d = 1; d <= config.degree; ++d) {
    if (config.families.power) {
      std::vector<int> pool;
      for (int ui = 0; ui < static_cast<int>(universe.size()); ++ui) {
        if (eligible(ui, d) && masks[ui].power) pool.push_back(ui);
      }
      if (!pool.empty()) {
        // Multisets of size d over the pool, lexicographic.
        std::vector<int> sel(d, 0);
        const int last = static_cast<int>(pool.size()) - 1;
        while (true) {
          FeatureTerm t;
          for (std::size_t i = 0; i < sel.size();) {
            std::size_t j = i;
            while (j < sel.size() && sel[j] == sel[i]) ++j;
            const VariableRef& v = universe[pool[sel[i]]];
            t.factors.push_back(
                {v.variable, v.lag, Transform::kPower, 0, static_cast<int>(j - i)});
            i = j;
          }
          terms.push_back(std::move(t));
          int pos = d - 1;
          while (pos >= 0 && sel[pos] == last) --pos;
          if (pos < 0) break;
          const int next = sel[pos] + 1;
          for (int q = pos; q < d; ++q) sel[q] = next;
        }
      }
    }
    for (int ui = 0; ui < static_cast<int>(universe.size()); ++ui) {
      if (!eligible(ui, d) || !masks[ui].log) continue;
      const VariableRef& v = universe[ui];
      terms.push_back({{{v.variable, v.lag, Transform::kLogPower, d, 0}}});
    }
    for (int ui = 0; ui < static_cast<int>(universe.size()); ++ui) {
      if (!eligible(ui, d) || !masks[ui].half_power) continue;
      const VariableRef& v = universe[ui];
      terms.push_back({{{v.variable, v.lag, Transform::kHalfPower, 0, d}}});
    }
    for (int ui = 0; ui < static_cast<int>(universe.size()); ++ui) {
      if (!eligible(ui, d) || !masks[ui].inverse) continue;
      const VariableRef& v = universe[ui];
      terms.push_back({{{v.variable, v.lag, Transform::kInversePower, 0, d}}});
    }
    if (d >= 2) {
      for (int ui = 0; ui < static_cast<int>(universe.size()); ++ui) {
        if (!eligible(ui, d) || !masks[ui].log_over_power) continue;
        const VariableRef& v = universe[ui];
        for (int a = d - 1; a >= 1; --a) {
          terms.push_back(
              {{{v.variable, v.lag, Transform::kLogOverPower, a, d - a}}});
        }
      }
    }
  }
  return terms;
}

}  // namespace detail

std::vector<FeatureTerm> enumerate_terms(int n_features,
                                         const ExpansionConfig& config) {
  const auto universe = detail::variable_universe(n_features, config.lag);
  std::vector<TransformFamilies> masks(universe.size(), config.families);
  return detail::enumerate_terms_masked(n_features, config, masks);
}

namespace {

struct ExpansionPlan {
  std::vector<FeatureTerm> terms;
  int n_rows = 0;  // usable rows after lagging
  int lag = 0;
};

ExpansionPlan prepare_expansion(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd* y,
                                const ExpansionConfig& config) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(X.cols());
  if (config.lag > 0 && y == nullptr) {
    throw std::invalid_argument("expand: output series required when lag > 0");
  }
  if (y != nullptr && y->size() != n) {
    throw std::invalid_argument("expand: X and y row counts differ");
  }
  if (config.lag >= n) {
    throw std::invalid_argument("expand: lag must be smaller than n_samples");
  }
  if (n - config.lag < 2) {
    throw std::invalid_argument("expand: fewer than 2 usable rows after lagging");
  }
  if (!X.allFinite()) throw data_error("expand: non-finite value in inputs");
  if (y != nullptr && !y->allFinite()) {
    throw data_error("expand: non-finite value in output series");
  }

  const auto universe = detail::variable_universe(m, config.lag);
  std::vector<TransformFamilies> masks(universe.size(), config.families);
  if (config.domain_guard == DomainGuard::kAuto) {
    // Positivity is judged per variable over its full column; every lag of
    // a non-positive variable loses the positive-only families.
    std::vector<bool> var_positive(static_cast<std::size_t>(m), true);
    for (int k = 0; k < m; ++k) var_positive[k] = X.col(k).minCoeff() > 0.0;
    const bool y_positive = (y == nullptr) || (y->minCoeff() > 0.0);
    for (std::size_t ui = 0; ui < universe.size(); ++ui) {
      const bool pos = universe[ui].variable == kOutputVariable
                           ? y_positive
                           : var_positive[universe[ui].variable];
      if (!pos) {
        masks[ui].log = false;
        masks[ui].half_power = false;
        masks[ui].inverse = false;
        masks[ui].log_over_power = false;
      }
    }
  }

  ExpansionPlan plan;
  plan.terms = detail::enumerate_terms_masked(m, config, masks);
  plan.n_rows = n - config.lag;
  plan.lag = config.lag;
  return plan;
}

double eval_term_cell(const FeatureTerm& term, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd* y, int abs_row) {
  double acc = 1.0;
  for (const Factor& f : term.factors) {
    const double x = f.variable == kOutputVariable
                         ? (*y)(abs_row - f.lag)
                         : X(abs_row - f.lag, f.variable);
    acc *= f.eval(x);
  }
  return acc;
}

DesignMatrix assemble(const ExpansionPlan& plan, Eigen::MatrixXd& raw,
                      const std::vector<double>& means,
                      const std::vector<double>& sds,
                      const Eigen::VectorXd* y_trimmed) {
  const int total = static_cast<int>(plan.terms.size());
  const int n = plan.n_rows;

  std::vector<int> keep;
  std::vector<int> dropped;
  keep.reserve(total);
  for (int j = 0; j < total; ++j) {
    if (plan.terms[j].is_intercept()) {
      keep.push_back(j);
    } else if (detail::is_constant_column(means[j], sds[j])) {
      dropped.push_back(j);
    } else {
      keep.push_back(j);
    }
  }

  DesignMatrix dm;
  dm.scaling.dropped_constant_columns = std::move(dropped);
  dm.terms.reserve(keep.size());
  dm.scaling.mean.resize(static_cast<int>(keep.size()));
  dm.scaling.std.resize(static_cast<int>(keep.size()));
  dm.values.resize(n, static_cast<int>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const int j = keep[c];
    const int cc = static_cast<int>(c);
    dm.terms.push_back(plan.terms[j]);
    if (plan.terms[j].is_intercept()) {
      dm.scaling.mean(cc) = 0.0;
      dm.scaling.std(cc) = 1.0;
      dm.values.col(cc).setOnes();
    } else {
      dm.scaling.mean(cc) = means[j];
      dm.scaling.std(cc) = sds[j];
      dm.values.col(cc) = (raw.col(j).array() - means[j]) / sds[j];
    }
  }

  if (y_trimmed != nullptr) {
    double ym = 0.0, ys = 0.0;
    detail::column_stats(y_trimmed->data(), n, ym, ys);
    dm.scaling.y_mean = ym;
    dm.scaling.y_std = detail::is_constant_column(ym, ys) ? 1.0 : ys;
  }
  return dm;
}

}  // namespace

DesignMatrix expand(const Eigen::MatrixXd& X, const Eigen::VectorXd* y,
                    const ExpansionConfig& config, int threads) {
  const ExpansionPlan plan = prepare_expansion(X, y, config);
  const int total = static_cast<int>(plan.terms.size());
  const int n = plan.n_rows;
  const int nthreads = resolve_threads(threads);

  Eigen::MatrixXd raw(n, total);
  std::vector<double> means(total, 0.0), sds(total, 0.0);
  bool domain_failure = false;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads) \
    reduction(|| : domain_failure)
#endif
  for (int j = 0; j < total; ++j) {
    const FeatureTerm& term = plan.terms[j];
    double* col = raw.col(j).data();
    if (term.is_intercept()) {
      for (int i = 0; i < n; ++i) col[i] = 1.0;
      means[j] = 0.0;
      sds[j] = 1.0;
      continue;
    }
    bool finite = true;
    for (int i = 0; i < n; ++i) {
      col[i] = eval_term_cell(term, X, y, plan.lag + i);
      finite = finite && std::isfinite(col[i]);
    }
    detail::column_stats(col, n, means[j], sds[j]);
    if (!finite) domain_failure = true;
  }
  (void)nthreads;

  if (domain_failure && config.domain_guard == DomainGuard::kStrict) {
    throw numerical_error(
        "expand: non-finite expanded feature under strict domain guard");
  }

  Eigen::VectorXd y_trim;
  if (y != nullptr) y_trim = y->tail(n);
  return assemble(plan, raw, means, sds, y != nullptr ? &y_trim : nullptr);
}

DesignMatrix expand(const Eigen::MatrixXd& X, const ExpansionConfig& config,
                    int threads) {
  return expand(X, nullptr, config, threads);
}

DesignMatrix expand_reference(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd* y,
                              const ExpansionConfig& config) {
  const ExpansionPlan plan = prepare_expansion(X, y, config);
  const int total = static_cast<int>(plan.terms.size());
  const int n = plan.n_rows;

  Eigen::MatrixXd raw(n, total);
  std::vector<double> means(total, 0.0), sds(total, 0.0);
  bool domain_failure = false;
  for (int j = 0; j < total; ++j) {
    const FeatureTerm& term = plan.terms[j];
    if (term.is_intercept()) {
      raw.col(j).setOnes();
      means[j] = 0.0;
      sds[j] = 1.0;
      continue;
    }
    for (int i = 0; i < n; ++i) {
      const double v = eval_term_cell(term, X, y, plan.lag + i);
      raw(i, j) = v;
      if (!std::isfinite(v)) domain_failure = true;
    }
    detail::column_stats(raw.col(j).data(), n, means[j], sds[j]);
  }
  if (domain_failure && config.domain_guard == DomainGuard::kStrict) {
    throw numerical_error(
        "expand: non-finite expanded feature under strict domain guard");
  }

  Eigen::VectorXd y_trim;
  if (y != nullptr) y_trim = y->tail(n);
  return assemble(plan, raw, means, sds, y != nullptr ? &y_trim : nullptr);
}

Eigen::VectorXd evaluate_terms(const std::vector<FeatureTerm>& terms,
                               const Eigen::Ref<const Eigen::VectorXd>& row,
                               const History& history, DomainGuard guard) {
  int max_lag = 0;
  for (const FeatureTerm& t : terms) max_lag = std::max(max_lag, t.max_lag());
  if (max_lag > history.depth()) {
    throw std::invalid_argument("evaluate_terms: history depth " +
                                std::to_string(history.depth()) +
                                " is smaller than max term lag " +
                                std::to_string(max_lag));
  }

  auto lagged = [&](int variable, int lag) {
    const int r = history.depth() - lag;
    return variable == kOutputVariable ? history.y(r) : history.X(r, variable);
  };

  Eigen::VectorXd out(static_cast<int>(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) {
    out(static_cast<int>(j)) = terms[j].eval(row, lagged);
    if (guard == DomainGuard::kStrict && !std::isfinite(out(static_cast<int>(j)))) {
      throw numerical_error("evaluate_terms: non-finite value for term " +
                            terms[j].display());
    }
  }
  return out;
}

}  // namespace lcen
