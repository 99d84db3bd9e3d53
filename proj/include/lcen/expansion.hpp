#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace lcen {

/// Transform applied to one (variable, lag) slot inside a term.
enum class Transform : std::uint8_t {
  kPower,         // x^b
  kLogPower,      // ln(x)^a
  kHalfPower,     // x^((2b-1)/2)
  kInversePower,  // 1/x^b
  kLogOverPower,  // ln(x)^a / x^b
};

const char* transform_name(Transform t);
Transform transform_from_name(const std::string& name);

/// Variable index standing for the output series; only valid with lag >= 1.
inline constexpr int kOutputVariable = -1;

struct Factor {
  int variable = 0;  // raw-feature index, or kOutputVariable
  int lag = 0;       // time offset in rows; 0 = current sample
  Transform transform = Transform::kPower;
  int a = 0;  // log exponent (kLogPower, kLogOverPower)
  int b = 0;  // power exponent; for kHalfPower, b encodes exponent (2b-1)/2

  int degree() const;
  bool requires_positive() const { return transform != Transform::kPower; }
  double eval(double x) const;

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// One expanded feature: a product of factors over distinct (variable, lag)
/// slots, kept sorted by (variable, lag) with the output slot last. The
/// intercept is the unique empty-factor term.
///
/// Display grammar (documented in the README):
///   power          X0, X0^2
///   log_power      ln(X0), ln(X0)^2
///   half_power     X0^0.5, X0^1.5, X0^2.5
///   inverse_power  1/X0, 1/X0^2
///   log_over_power ln(X0)/X0, ln(X0)^2/X0, ln(X0)/X0^2
/// Lagged slots append "[t-k]" to the variable name; the output series is
/// named "y" by default. Factors of a product are joined with '*'.
struct FeatureTerm {
  std::vector<Factor> factors;

  bool is_intercept() const { return factors.empty(); }
  int degree() const;
  int max_lag() const;
  bool uses_inputs() const;  // any factor on a raw feature

  /// Canonical display string; pure function of the factors. `names` maps
  /// raw-feature indices to labels (defaults to X0, X1, ...).
  std::string display(const std::vector<std::string>& names = {},
                      const std::string& target_name = "y") const;

  /// Evaluate on one sample. `row` holds the current raw features;
  /// `lagged_value(variable, lag)` must resolve lagged slots.
  template <typename LaggedFn>
  double eval(const Eigen::Ref<const Eigen::VectorXd>& row,
              LaggedFn&& lagged_value) const {
    double acc = 1.0;
    for (const Factor& f : factors) {
      const double x = (f.lag == 0) ? row(f.variable)
                                    : lagged_value(f.variable, f.lag);
      acc *= f.eval(x);
    }
    return acc;
  }

  friend bool operator==(const FeatureTerm&, const FeatureTerm&) = default;
};

/// Sum of per-factor degrees; the intercept has degree 0.
int term_degree(const FeatureTerm& term);

struct TransformFamilies {
  bool power = true;           // monomials and interactions
  bool log = true;             // ln(x)^d
  bool half_power = true;      // x^((2d-1)/2)
  bool inverse = true;         // 1/x^d
  bool log_over_power = true;  // ln(x)^a / x^b, a+b = d >= 2

  static TransformFamilies all() { return {}; }
  static TransformFamilies power_only() {
    return {true, false, false, false, false};
  }
  friend bool operator==(const TransformFamilies&,
                         const TransformFamilies&) = default;
};

/// Treatment of transforms that require strictly positive inputs.
///   kAuto:   families needing positivity are silently skipped for any
///            variable whose training column contains a value <= 0.
///   kStrict: such inputs raise numerical_error instead.
enum class DomainGuard : std::uint8_t { kAuto, kStrict };

struct ExpansionConfig {
  int degree = 1;
  int lag = 0;
  TransformFamilies families;
  DomainGuard domain_guard = DomainGuard::kAuto;
  /// When false (default), lagged variables enter only the degree-1
  /// families; monomial interactions and higher-degree transforms are built
  /// from current inputs alone. Set true to expand lagged variables fully.
  bool cross_lag_interactions = false;
  int max_degree_guardrail = 10;
};

struct ScalingInfo {
  Eigen::VectorXd mean;  // per retained column; 0 for the intercept
  Eigen::VectorXd std;   // per retained column; 1 for the intercept
  double y_mean = 0.0;
  double y_std = 1.0;
  /// Indices into the enumerated (pre-drop) term list.
  std::vector<int> dropped_constant_columns;
};

struct DesignMatrix {
  Eigen::MatrixXd values;          // standardized; intercept column is ones
  std::vector<FeatureTerm> terms;  // column-aligned
  ScalingInfo scaling;

  int cols() const { return static_cast<int>(terms.size()); }
  int rows() const { return static_cast<int>(values.rows()); }
  int intercept_column() const;  // -1 if absent
};

/// Full term list for `n_features` raw inputs under `config`, in canonical
/// order: intercept first, then degree blocks 1..D; within a degree block
/// the families follow monomials, ln^d, half power, inverse, log-over-power,
/// each iterated over variables by index with lags ascending (output last).
/// The list for degree D-1 is a prefix of the list for degree D.
std::vector<FeatureTerm> enumerate_terms(int n_features,
                                         const ExpansionConfig& config);

/// Expand raw inputs (and, with lag L > 0, lagged inputs/outputs at offsets
/// 1..L) into the standardized design matrix. The first L rows are consumed
/// as history, so the result has n - L rows. Constant columns are dropped
/// and recorded. `y` is required iff lag > 0; when given, scaling.y_mean /
/// y_std are filled from the trimmed output.
DesignMatrix expand(const Eigen::MatrixXd& X, const Eigen::VectorXd* y,
                    const ExpansionConfig& config, int threads = 0);
DesignMatrix expand(const Eigen::MatrixXd& X, const ExpansionConfig& config,
                    int threads = 0);

/// Serial reference for `expand`; straight loops, no OpenMP. Kept for
/// equivalence tests and the benchmark.
DesignMatrix expand_reference(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd* y,
                              const ExpansionConfig& config);

/// Lagged raw/output values for prediction, rows ordered oldest to newest:
/// row (depth()-k) supplies lag k relative to the sample being evaluated.
struct History {
  Eigen::MatrixXd X;  // depth x m; may be empty for static models
  Eigen::VectorXd y;  // depth

  int depth() const { return static_cast<int>(y.size()); }
  static History empty() { return {}; }
};

/// Pure term evaluation on one raw row; no standardization (prediction uses
/// unscaled coefficients). Under kStrict a non-finite factor value raises
/// numerical_error; under kAuto it propagates.
Eigen::VectorXd evaluate_terms(const std::vector<FeatureTerm>& terms,
                               const Eigen::Ref<const Eigen::VectorXd>& row,
                               const History& history = History::empty(),
                               DomainGuard guard = DomainGuard::kAuto);

namespace detail {

struct VariableRef {
  int variable;  // kOutputVariable for the output series
  int lag;
  friend bool operator==(const VariableRef&, const VariableRef&) = default;
};

/// Enumeration universe: inputs by index with lags 0..L ascending, then the
/// output at lags 1..L.
std::vector<VariableRef> variable_universe(int n_features, int lag);

/// Core enumerator with a per-universe-entry family mask (domain guard).
std::vector<FeatureTerm> enumerate_terms_masked(
    int n_features, const ExpansionConfig& config,
    const std::vector<TransformFamilies>& masks);

/// Sequential mean / sample std (ddof = 1) over a column; shared by the
/// parallel and reference paths so their outputs match bit for bit.
void column_stats(const double* data, int n, double& mean, double& sd);

/// Drop threshold for constant columns.
bool is_constant_column(double mean, double sd);

}  // namespace detail

}  // namespace lcen
