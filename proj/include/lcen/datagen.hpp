#pragma once

#include "lcen/expansion.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lcen {

/// Additive Gaussian noise. `level` is a percentage of the signal's sample
/// standard deviation; `variance` is a direct sigma^2. Exactly one is set.
struct NoiseSpec {
  std::optional<double> level;
  std::optional<double> variance;
  std::uint64_t seed = 0;

  static NoiseSpec percent(double p, std::uint64_t seed = 0);
  static NoiseSpec direct_variance(double v, std::uint64_t seed = 0);
  static NoiseSpec none(std::uint64_t seed = 0) { return percent(0.0, seed); }

  void validate() const;
  double sigma_for(double sigma_signal) const;
};

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
  std::string target_name = "y";

  int rows() const { return static_cast<int>(y.size()); }
  int features() const { return static_cast<int>(X.cols()); }
};

struct GeneratedDataset {
  Dataset data;
  Eigen::VectorXd y_noiseless;
  std::vector<FeatureTerm> true_support;
  Eigen::VectorXd true_coefficients;
  double true_intercept = 0.0;
  std::string generator;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

/// y = -2.8 X0 - 2.7 X1 - 5.3 X2 + 4.3 X3 + 9.0 X4 + eps, X ~ U(1, 10)^5.
GeneratedDataset gen_linear5(int n, const NoiseSpec& noise);

/// X0 ~ U(1, 10); X1 = X0 + eps1; y = 2 X0 + 2 X1 + eps2. eps1 is scaled
/// against std(X0), eps2 against std of the noiseless output. The two noise
/// streams are independent, so changing eps2 leaves X untouched.
GeneratedDataset gen_multicollinear(int n, const NoiseSpec& eps1,
                                    const NoiseSpec& eps2);

/// E^2 = c^4 m^2 + c^2 m^2 v^2 with m ~ U(1, mass_max),
/// v ~ U(5e7, 2.5e8) m/s.
GeneratedDataset gen_relativistic(int n, double mass_max,
                                  const NoiseSpec& noise);

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

/// y = X + 0.5 X^2 + 0.1 X^3 + 0.05 X^4 + eps, X ~ N(0, var 5); eps has the
/// given direct variance. Train and test share the ground truth.
struct QuarticPair {
  GeneratedDataset train;
  GeneratedDataset test;
};
QuarticPair gen_quartic(int n_train, int n_test, double noise_variance,
                        std::uint64_t seed);

/// Embedded orbital tables: semi-major axis a in AU, sidereal period T in
/// Earth days. The ground-truth term is a^(3/2) with k = 365.25 (modern)
/// or 365.15 (Kepler's 1619 values).
enum class KeplerVersion { kOriginal1619, kModern };
GeneratedDataset kepler_data(KeplerVersion version);

/// Rectangular numeric CSV with a header row ('.' decimal separator, comma
/// delimiter, no quoting). Row order is preserved. target_column = "" picks
/// the last column.
Dataset load_csv(const std::string& path, const std::string& target_column = "");

/// Writes features then the target column, shortest round-trip formatting.
void save_csv(const std::string& path, const Dataset& ds);

}  // namespace lcen
