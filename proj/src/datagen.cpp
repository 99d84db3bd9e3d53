#include "lcen/datagen.hpp"

#include "lcen/common.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace lcen {

namespace {

// Decorrelates the noise stream from the X stream so that changing the
// noise level rescales the same draws instead of reshuffling the data.
constexpr std::uint64_t kNoiseStreamSalt = 0x9E3779B97F4A7C15ull;

double sample_std(const Eigen::VectorXd& v) {
  double mean = 0.0, sd = 0.0;
  detail::column_stats(v.data(), static_cast<int>(v.size()), mean, sd);
  return sd;
}

Eigen::VectorXd standard_normals(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = dist(rng);
  return z;
}

FeatureTerm power_term(int variable, int exponent) {
  return FeatureTerm{{Factor{variable, 0, Transform::kPower, 0, exponent}}};
}

}  // namespace

NoiseSpec NoiseSpec::percent(double p, std::uint64_t seed) {
  NoiseSpec s;
  s.level = p;
  s.seed = seed;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::direct_variance(double v, std::uint64_t seed) {
  NoiseSpec s;
  s.variance = v;
  s.seed = seed;
  s.validate();
  return s;
}

void NoiseSpec::validate() const {
  if (level.has_value() == variance.has_value()) {
    throw std::invalid_argument(
        "noise spec: exactly one of level/variance must be set");
  }
  if (level.has_value() && *level < 0.0) {
    throw std::invalid_argument("noise spec: level < 0");
  }
  if (variance.has_value() && *variance < 0.0) {
    throw std::invalid_argument("noise spec: variance < 0");
  }
}

double NoiseSpec::sigma_for(double sigma_signal) const {
  validate();
  if (level.has_value()) return *level / 100.0 * sigma_signal;
  return std::sqrt(*variance);
}

GeneratedDataset gen_linear5(int n, const NoiseSpec& noise) {
  if (n < 10) throw std::invalid_argument("gen_linear5: n < 10");
  noise.validate();

  const std::array<double, 5> coefs = {-2.8, -2.7, -5.3, 4.3, 9.0};
  std::mt19937_64 rng_x(noise.seed);
  std::mt19937_64 rng_e(noise.seed ^ kNoiseStreamSalt);
  std::uniform_real_distribution<double> unif(1.0, 10.0);

  GeneratedDataset g;
  g.generator = "linear5";
  g.seed = noise.seed;
  g.data.X.resize(n, 5);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) g.data.X(i, j) = unif(rng_x);
  }
  g.y_noiseless = g.data.X * Eigen::Map<const Eigen::VectorXd>(coefs.data(), 5);

  const double sigma = noise.sigma_for(sample_std(g.y_noiseless));
  g.data.y = g.y_noiseless + sigma * standard_normals(n, rng_e);
  g.data.feature_names = {"X0", "X1", "X2", "X3", "X4"};

  g.true_coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(), 5);
  for (int j = 0; j < 5; ++j) g.true_support.push_back(power_term(j, 1));
  g.params["n"] = n;
  g.params["noise_level"] = noise.level.value_or(-1.0);
  g.params["noise_sigma"] = sigma;
  return g;
}

GeneratedDataset gen_multicollinear(int n, const NoiseSpec& eps1,
                                    const NoiseSpec& eps2) {
  if (n < 10) throw std::invalid_argument("gen_multicollinear: n < 10");
  eps1.validate();
  eps2.validate();

  std::mt19937_64 rng_x(eps1.seed);
  std::mt19937_64 rng_e1(eps1.seed ^ kNoiseStreamSalt);
  std::mt19937_64 rng_e2(eps2.seed ^ (kNoiseStreamSalt << 1));
  std::uniform_real_distribution<double> unif(1.0, 10.0);

  Eigen::VectorXd x0(n);
  for (int i = 0; i < n; ++i) x0(i) = unif(rng_x);
  const double sigma_x = sample_std(x0);
  const double sigma_e1 = eps1.sigma_for(sigma_x);
  const Eigen::VectorXd x1 = x0 + sigma_e1 * standard_normals(n, rng_e1);

  GeneratedDataset g;
  g.generator = "multicollinear";
  g.seed = eps1.seed;
  g.data.X.resize(n, 2);
  g.data.X.col(0) = x0;
  g.data.X.col(1) = x1;
  g.y_noiseless = 2.0 * x0 + 2.0 * x1;

  const double sigma_y = sample_std(g.y_noiseless);
  const double sigma_e2 = eps2.sigma_for(sigma_y);
  g.data.y = g.y_noiseless + sigma_e2 * standard_normals(n, rng_e2);
  g.data.feature_names = {"X0", "X1"};

  g.true_coefficients.resize(2);
  g.true_coefficients << 2.0, 2.0;
  g.true_support.push_back(power_term(0, 1));
  g.true_support.push_back(power_term(1, 1));
  g.params["n"] = n;
  g.params["eps1_level"] = eps1.level.value_or(-1.0);
  g.params["eps2_level"] = eps2.level.value_or(-1.0);
  g.params["sigma_x"] = sigma_x;
  g.params["sigma_eps1"] = sigma_e1;
  g.params["sigma_eps2"] = sigma_e2;
  return g;
}

GeneratedDataset gen_relativistic(int n, double mass_max,
                                  const NoiseSpec& noise) {
  if (n < 10) throw std::invalid_argument("gen_relativistic: n < 10");
  if (!(mass_max > 1.0)) {
    throw std::invalid_argument("gen_relativistic: mass_max must exceed 1");
  }
  noise.validate();

  const double c2 = kSpeedOfLight * kSpeedOfLight;
  const double c4 = c2 * c2;

  std::mt19937_64 rng_x(noise.seed);
  std::mt19937_64 rng_e(noise.seed ^ kNoiseStreamSalt);
  std::uniform_real_distribution<double> mass(1.0, mass_max);
  std::uniform_real_distribution<double> vel(5.0e7, 2.5e8);

  GeneratedDataset g;
  g.generator = "relativistic";
  g.seed = noise.seed;
  g.data.X.resize(n, 2);
  g.y_noiseless.resize(n);
  for (int i = 0; i < n; ++i) {
    const double m = mass(rng_x);
    const double v = vel(rng_x);
    g.data.X(i, 0) = m;
    g.data.X(i, 1) = v;
    g.y_noiseless(i) = c4 * m * m + c2 * m * m * v * v;
  }

  const double sigma = noise.sigma_for(sample_std(g.y_noiseless));
  g.data.y = g.y_noiseless + sigma * standard_normals(n, rng_e);
  g.data.feature_names = {"m", "v"};
  g.data.target_name = "E2";

  g.true_coefficients.resize(2);
  g.true_coefficients << c4, c2;
  g.true_support.push_back(power_term(0, 2));
  g.true_support.push_back(FeatureTerm{{Factor{0, 0, Transform::kPower, 0, 2},
                                        Factor{1, 0, Transform::kPower, 0, 2}}});
  g.params["n"] = n;
  g.params["mass_max"] = mass_max;
  g.params["noise_level"] = noise.level.value_or(-1.0);
  g.params["noise_sigma"] = sigma;
  return g;
}

QuarticPair gen_quartic(int n_train, int n_test, double noise_variance,
                        std::uint64_t seed) {
  if (n_train < 2 || n_test < 1) {
    throw std::invalid_argument("gen_quartic: sample counts too small");
  }
  if (noise_variance < 0.0) {
    throw std::invalid_argument("gen_quartic: noise variance < 0");
  }

  std::mt19937_64 rng_x(seed);
  std::mt19937_64 rng_e(seed ^ kNoiseStreamSalt);
  std::normal_distribution<double> xdist(0.0, std::sqrt(5.0));
  const double sigma = std::sqrt(noise_variance);

  auto make = [&](int n) {
    GeneratedDataset g;
    g.generator = "quartic";
    g.seed = seed;
    g.data.X.resize(n, 1);
    g.y_noiseless.resize(n);
    for (int i = 0; i < n; ++i) {
      const double x = xdist(rng_x);
      g.data.X(i, 0) = x;
      g.y_noiseless(i) = x + 0.5 * x * x + 0.1 * x * x * x + 0.05 * x * x * x * x;
    }
    g.data.y = g.y_noiseless + sigma * standard_normals(n, rng_e);
    g.data.feature_names = {"X0"};
    g.true_coefficients.resize(4);
    g.true_coefficients << 1.0, 0.5, 0.1, 0.05;
    for (int d = 1; d <= 4; ++d) g.true_support.push_back(power_term(0, d));
    g.params["noise_variance"] = noise_variance;
    g.params["n_train"] = n_train;
    g.params["n_test"] = n_test;
    return g;
  };

  QuarticPair pair{make(n_train), make(n_test)};
  return pair;
}

GeneratedDataset kepler_data(KeplerVersion version) {
  struct Row {
    double a;
    double T;
  };
  // Modern values: JPL approximate Keplerian elements (a, AU) and sidereal
  // periods (days). Original values: Kepler's 1619 mean distances/periods.
  static const std::array<Row, 8> kModern = {{{0.38709927, 87.9691},
                                              {0.72333566, 224.701},
                                              {1.00000261, 365.256},
                                              {1.52371034, 686.980},
                                              {5.20288700, 4332.589},
                                              {9.53667594, 10759.22},
                                              {19.18916464, 30685.4},
                                              {30.06992276, 60189.0}}};
  static const std::array<Row, 6> kOriginal = {{{0.389, 87.77},
                                                {0.724, 224.70},
                                                {1.000, 365.25},
                                                {1.524, 686.95},
                                                {5.200, 4332.62},
                                                {9.510, 10759.2}}};

  GeneratedDataset g;
  const bool modern = version == KeplerVersion::kModern;
  g.generator = modern ? "kepler_modern" : "kepler_1619";
  const double k = modern ? 365.25 : 365.15;
  const int n = modern ? static_cast<int>(kModern.size())
                       : static_cast<int>(kOriginal.size());

  g.data.X.resize(n, 1);
  g.data.y.resize(n);
  g.y_noiseless.resize(n);
  for (int i = 0; i < n; ++i) {
    const Row& r = modern ? kModern[static_cast<std::size_t>(i)]
                          : kOriginal[static_cast<std::size_t>(i)];
    g.data.X(i, 0) = r.a;
    g.data.y(i) = r.T;
    g.y_noiseless(i) = k * r.a * std::sqrt(r.a);
  }
  g.data.feature_names = {"a"};
  g.data.target_name = "T";
  g.true_coefficients.resize(1);
  g.true_coefficients << k;
  g.true_support.push_back(
      FeatureTerm{{Factor{0, 0, Transform::kHalfPower, 0, 2}}});
  g.params["k"] = k;
  g.params["n"] = n;
  return g;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(strip(line.substr(start)));
      break;
    }
    out.push_back(strip(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, int row, const std::string& col,
                  const std::string& path) {
  std::string_view sv(cell);
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (res.ec != std::errc() || res.ptr != sv.data() + sv.size() || cell.empty()) {
    throw data_error(path + ": non-numeric cell '" + cell + "' at data row " +
                     std::to_string(row) + ", column '" + col + "'");
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw data_error("empty CSV file: " + path);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
    line.erase(0, 3);  // UTF-8 BOM
  }
  const std::vector<std::string> header = split_line(line);
  const int n_cols = static_cast<int>(header.size());
  if (n_cols < 1 || (n_cols == 1 && header[0].empty())) {
    throw data_error(path + ": missing header row");
  }

  int target_idx = -1;
  if (target_column.empty()) {
    target_idx = n_cols - 1;
  } else {
    for (int j = 0; j < n_cols; ++j) {
      if (header[static_cast<std::size_t>(j)] == target_column) {
        target_idx = j;
        break;
      }
    }
    if (target_idx < 0) {
      throw data_error(path + ": target column '" + target_column +
                       "' not found in header");
    }
  }

  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const std::vector<std::string> cells = split_line(line);
    if (static_cast<int>(cells.size()) != n_cols) {
      throw data_error(path + ": ragged row " + std::to_string(line_no) +
                       " (" + std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(n_cols) + ")");
    }
    std::vector<double> vals(static_cast<std::size_t>(n_cols));
    for (int j = 0; j < n_cols; ++j) {
      vals[static_cast<std::size_t>(j)] =
          parse_cell(cells[static_cast<std::size_t>(j)], line_no,
                     header[static_cast<std::size_t>(j)], path);
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw data_error(path + ": no data rows");

  Dataset ds;
  const int n = static_cast<int>(rows.size());
  ds.X.resize(n, n_cols - 1);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (int j = 0; j < n_cols; ++j) {
      if (j == target_idx) {
        ds.y(i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      } else {
        ds.X(i, c++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
  }
  for (int j = 0; j < n_cols; ++j) {
    if (j != target_idx) ds.feature_names.push_back(header[static_cast<std::size_t>(j)]);
  }
  ds.target_name = header[static_cast<std::size_t>(target_idx)];
  return ds;
}

void save_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write CSV file: " + path);

  const int m = ds.features();
  for (int j = 0; j < m; ++j) {
    const std::string name = j < static_cast<int>(ds.feature_names.size())
                                 ? ds.feature_names[static_cast<std::size_t>(j)]
                                 : "X" + std::to_string(j);
    out << name << ',';
  }
  out << (ds.target_name.empty() ? "y" : ds.target_name) << '\n';

  char buf[64];
  auto write_value = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
  };
  for (int i = 0; i < ds.rows(); ++i) {
    for (int j = 0; j < m; ++j) {
      write_value(ds.X(i, j));
      out << ',';
    }
    write_value(ds.y(i));
    out << '\n';
  }
  if (!out) throw data_error("write failure on CSV file: " + path);
}

}  // namespace lcen
