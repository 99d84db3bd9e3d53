#include "lcen/model_io.hpp"

#include "lcen/common.hpp"

#include <fstream>

namespace lcen {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

json cv_to_json(const CVResult& cv) {
  json records = json::array();
  for (const CVRecord& r : cv.records) {
    records.push_back({{"alpha", r.alpha},
                       {"l1_ratio", r.l1_ratio},
                       {"degree", r.degree},
                       {"lag", r.lag},
                       {"mean_mse", r.mean_mse},
                       {"failed", r.failed}});
  }
  return {{"records", std::move(records)},
          {"best_index", cv.best_index},
          {"seed", cv.seed}};
}

CVResult cv_from_json(const json& j) {
  CVResult cv;
  cv.best_index = j.at("best_index").get<int>();
  cv.seed = j.at("seed").get<std::uint64_t>();
  for (const json& r : j.at("records")) {
    CVRecord rec;
    rec.alpha = r.at("alpha").get<double>();
    rec.l1_ratio = r.at("l1_ratio").get<double>();
    rec.degree = r.at("degree").get<int>();
    rec.lag = r.at("lag").get<int>();
    rec.mean_mse = r.at("mean_mse").get<double>();
    rec.failed = r.at("failed").get<bool>();
    cv.records.push_back(rec);
  }
  return cv;
}

json families_to_json(const TransformFamilies& f) {
  return {{"power", f.power},
          {"log", f.log},
          {"half_power", f.half_power},
          {"inverse", f.inverse},
          {"log_over_power", f.log_over_power}};
}

TransformFamilies families_from_json(const json& j) {
  TransformFamilies f;
  f.power = j.at("power").get<bool>();
  f.log = j.at("log").get<bool>();
  f.half_power = j.at("half_power").get<bool>();
  f.inverse = j.at("inverse").get<bool>();
  f.log_over_power = j.at("log_over_power").get<bool>();
  return f;
}

}  // namespace

json term_to_json(const FeatureTerm& term, const std::vector<std::string>& names,
                  const std::string& target_name) {
  json factors = json::array();
  for (const Factor& f : term.factors) {
    factors.push_back({{"variable", f.variable},
                       {"lag", f.lag},
                       {"transform", transform_name(f.transform)},
                       {"a", f.a},
                       {"b", f.b}});
  }
  return {{"display", term.display(names, target_name)},
          {"factors", std::move(factors)}};
}

FeatureTerm term_from_json(const json& j) {
  FeatureTerm t;
  for (const json& jf : j.at("factors")) {
    Factor f;
    f.variable = jf.at("variable").get<int>();
    f.lag = jf.at("lag").get<int>();
    f.transform = transform_from_name(jf.at("transform").get<std::string>());
    f.a = jf.at("a").get<int>();
    f.b = jf.at("b").get<int>();
    t.factors.push_back(f);
  }
  return t;
}

json terms_to_json(const std::vector<FeatureTerm>& terms,
                   const std::vector<std::string>& names,
                   const std::string& target_name) {
  json arr = json::array();
  for (const FeatureTerm& t : terms) arr.push_back(term_to_json(t, names, target_name));
  return arr;
}

json model_to_json(const FittedModel& model) {
  json j;
  j["library_version"] = kLibraryVersion;
  j["pipeline"] = model.hyperparameters.pipeline;
  j["seed"] = model.seed;
  j["degenerate"] = model.degenerate;
  j["feature_names"] = model.feature_names;
  j["target_name"] = model.target_name;
  j["terms"] = terms_to_json(model.terms, model.feature_names, model.target_name);
  j["scaled_beta"] = vector_to_json(model.scaled_beta);
  j["unscaled_beta"] = vector_to_json(model.unscaled_beta);
  j["intercept"] = model.intercept;
  j["scaling"] = {{"mean", vector_to_json(model.scaling.mean)},
                  {"std", vector_to_json(model.scaling.std)},
                  {"y_mean", model.scaling.y_mean},
                  {"y_std", model.scaling.y_std},
                  {"dropped_constant_columns", model.scaling.dropped_constant_columns}};
  j["hyperparameters"] = {{"alpha", model.hyperparameters.alpha},
                          {"l1_ratio", model.hyperparameters.l1_ratio},
                          {"degree", model.hyperparameters.degree},
                          {"lag", model.hyperparameters.lag},
                          {"cutoff", model.hyperparameters.cutoff},
                          {"folds", model.hyperparameters.folds}};
  j["cv_table"] = {{"stage1", cv_to_json(model.stage1_cv)},
                   {"stage2", model.stage2_cv.has_value()
                                  ? cv_to_json(*model.stage2_cv)
                                  : json(nullptr)}};
  j["train_metrics"] = {{"rmse", model.train_metrics.rmse},
                        {"mse", model.train_metrics.mse},
                        {"mean_relative_error", model.train_metrics.mean_relative_error}};
  j["n_features_selected"] = model.n_features_selected;
  j["expansion"] = {
      {"domain_guard", model.domain_guard == DomainGuard::kStrict ? "strict" : "auto"},
      {"cross_lag_interactions", model.cross_lag_interactions},
      {"families", families_to_json(model.families)}};
  j["fold_scheme"] = model.fold_scheme == FoldScheme::kOrdered    ? "ordered"
                     : model.fold_scheme == FoldScheme::kShuffled ? "shuffled"
                                                                  : "auto";
  return j;
}

FittedModel model_from_json(const json& j) {
  FittedModel m;
  m.hyperparameters.pipeline = j.at("pipeline").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.degenerate = j.at("degenerate").get<bool>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.target_name = j.at("target_name").get<std::string>();
  for (const json& t : j.at("terms")) m.terms.push_back(term_from_json(t));
  m.scaled_beta = vector_from_json(j.at("scaled_beta"));
  m.unscaled_beta = vector_from_json(j.at("unscaled_beta"));
  m.intercept = j.at("intercept").get<double>();

  const json& sc = j.at("scaling");
  m.scaling.mean = vector_from_json(sc.at("mean"));
  m.scaling.std = vector_from_json(sc.at("std"));
  m.scaling.y_mean = sc.at("y_mean").get<double>();
  m.scaling.y_std = sc.at("y_std").get<double>();
  m.scaling.dropped_constant_columns =
      sc.at("dropped_constant_columns").get<std::vector<int>>();

  const json& hp = j.at("hyperparameters");
  m.hyperparameters.alpha = hp.at("alpha").get<double>();
  m.hyperparameters.l1_ratio = hp.at("l1_ratio").get<double>();
  m.hyperparameters.degree = hp.at("degree").get<int>();
  m.hyperparameters.lag = hp.at("lag").get<int>();
  m.hyperparameters.cutoff = hp.at("cutoff").get<double>();
  m.hyperparameters.folds = hp.at("folds").get<int>();

  const json& cv = j.at("cv_table");
  m.stage1_cv = cv_from_json(cv.at("stage1"));
  if (!cv.at("stage2").is_null()) m.stage2_cv = cv_from_json(cv.at("stage2"));

  const json& tm = j.at("train_metrics");
  m.train_metrics.rmse = tm.at("rmse").get<double>();
  m.train_metrics.mse = tm.at("mse").get<double>();
  m.train_metrics.mean_relative_error = tm.at("mean_relative_error").get<double>();
  m.n_features_selected = j.at("n_features_selected").get<int>();

  const json& ex = j.at("expansion");
  m.domain_guard = ex.at("domain_guard").get<std::string>() == "strict"
                       ? DomainGuard::kStrict
                       : DomainGuard::kAuto;
  m.cross_lag_interactions = ex.at("cross_lag_interactions").get<bool>();
  m.families = families_from_json(ex.at("families"));
  const std::string fs = j.at("fold_scheme").get<std::string>();
  m.fold_scheme = fs == "ordered"    ? FoldScheme::kOrdered
                  : fs == "shuffled" ? FoldScheme::kShuffled
                                     : FoldScheme::kAuto;
  return m;
}

void save_model(const FittedModel& model, const std::string& path,
                const std::map<std::string, std::string>& provenance) {
  json j = model_to_json(model);
  if (!provenance.empty()) j["config"] = provenance;
  std::ofstream out(path);
  if (!out) throw data_error("cannot write model file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw data_error("write failure on model file: " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error("malformed model file " + path + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw data_error("model file " + path + " is missing fields: " + e.what());
  }
}

json dataset_meta_to_json(const GeneratedDataset& g) {
  json true_model;
  true_model["terms"] =
      terms_to_json(g.true_support, g.data.feature_names, g.data.target_name);
  true_model["coefficients"] = vector_to_json(g.true_coefficients);
  true_model["intercept"] = g.true_intercept;
  return {{"generator", g.generator},
          {"seed", g.seed},
          {"params", g.params},
          {"true_model", std::move(true_model)},
          {"library_version", kLibraryVersion}};
}

}  // namespace lcen
