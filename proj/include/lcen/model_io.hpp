#pragma once

#include "lcen/datagen.hpp"
#include "lcen/pipeline.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace lcen {

/// Term as {"display": ..., "factors": [{variable, lag, transform, a, b}]}.
/// The output series is encoded as variable -1.
nlohmann::json term_to_json(const FeatureTerm& term,
                            const std::vector<std::string>& names = {},
                            const std::string& target_name = "y");
FeatureTerm term_from_json(const nlohmann::json& j);

nlohmann::json terms_to_json(const std::vector<FeatureTerm>& terms,
                             const std::vector<std::string>& names = {},
                             const std::string& target_name = "y");

/// Stable model document; doubles are written with shortest round-trip
/// formatting, so a reloaded model predicts bit-identically.
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

void save_model(const FittedModel& model, const std::string& path,
                const std::map<std::string, std::string>& provenance = {});
FittedModel load_model(const std::string& path);

/// Sidecar document for generated datasets: generator, seed, params, and
/// the ground-truth model.
nlohmann::json dataset_meta_to_json(const GeneratedDataset& g);

}  // namespace lcen
