#pragma once

#include <set>
#include <string>
#include <vector>

#include "spoofbench/dataio/manifest.hpp"
#include "spoofbench/features/feature.hpp"
#include "spoofbench/features/length_policy.hpp"
#include "spoofbench/models/model_id.hpp"

namespace spoofbench::harness {

class EmptyGrid : public Error {
 public:
  using Error::Error;
};

struct ExperimentSpec {
  std::vector<models::ModelId> models;
  std::vector<features::FeatureKind> features;
  std::vector<features::LengthMode> lengths;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::set<dataio::Split> train_splits = {dataio::Split::train};
  std::vector<std::string> eval_manifests;

  bool operator==(const ExperimentSpec&) const = default;
};

// One cell of the grid; seeds are looped over separately.
struct ExperimentConfig {
  models::ModelId model;
  features::FeatureKind feature;
  features::LengthMode length;

  bool operator==(const ExperimentConfig&) const = default;
  std::string label() const;  // e.g. "LCNN_logspec_fixed4s"
};

bool compatible(models::ModelId model, features::FeatureKind feature);

// Every compatible (model, feature, length) in spec order: models outermost,
// lengths innermost. Incompatible pairs are skipped and, if `excluded` is
// given, described there.
std::vector<ExperimentConfig> expand_grid(const ExperimentSpec& spec,
                                          std::vector<std::string>* excluded = nullptr);

// The evaluated grid: all twelve models, all feature kinds, both lengths.
ExperimentSpec full_grid_spec();

void to_json(nlohmann::json& j, const ExperimentSpec& s);
void from_json(const nlohmann::json& j, ExperimentSpec& s);

}  // namespace spoofbench::harness
