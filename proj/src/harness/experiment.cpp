#include "spoofbench/harness/experiment.hpp"

#include <nlohmann/json.hpp>

namespace spoofbench::harness {

std::string ExperimentConfig::label() const {
  return std::string(models::to_string(model)) + "_" + std::string(features::to_string(feature)) +
         "_" + std::string(features::to_string(length));
}

bool compatible(models::ModelId model, features::FeatureKind feature) {
  return (models::required_input(model) == models::InputKind::raw) ==
         (feature == features::FeatureKind::raw);
}

std::vector<ExperimentConfig> expand_grid(const ExperimentSpec& spec,
                                          std::vector<std::string>* excluded) {
  std::vector<ExperimentConfig> out;
  for (auto m : spec.models) {
    for (auto f : spec.features) {
      if (!compatible(m, f)) {
        if (excluded) {
          excluded->push_back(std::string(models::to_string(m)) + " x " +
                              std::string(features::to_string(f)));
        }
        continue;
      }
      for (auto l : spec.lengths) out.push_back({m, f, l});
    }
  }
  if (out.empty() || spec.seeds.empty()) throw EmptyGrid("experiment grid is empty");
  return out;
}

ExperimentSpec full_grid_spec() {
  ExperimentSpec s;
  s.models.assign(models::kAllModels.begin(), models::kAllModels.end());
  s.features = {features::FeatureKind::cqtspec, features::FeatureKind::logspec,
                features::FeatureKind::melspec, features::FeatureKind::raw};
  s.lengths = {features::LengthMode::full, features::LengthMode::fixed4s};
  s.eval_manifests = {"asvspoof_eval", "itw"};
  return s;
}

void to_json(nlohmann::json& j, const ExperimentSpec& s) {
  std::vector<std::string> models, feats, lengths, splits;
  for (auto m : s.models) models.emplace_back(models::to_string(m));
  for (auto f : s.features) feats.emplace_back(features::to_string(f));
  for (auto l : s.lengths) lengths.emplace_back(features::to_string(l));
  for (auto sp : s.train_splits) splits.emplace_back(dataio::to_string(sp));
  j = {{"models", models},   {"features", feats},         {"lengths", lengths},
       {"seeds", s.seeds},   {"train_splits", splits},    {"eval_manifests", s.eval_manifests}};
}

void from_json(const nlohmann::json& j, ExperimentSpec& s) {
  s = ExperimentSpec{};
  for (const auto& m : j.at("models")) s.models.push_back(models::parse_model_id(m.get<std::string>()));
  for (const auto& f : j.at("features")) {
    s.features.push_back(features::parse_feature_kind(f.get<std::string>()));
  }
  for (const auto& l : j.at("lengths")) {
    s.lengths.push_back(features::parse_length_mode(l.get<std::string>()));
  }
  if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("train_splits")) {
    s.train_splits.clear();
    for (const auto& sp : j.at("train_splits")) s.train_splits.insert(dataio::parse_split(sp.get<std::string>()));
  }
  s.eval_manifests = j.value("eval_manifests", std::vector<std::string>{});
}

}  // namespace spoofbench::harness
