#include "spoofbench/models/model_id.hpp"

namespace spoofbench::models {

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::LSTM: return "LSTM";
    case ModelId::LCNN: return "LCNN";
    case ModelId::LCNN_ATTENTION: return "LCNN_ATTENTION";
    case ModelId::LCNN_LSTM: return "LCNN_LSTM";
    case ModelId::MESONET: return "MESONET";
    case ModelId::MESOINCEPTION: return "MESOINCEPTION";
    case ModelId::RESNET18: return "RESNET18";
    case ModelId::TRANSFORMER: return "TRANSFORMER";
    case ModelId::CRNNSPOOF: return "CRNNSPOOF";
    case ModelId::RAWNET2: return "RAWNET2";
    case ModelId::RAWPC: return "RAWPC";
    case ModelId::RAWGAT_ST: return "RAWGAT_ST";
  }
  return "?";
}

ModelId parse_model_id(std::string_view name) {
  for (ModelId id : kAllModels) {
    if (to_string(id) == name) return id;
  }
  throw UnknownModelId(std::string(name));
}

std::string_view to_string(InputKind kind) {
  return kind == InputKind::spectral ? "spectral" : "raw";
}

InputKind parse_input_kind(std::string_view name) {
  if (name == "spectral") return InputKind::spectral;
  if (name == "raw") return InputKind::raw;
  throw IncompatibleConfig("unknown input kind: " + std::string(name));
}

InputKind required_input(ModelId id) {
  switch (id) {
    case ModelId::CRNNSPOOF:
    case ModelId::RAWNET2:
    case ModelId::RAWPC:
    case ModelId::RAWGAT_ST:
      return InputKind::raw;
    default:
      return InputKind::spectral;
  }
}

ModelConfig ModelConfig::defaults(ModelId id, std::uint64_t seed) {
  ModelConfig c;
  c.id = id;
  c.input_kind = required_input(id);
  c.init_seed = seed;
  return c;
}

nlohmann::json default_hyperparams(ModelId id) {
  using nlohmann::json;
  switch (id) {
    case ModelId::LSTM:
      return {{"hidden_dim", 256}, {"n_layers", 3}};
    case ModelId::LCNN:
      return {{"widths", {32, 48, 64, 32, 32}}, {"head_dim", 160}, {"dropout", 0.5}};
    case ModelId::LCNN_ATTENTION:
      return {{"widths", {32, 48, 64, 32, 32}}, {"head_dim", 160}, {"dropout", 0.5}, {"attention_dim", 128}};
    case ModelId::LCNN_LSTM:
      return {{"widths", {32, 48, 64, 32, 32}}, {"head_dim", 160}, {"dropout", 0.5}, {"lstm_hidden", 256}};
    case ModelId::MESONET:
      return {{"widths", {8, 8, 16, 16}}, {"fc_dim", 16}, {"dropout", 0.5}};
    case ModelId::MESOINCEPTION:
      return {{"inception1", {1, 4, 4, 2}}, {"inception2", {2, 4, 4, 2}}, {"widths", {16, 16}},
              {"fc_dim", 16}, {"dropout", 0.5}};
    case ModelId::RESNET18:
      return {{"base_width", 64}};
    case ModelId::TRANSFORMER:
      return {{"hidden_dim", 256}, {"n_attention_layers", 4}, {"n_heads", 4}, {"ff_dim", 1024}, {"dropout", 0.1}};
    case ModelId::CRNNSPOOF:
      return {{"conv_widths", {32, 32, 64, 64, 128}}, {"rnn_hidden", 128}, {"rnn_layers", 2}};
    case ModelId::RAWNET2:
      return {{"sinc_filters", 20}, {"sinc_kernel", 1024}, {"block_widths", {20, 128}}, {"gru_hidden", 1024},
              {"gru_layers", 3}, {"fc_dim", 1024}};
    case ModelId::RAWPC:
      return {{"sinc_filters", 64}, {"sinc_kernel", 128}, {"cell_channels", 16}, {"n_cells", 8},
              {"gru_hidden", 1024}, {"gru_layers", 2}};
    case ModelId::RAWGAT_ST:
      return {{"sinc_filters", 70}, {"sinc_kernel", 128}, {"encoder_widths", {32, 32, 64, 64}},
              {"gat_dims", {32, 16}}, {"pool_ratios", {0.64, 0.81, 0.64}}, {"fusion_nodes", 12},
              {"dropout", 0.2}};
  }
  throw UnknownModelId("?");
}

namespace {

void check_positive(const nlohmann::json& v, const std::string& key) {
  if (v.is_array()) {
    if (v.empty()) throw IncompatibleConfig("hyperparameter '" + key + "' must not be empty");
    for (const auto& e : v) check_positive(e, key);
  } else if (v.is_number()) {
    if (!(v.get<double>() > 0.0) && key != "dropout") {
      throw IncompatibleConfig("hyperparameter '" + key + "' must be positive");
    }
    if (key == "dropout" && (v.get<double>() < 0.0 || v.get<double>() >= 1.0)) {
      throw IncompatibleConfig("dropout must lie in [0, 1)");
    }
  } else {
    throw IncompatibleConfig("hyperparameter '" + key + "' must be numeric");
  }
}

}  // namespace

nlohmann::json resolve_hyperparams(const ModelConfig& config) {
  if (config.input_kind != required_input(config.id)) {
    throw IncompatibleConfig(std::string(to_string(config.id)) + " requires " +
                             std::string(to_string(required_input(config.id))) + " input");
  }
  auto hp = default_hyperparams(config.id);
  if (!config.hyperparams.is_null() && !config.hyperparams.is_object()) {
    throw IncompatibleConfig("hyperparams must be an object");
  }
  for (const auto& [key, value] : config.hyperparams.items()) {
    if (!hp.contains(key)) {
      throw IncompatibleConfig("unknown hyperparameter '" + key + "' for " + std::string(to_string(config.id)));
    }
    if (hp[key].is_array() && (!value.is_array() || value.size() != hp[key].size())) {
      throw IncompatibleConfig("hyperparameter '" + key + "' must be a list of " +
                               std::to_string(hp[key].size()) + " values");
    }
    hp[key] = value;
  }
  for (const auto& [key, value] : hp.items()) check_positive(value, key);
  return hp;
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"id", std::string(to_string(c.id))},
                     {"input_kind", std::string(to_string(c.input_kind))},
                     {"init_seed", c.init_seed},
                     {"hyperparams", c.hyperparams.is_null() ? nlohmann::json::object() : c.hyperparams}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.id = parse_model_id(j.at("id").get<std::string>());
  c.input_kind = j.contains("input_kind") ? parse_input_kind(j.at("input_kind").get<std::string>())
                                          : required_input(c.id);
  c.init_seed = j.value("init_seed", std::uint64_t{0});
  c.hyperparams = j.value("hyperparams", nlohmann::json::object());
}

}  // namespace spoofbench::models
