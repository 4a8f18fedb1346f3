#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "spoofbench/common/error.hpp"

namespace spoofbench::models {

enum class ModelId {
  LSTM,
  LCNN,
  LCNN_ATTENTION,
  LCNN_LSTM,
  MESONET,
  MESOINCEPTION,
  RESNET18,
  TRANSFORMER,
  CRNNSPOOF,
  RAWNET2,
  RAWPC,
  RAWGAT_ST,
};

inline constexpr std::array<ModelId, 12> kAllModels = {
    ModelId::LSTM,          ModelId::LCNN,     ModelId::LCNN_ATTENTION, ModelId::LCNN_LSTM,
    ModelId::MESONET,       ModelId::MESOINCEPTION, ModelId::RESNET18,  ModelId::TRANSFORMER,
    ModelId::CRNNSPOOF,     ModelId::RAWNET2,  ModelId::RAWPC,          ModelId::RAWGAT_ST,
};

enum class InputKind { spectral, raw };

class UnknownModelId : public Error {
 public:
  explicit UnknownModelId(const std::string& name) : Error("unknown model id: " + name) {}
};

class IncompatibleConfig : public Error {
 public:
  using Error::Error;
};

std::string_view to_string(ModelId id);
ModelId parse_model_id(std::string_view name);
std::string_view to_string(InputKind kind);
InputKind parse_input_kind(std::string_view name);

// The first eight architectures consume 513 x frames spectra, the last four
// raw waveforms.
InputKind required_input(ModelId id);

struct ModelConfig {
  ModelId id = ModelId::LSTM;
  InputKind input_kind = InputKind::spectral;
  std::uint64_t init_seed = 0;
  // Overrides of the per-architecture defaults (see default_hyperparams).
  nlohmann::json hyperparams = nlohmann::json::object();

  static ModelConfig defaults(ModelId id, std::uint64_t seed = 0);
  bool operator==(const ModelConfig&) const = default;
};

// Reference sizes of each architecture; every key may be overridden.
nlohmann::json default_hyperparams(ModelId id);

// Defaults merged with overrides. Throws IncompatibleConfig for unknown
// keys, non-positive widths or a mismatched input kind.
nlohmann::json resolve_hyperparams(const ModelConfig& config);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace spoofbench::models
