#pragma once

#include <nlohmann/json.hpp>

#include "spoofbench/models/model.hpp"

namespace spoofbench::models::detail {

// Constructors take fully resolved hyperparameters.
Detector make_lstm(const nlohmann::json& hp);
Detector make_lcnn(ModelId id, const nlohmann::json& hp);
Detector make_mesonet(ModelId id, const nlohmann::json& hp);
Detector make_resnet18(const nlohmann::json& hp);
Detector make_transformer(const nlohmann::json& hp);
Detector make_crnnspoof(const nlohmann::json& hp);
Detector make_rawnet2(const nlohmann::json& hp);
Detector make_rawpc(const nlohmann::json& hp);
Detector make_rawgat_st(const nlohmann::json& hp);

}  // namespace spoofbench::models::detail
