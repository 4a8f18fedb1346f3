#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "spoofbench/features/feature.hpp"
#include "spoofbench/features/length_policy.hpp"
#include "spoofbench/models/model.hpp"

namespace spoofbench::training {

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t kCheckpointSchema = 1;

struct Checkpoint {
  models::ModelConfig model;
  features::FeatureConfig feature;
  features::LengthPolicy policy;
  double best_dev_metric = 0.0;
  std::size_t best_epoch = 0;
  std::uint32_t schema_version = kCheckpointSchema;
  // Parameters then buffers, in module registration order.
  std::vector<std::pair<std::string, torch::Tensor>> state;
};

// Deep copy of a model's parameters and buffers.
std::vector<std::pair<std::string, torch::Tensor>> capture_state(const models::DetectorImpl& model);

// Builds the checkpoint's architecture and loads its state. Throws
// SchemaMismatch when names or shapes disagree.
models::Detector restore(const Checkpoint& checkpoint);
void load_state(models::DetectorImpl& model,
                const std::vector<std::pair<std::string, torch::Tensor>>& state);

// Binary layout (little-endian): "SBCK", u32 schema, u64 header length, a
// JSON header (configs, metrics and tensor table), then the raw tensor
// bytes in table order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spoofbench::training
