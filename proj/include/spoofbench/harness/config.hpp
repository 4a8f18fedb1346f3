#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "spoofbench/dataio/manifest.hpp"
#include "spoofbench/harness/experiment.hpp"
#include "spoofbench/training/train.hpp"

namespace spoofbench::harness {

class DataMissing : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Where one dataset lives, relative to the data root.
struct DatasetSource {
  std::string format = "asvspoof";  // "asvspoof" protocol or "itw" metadata CSV
  std::filesystem::path protocol;
  std::filesystem::path audio;
  dataio::Split split = dataio::Split::train;
  std::string extension = ".flac";
  std::optional<std::filesystem::path> asv_scores;  // enables t-DCF
};

struct HarnessConfig {
  ExperimentSpec experiment;
  training::TrainConfig training;
  DatasetSource train;
  DatasetSource dev;
  std::map<std::string, DatasetSource> eval;
  std::map<std::string, nlohmann::json> hyperparams;  // per model id
  std::size_t eval_batch_size = 32;
  bool cache_features = true;
  // The parsed document; its canonical dump is what gets hashed.
  nlohmann::json document;

  std::string hash() const;
};

// Sections: experiment, training, data {train, dev, eval {name: source}},
// optionally hyperparams {MODEL: {...}}, eval_batch_size, cache_features.
HarnessConfig parse_config(const nlohmann::json& doc);
HarnessConfig load_config(const std::filesystem::path& path);

// FNV-1a over the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

// --data-root beats SPOOFBENCH_DATA_ROOT, which beats the working directory.
std::filesystem::path resolve_data_root(const std::optional<std::string>& flag);

// Throws DataMissing when the protocol file or audio directory is absent.
dataio::DatasetManifest load_dataset(const DatasetSource& source, const std::string& name,
                                     const std::filesystem::path& data_root);

models::ModelConfig model_config(const HarnessConfig& config, models::ModelId id,
                                 std::uint64_t seed);

}  // namespace spoofbench::harness
