#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spoofbench/dataio/manifest.hpp"
#include "spoofbench/metrics/scores.hpp"
#include "spoofbench/training/batching.hpp"
#include "spoofbench/training/checkpoint.hpp"

namespace spoofbench::training {

using dataio::EmptyManifest;

class IncompatibleConfigs : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

enum class Scheduler { plateau_halving, none };
enum class StopCriterion { dev_loss, dev_eer };

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  Scheduler scheduler = Scheduler::plateau_halving;
  std::size_t scheduler_patience = 2;
  double scheduler_factor = 0.5;
  double lr_floor = 1e-6;
  std::set<dataio::Split> train_splits = {dataio::Split::train};
  StopCriterion stop_on = StopCriterion::dev_loss;
  bool dropout = true;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double dev_eer = 0.0;  // NaN when the dev set lacks a class
  double lr = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
};

nlohmann::json to_json_line(const EpochRecord& r);

// Counts consecutive epochs without a strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
  // Returns true when training should stop after this epoch.
  bool observe(double value);
  std::size_t best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  std::size_t epochs_seen() const { return epoch_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t bad_ = 0;
  double best_ = 0.0;
};

// Multiplies the rate by factor after `patience` epochs without a strict
// improvement, never going below floor.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, std::size_t patience, double floor)
      : lr_(lr), factor_(factor), patience_(patience), floor_(floor) {}
  double observe(double value);
  double lr() const { return lr_; }

 private:
  double lr_, factor_;
  std::size_t patience_;
  double floor_;
  std::size_t bad_ = 0;
  bool seen_ = false;
  double best_ = 0.0;
};

// Mean cross-entropy of log-softmax outputs, computed in double.
torch::Tensor classification_loss(const torch::Tensor& logits, const torch::Tensor& labels);

struct TrainOptions {
  std::optional<std::filesystem::path> log_path;  // JSON lines, one per epoch
  std::function<void(const EpochRecord&)> on_epoch;
  // Shared sources avoid recomputing features across runs.
  const FeatureSource* train_source = nullptr;
  const FeatureSource* dev_source = nullptr;
};

struct TrainResult {
  Checkpoint checkpoint;
  TrainHistory history;
};

TrainResult train(const models::ModelConfig& model_cfg, const features::FeatureConfig& feat_cfg,
                  const features::LengthPolicy& policy, const dataio::DatasetManifest& train_set,
                  const dataio::DatasetManifest& dev_set, const TrainConfig& cfg,
                  const TrainOptions& options = {});

struct EvalOutput {
  std::vector<metrics::ScoreRecord> records;  // manifest order
  double mean_loss = 0.0;
};

// Scores every entry in evaluation mode.
EvalOutput score_manifest(models::DetectorImpl& model, const dataio::DatasetManifest& manifest,
                          const FeatureSource& source, std::size_t batch_size = 32);

// Uses the checkpoint's stored feature and length configuration; `seed`
// overrides the stored window seed when given.
std::vector<metrics::ScoreRecord> evaluate(const Checkpoint& checkpoint,
                                           const dataio::DatasetManifest& manifest,
                                           std::optional<std::uint64_t> seed = std::nullopt,
                                           std::size_t batch_size = 32,
                                           const FeatureSource* source = nullptr);

}  // namespace spoofbench::training
