#pragma once

#include <torch/torch.h>

#include <memory>
#include <string>
#include <vector>

#include "spoofbench/dataio/manifest.hpp"
#include "spoofbench/features/feature.hpp"
#include "spoofbench/models/model_id.hpp"

namespace spoofbench::models {

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InputTooShort : public Error {
 public:
  InputTooShort(std::int64_t have, std::int64_t min_length)
      : Error("input of length " + std::to_string(have) + " is shorter than the model minimum " +
              std::to_string(min_length)),
        min_length_(min_length) {}
  std::int64_t min_length() const { return min_length_; }

 private:
  std::int64_t min_length_;
};

// Class indices of the two-way output.
inline constexpr std::int64_t kSpoofClass = 0;
inline constexpr std::int64_t kBonafideClass = 1;

// Spectral inputs are (batch, 513, frames); raw inputs are (batch, samples).
struct Batch {
  torch::Tensor inputs;
  std::vector<std::int64_t> lengths;  // frames (spectral) or samples (raw) before padding
  std::vector<std::string> utt_ids;
  torch::Tensor labels;  // int64 class indices; undefined when unlabeled
  InputKind kind = InputKind::spectral;

  std::size_t size() const { return utt_ids.size(); }
};

// Stacks matrices into one batch, repeating shorter items cyclically to the
// longest item's width.
Batch make_batch(const std::vector<features::FeatureMatrix>& items,
                 const std::vector<dataio::Label>& labels = {});

std::int64_t class_index(dataio::Label label);

class DetectorImpl : public torch::nn::Module {
 public:
  DetectorImpl(ModelId id, nlohmann::json hyperparams)
      : id_(id), hyperparams_(std::move(hyperparams)) {}

  ModelId id() const { return id_; }
  InputKind input_kind() const { return required_input(id_); }
  const nlohmann::json& hyperparams() const { return hyperparams_; }

  // Shortest accepted input: frames for spectral models, samples for raw.
  virtual std::int64_t min_length() const = 0;

  // Unchecked logits (batch, 2); prefer models::forward().
  virtual torch::Tensor forward(torch::Tensor x) = 0;

  // Per-step features (batch, steps, dim) that the head averages over time;
  // undefined for models whose pooling is not a plain temporal mean.
  virtual torch::Tensor frame_features(torch::Tensor /*x*/) { return {}; }

  // Dropout is active only in training mode and while enabled.
  void set_dropout_enabled(bool on) { dropout_enabled_ = on; }
  bool dropout_enabled() const { return dropout_enabled_; }

  // Dropout masks draw from this generator when set, else from the global
  // one. A private generator keeps concurrent training runs reproducible.
  void set_generator(at::Generator g) { generator_ = std::move(g); }

  // Inverted dropout with probability p.
  torch::Tensor drop(const torch::Tensor& x, double p) const;

 private:
  ModelId id_;
  nlohmann::json hyperparams_;
  bool dropout_enabled_ = true;
  at::Generator generator_;
};

using Detector = std::shared_ptr<DetectorImpl>;

// Fresh parameters drawn from the framework initializers under init_seed.
Detector build(const ModelConfig& config);

// Validates shape and minimum length, then runs the model.
torch::Tensor forward(DetectorImpl& model, const torch::Tensor& inputs);
torch::Tensor forward(DetectorImpl& model, const Batch& batch);

// log-softmax probability of the bonafide class, computed in double.
std::vector<double> score(const torch::Tensor& logits);

std::int64_t parameter_count(const DetectorImpl& model);

// Mean over dim 1 of (batch, steps, dim).
torch::Tensor temporal_mean(const torch::Tensor& h);

// Parameter and buffer shapes with the total trainable count.
nlohmann::json layer_ledger(const DetectorImpl& model);
// Ledger of every architecture at its default configuration.
nlohmann::json layer_ledger_all();

}  // namespace spoofbench::models
