#pragma once

#include <algorithm>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "spoofbench/dataio/synthetic.hpp"
#include "spoofbench/features/feature.hpp"
#include "spoofbench/models/model.hpp"
#include "spoofbench/training/train.hpp"

namespace spoofbench::acceptance {

// Clip length for the overfit check: 65 spectral frames, just above the
// longest minimum input (MesoNet's 64).
inline constexpr std::size_t kOverfitSamples = 16384;
inline constexpr std::size_t kOverfitClips = 2;

// The loss comes from float32 logits; a one-ULP move of a logit of magnitude
// up to 64 changes it by ~7.6e-6 of its value, so smaller rises are noise.
inline constexpr double kOverfitRiseTolerance = 1e-5;

struct OverfitTrace {
  std::vector<double> losses;  // one per step, before the update
};

// Synthetic clips with alternating labels cut to `samples`, as model input.
inline models::Batch overfit_batch(models::InputKind kind, std::size_t samples,
                                   std::size_t clips = kOverfitClips) {
  std::vector<features::FeatureMatrix> items;
  std::vector<dataio::Label> labels;
  const auto feat = features::FeatureConfig::defaults(kind == models::InputKind::raw
                                                          ? features::FeatureKind::raw
                                                          : features::FeatureKind::logspec);
  for (std::size_t i = 0; i < clips; ++i) {
    const auto label = i % 2 ? dataio::Label::bonafide : dataio::Label::spoof;
    auto wave = dataio::synthesize_clip(label, 1000 + i);
    wave.resize(samples);
    dataio::AudioClip clip{"ovf" + std::to_string(i), wave, dataio::kCanonicalSampleRate};
    items.push_back(features::extract(clip, feat));
    labels.push_back(label);
  }
  return models::make_batch(items, labels);
}

// Adam at lr on one fixed batch with dropout disabled.
inline OverfitTrace overfit(models::ModelId id, std::size_t steps, double lr, std::uint64_t seed,
                            std::size_t samples = kOverfitSamples,
                            const nlohmann::json& hyperparams = nlohmann::json::object()) {
  auto cfg = models::ModelConfig::defaults(id, seed);
  cfg.hyperparams = hyperparams;
  auto model = models::build(cfg);
  model->set_dropout_enabled(false);
  model->train();
  auto batch = overfit_batch(model->input_kind(), samples);
  torch::optim::Adam opt(model->parameters(), torch::optim::AdamOptions(lr));
  OverfitTrace t;
  for (std::size_t s = 0; s < steps; ++s) {
    opt.zero_grad();
    auto loss = training::classification_loss(models::forward(*model, batch), batch.labels);
    t.losses.push_back(loss.item<double>());
    loss.backward();
    opt.step();
  }
  return t;
}

struct Rises {
  std::size_t count = 0;
  double largest = 0.0;  // relative to the previous loss
};

// Steps after `from` whose loss exceeds the previous one by more than the
// tolerance.
inline Rises rises_after(const std::vector<double>& losses, std::size_t from,
                         double tolerance = kOverfitRiseTolerance) {
  Rises r;
  for (std::size_t i = from + 1; i < losses.size(); ++i) {
    const double rel = (losses[i] - losses[i - 1]) / losses[i - 1];
    r.largest = std::max(r.largest, rel);
    if (rel > tolerance) ++r.count;
  }
  return r;
}

}  // namespace spoofbench::acceptance
