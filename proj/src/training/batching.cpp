#include "spoofbench/training/batching.hpp"

#include <algorithm>
#include <numeric>

#include "spoofbench/common/random.hpp"

namespace spoofbench::training {

FeatureSource::FeatureSource(features::FeatureConfig feature, features::LengthPolicy policy,
                             std::optional<std::filesystem::path> cache_dir, bool memoize)
    : feature_(std::move(feature)), policy_(policy), memoize_(memoize) {
  feature_.validate();
  if (cache_dir) disk_.emplace(*cache_dir);
}

features::FeatureMatrix FeatureSource::get(const dataio::ManifestEntry& entry) const {
  if (memoize_) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(entry.utt_id);
    if (it != memo_.end()) return *it->second;
  }
  std::optional<features::FeatureMatrix> m;
  if (disk_) m = disk_->load(entry.utt_id, feature_, policy_);
  if (!m) {
    dataio::AudioClip clip;
    try {
      clip = dataio::load_audio(entry.path, dataio::kCanonicalSampleRate, entry.utt_id);
    } catch (const dataio::MissingFile& e) {
      throw MissingAudio(entry.utt_id, e.what());
    }
    auto rng = features::utterance_stream(policy_, entry.utt_id);
    m = features::extract(features::apply_length_policy(clip, policy_, rng), feature_);
    if (disk_) disk_->store(*m, feature_, policy_);
  }
  if (memoize_) {
    std::lock_guard<std::mutex> lock(mutex_);
    memo_.emplace(entry.utt_id, std::make_shared<const features::FeatureMatrix>(*m));
  }
  return *m;
}

std::vector<std::vector<std::size_t>> plan_batches(const std::vector<std::size_t>& lengths,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch, features::LengthMode mode) {
  if (batch_size == 0) throw Error("batch_size must be positive");
  RandomStream rng(mix_seed(seed, epoch));
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order.begin(), order.end(), rng);
  if (mode == features::LengthMode::full) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    batches.emplace_back(order.begin() + i, order.begin() + std::min(order.size(), i + batch_size));
  }
  if (mode == features::LengthMode::full) shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

std::vector<std::vector<std::size_t>> plan_eval_batches(const std::vector<std::size_t>& lengths,
                                                        std::size_t batch_size,
                                                        features::LengthMode mode) {
  if (batch_size == 0) throw Error("batch_size must be positive");
  std::vector<std::vector<std::size_t>> batches;
  if (mode == features::LengthMode::fixed4s) {
    for (std::size_t i = 0; i < lengths.size(); i += batch_size) {
      std::vector<std::size_t> b;
      for (std::size_t j = i; j < std::min(lengths.size(), i + batch_size); ++j) b.push_back(j);
      batches.push_back(std::move(b));
    }
    return batches;
  }
  std::map<std::size_t, std::size_t> open;  // length -> index of its unfilled batch
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    auto it = open.find(lengths[i]);
    if (it == open.end() || batches[it->second].size() == batch_size) {
      open[lengths[i]] = batches.size();
      batches.push_back({i});
    } else {
      batches[it->second].push_back(i);
    }
  }
  return batches;
}

models::Batch load_batch(const dataio::DatasetManifest& manifest, const FeatureSource& source,
                         const std::vector<std::size_t>& indices) {
  std::vector<features::FeatureMatrix> items;
  std::vector<dataio::Label> labels;
  items.reserve(indices.size());
  for (auto i : indices) {
    items.push_back(source.get(manifest.entries.at(i)));
    labels.push_back(manifest.entries[i].label);
  }
  return models::make_batch(items, labels);
}

std::vector<std::size_t> feature_lengths(const dataio::DatasetManifest& manifest,
                                         const FeatureSource& source) {
  std::vector<std::size_t> out;
  out.reserve(manifest.size());
  for (const auto& e : manifest.entries) out.push_back(source.get(e).frames);
  return out;
}

BatchIterator::BatchIterator(const dataio::DatasetManifest& manifest, const FeatureSource& source,
                             std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch)
    : manifest_(manifest), source_(source) {
  std::vector<std::size_t> lengths(manifest.size(), 0);
  if (source.policy().mode == features::LengthMode::full) lengths = feature_lengths(manifest, source);
  plan_ = plan_batches(lengths, batch_size, seed, epoch, source.policy().mode);
}

std::optional<models::Batch> BatchIterator::next() {
  if (cursor_ >= plan_.size()) return std::nullopt;
  return load_batch(manifest_, source_, plan_[cursor_++]);
}

}  // namespace spoofbench::training
