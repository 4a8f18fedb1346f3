#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "spoofbench/dataio/manifest.hpp"
#include "spoofbench/features/cache.hpp"
#include "spoofbench/features/feature.hpp"
#include "spoofbench/features/length_policy.hpp"
#include "spoofbench/models/model.hpp"

namespace spoofbench::training {

class MissingAudio : public Error {
 public:
  explicit MissingAudio(const std::string& utt_id, const std::string& why = {})
      : Error("missing audio for " + utt_id + (why.empty() ? "" : ": " + why)), utt_id_(utt_id) {}
  const std::string& utt_id() const { return utt_id_; }

 private:
  std::string utt_id_;
};

// Decodes, applies the length policy with the utterance's own random
// stream and extracts features. Results are memoized in memory and, when a
// cache directory is given, on disk. Safe for concurrent callers.
class FeatureSource {
 public:
  FeatureSource(features::FeatureConfig feature, features::LengthPolicy policy,
                std::optional<std::filesystem::path> cache_dir = std::nullopt, bool memoize = true);

  features::FeatureMatrix get(const dataio::ManifestEntry& entry) const;

  const features::FeatureConfig& feature() const { return feature_; }
  const features::LengthPolicy& policy() const { return policy_; }

 private:
  features::FeatureConfig feature_;
  features::LengthPolicy policy_;
  std::optional<features::FeatureCache> disk_;
  bool memoize_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const features::FeatureMatrix>> memo_;
};

// Index groups for one training epoch. The order comes from a stream seeded
// by (seed, epoch). In full mode items are sorted by length into buckets
// so padding stays small, and the bucket order is shuffled.
std::vector<std::vector<std::size_t>> plan_batches(const std::vector<std::size_t>& lengths,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   std::uint64_t epoch, features::LengthMode mode);

// Evaluation groups in manifest order. Full-mode groups only hold items of
// identical length, so a score never depends on its batch neighbours.
std::vector<std::vector<std::size_t>> plan_eval_batches(const std::vector<std::size_t>& lengths,
                                                        std::size_t batch_size,
                                                        features::LengthMode mode);

// Streams the labeled batches of one epoch.
class BatchIterator {
 public:
  BatchIterator(const dataio::DatasetManifest& manifest, const FeatureSource& source,
                std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch = 0);

  std::optional<models::Batch> next();
  std::size_t num_batches() const { return plan_.size(); }

 private:
  const dataio::DatasetManifest& manifest_;
  const FeatureSource& source_;
  std::vector<std::vector<std::size_t>> plan_;
  std::size_t cursor_ = 0;
};

models::Batch load_batch(const dataio::DatasetManifest& manifest, const FeatureSource& source,
                         const std::vector<std::size_t>& indices);

// Width of each entry's feature matrix (frames or samples).
std::vector<std::size_t> feature_lengths(const dataio::DatasetManifest& manifest,
                                         const FeatureSource& source);

}  // namespace spoofbench::training
