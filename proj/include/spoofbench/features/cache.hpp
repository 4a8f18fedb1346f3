#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "spoofbench/features/feature.hpp"
#include "spoofbench/features/length_policy.hpp"

namespace spoofbench::features {

// On-disk matrix cache, one file per (utt_id, feature config, length policy).
// File layout (little-endian): magic "SBFM", u32 version, u32 kind tag,
// u64 bins, u64 frames, then bins*frames float32 values.
class FeatureCache {
 public:
  explicit FeatureCache(std::filesystem::path dir);

  std::filesystem::path path_for(const std::string& utt_id, const FeatureConfig& config,
                                 const LengthPolicy& policy) const;

  std::optional<FeatureMatrix> load(const std::string& utt_id, const FeatureConfig& config,
                                    const LengthPolicy& policy) const;
  void store(const FeatureMatrix& m, const FeatureConfig& config,
             const LengthPolicy& policy) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

std::vector<std::uint8_t> encode_matrix(const FeatureMatrix& m);
FeatureMatrix decode_matrix(std::span<const std::uint8_t> bytes, std::string utt_id);

}  // namespace spoofbench::features
