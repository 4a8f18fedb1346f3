#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spoofbench/common/error.hpp"
#include "spoofbench/dataio/audio.hpp"

namespace spoofbench::features {

enum class FeatureKind { cqtspec, logspec, melspec, raw };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);
inline bool is_spectral(FeatureKind kind) { return kind != FeatureKind::raw; }

inline constexpr std::size_t kSpectralBins = 513;

class ClipTooShort : public Error {
 public:
  ClipTooShort(std::size_t have, std::size_t need)
      : Error("clip of " + std::to_string(have) + " samples is shorter than " +
              std::to_string(need)) {}
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

struct FeatureConfig {
  FeatureKind kind = FeatureKind::logspec;
  std::size_t n_bins = kSpectralBins;
  std::size_t fft_size = 1024;
  std::size_t hop = 256;
  std::string window = "hann";
  double cqt_fmin = 32.7;
  std::size_t cqt_bins_per_octave = 64;
  double log_floor = 1e-8;

  static FeatureConfig defaults(FeatureKind kind);
  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

void to_json(nlohmann::json& j, const FeatureConfig& c);
void from_json(const nlohmann::json& j, FeatureConfig& c);

// bins x frames, row-major (values[bin * frames + frame]).
struct FeatureMatrix {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<float> values;
  FeatureKind kind = FeatureKind::logspec;
  std::string utt_id;

  float at(std::size_t bin, std::size_t frame) const { return values[bin * frames + frame]; }
  float& at(std::size_t bin, std::size_t frame) { return values[bin * frames + frame]; }
};

FeatureMatrix extract(const dataio::AudioClip& clip, const FeatureConfig& config);

// Number of frames extract() yields for a clip of n samples.
std::size_t frame_count(std::size_t n_samples, const FeatureConfig& config);

// Repeats the first columns cyclically until `frames` columns exist.
FeatureMatrix pad_frames_cyclic(const FeatureMatrix& m, std::size_t frames);

}  // namespace spoofbench::features
