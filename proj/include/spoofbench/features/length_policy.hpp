#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spoofbench/common/random.hpp"
#include "spoofbench/dataio/audio.hpp"

namespace spoofbench::features {

enum class LengthMode { fixed4s, full };

std::string_view to_string(LengthMode mode);
LengthMode parse_length_mode(std::string_view name);

inline constexpr std::size_t kFourSecondSamples = 4 * dataio::kCanonicalSampleRate;

struct LengthPolicy {
  LengthMode mode = LengthMode::fixed4s;
  std::size_t target_samples = kFourSecondSamples;
  std::uint64_t rng_seed = 0;

  bool operator==(const LengthPolicy&) const = default;
};

// Repeats `samples` cyclically until exactly n values are produced.
std::vector<float> cyclic_fill(std::span<const float> samples, std::size_t n);

// fixed4s: exactly target_samples, a uniformly drawn contiguous window of
// longer clips or cyclic repetition of shorter ones. full: clips of at
// least target_samples pass through; shorter ones are repeated up to it.
dataio::AudioClip apply_length_policy(const dataio::AudioClip& clip,
                                      const LengthPolicy& policy,
                                      RandomStream& rng);

// Per-utterance stream seeded by hash(policy.rng_seed, utt_id).
RandomStream utterance_stream(const LengthPolicy& policy, std::string_view utt_id);

}  // namespace spoofbench::features
