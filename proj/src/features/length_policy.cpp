#include "spoofbench/features/length_policy.hpp"

namespace spoofbench::features {

std::string_view to_string(LengthMode mode) {
  return mode == LengthMode::fixed4s ? "fixed4s" : "full";
}

LengthMode parse_length_mode(std::string_view name) {
  if (name == "fixed4s" || name == "4s") return LengthMode::fixed4s;
  if (name == "full" || name == "Full") return LengthMode::full;
  throw Error("unknown length mode: " + std::string(name));
}

std::vector<float> cyclic_fill(std::span<const float> samples, std::size_t n) {
  if (samples.empty()) throw Error("cannot repeat an empty signal");
  std::vector<float> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::size_t take = std::min(samples.size(), n - out.size());
    out.insert(out.end(), samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

dataio::AudioClip apply_length_policy(const dataio::AudioClip& clip, const LengthPolicy& policy,
                                      RandomStream& rng) {
  if (clip.samples.empty()) throw Error("apply_length_policy: empty clip " + clip.utt_id);
  const std::size_t n = clip.samples.size();
  const std::size_t target = policy.target_samples;
  dataio::AudioClip out;
  out.utt_id = clip.utt_id;
  out.sample_rate = clip.sample_rate;

  if (n < target) {
    out.samples = cyclic_fill(clip.samples, target);
  } else if (policy.mode == LengthMode::full || n == target) {
    out.samples = clip.samples;
  } else {
    const auto start = static_cast<std::ptrdiff_t>(uniform_index(rng, n - target + 1));
    out.samples.assign(clip.samples.begin() + start,
                       clip.samples.begin() + start + static_cast<std::ptrdiff_t>(target));
  }
  return out;
}

RandomStream utterance_stream(const LengthPolicy& policy, std::string_view utt_id) {
  return RandomStream(utterance_seed(policy.rng_seed, utt_id));
}

}  // namespace spoofbench::features
