#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spoofbench/dataio/manifest.hpp"

namespace spoofbench::dataio {

class UnwritableDirectory : public Error {
 public:
  explicit UnwritableDirectory(const std::filesystem::path& p)
      : Error("cannot write to directory: " + p.string()) {}
};

// Waveform of one synthetic clip; exposed for tests and oracles.
// Bonafide clips are harmonic tone complexes with slow amplitude
// modulation; spoof clips are band-limited noise with a rising tilt.
std::vector<float> synthesize_clip(Label label, std::uint64_t clip_seed);

// Writes n_clips 16 kHz PCM16 WAVs of 1-6 s to out_dir and returns the
// manifest (split tag train). Exactly round(n_clips * balance) entries are
// bonafide. Output bytes depend only on (n_clips, balance, seed).
DatasetManifest generate_synthetic_corpus(std::size_t n_clips, double balance,
                                          std::uint64_t seed,
                                          const std::filesystem::path& out_dir);

}  // namespace spoofbench::dataio
