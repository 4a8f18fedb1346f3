#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "spoofbench/common/error.hpp"

namespace spoofbench::dataio {

inline constexpr int kCanonicalSampleRate = 16000;

class MissingFile : public Error {
 public:
  explicit MissingFile(const std::filesystem::path& p)
      : Error("missing audio file: " + p.string()) {}
};

class UndecodableAudio : public Error {
 public:
  using Error::Error;
};

class ZeroLengthAudio : public Error {
 public:
  explicit ZeroLengthAudio(const std::filesystem::path& p)
      : Error("audio file has no samples: " + p.string()) {}
};

// Decoded mono waveform. Amplitudes are finite and within [-1, 1].
struct AudioClip {
  std::string utt_id;
  std::vector<float> samples;
  int sample_rate = kCanonicalSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Interleaved PCM as it comes out of a container, before mixdown.
struct PcmBuffer {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::vector<float> interleaved;  // channels * frames values in [-1, 1]

  std::size_t frames() const {
    return channels > 0 ? interleaved.size() / channels : 0;
  }
};

PcmBuffer decode_wav(std::span<const std::uint8_t> bytes);
PcmBuffer decode_flac(std::span<const std::uint8_t> bytes);

// Dispatches on the container magic (RIFF/WAVE or fLaC).
PcmBuffer decode_audio(std::span<const std::uint8_t> bytes);

// Band-limited rational resampler (Kaiser-windowed sinc).
std::vector<float> resample(std::span<const float> input, int from_rate,
                            int to_rate);

// Reads, decodes, averages channels to mono and resamples to target_rate.
// utt_id defaults to the file stem.
AudioClip load_audio(const std::filesystem::path& path,
                     int target_rate = kCanonicalSampleRate,
                     std::string utt_id = {});

// Duration in seconds read from the container header without decoding the
// payload where the format allows it.
double probe_duration(const std::filesystem::path& path);

// 16-bit PCM mono WAV.
std::vector<std::uint8_t> encode_wav_pcm16(std::span<const float> samples,
                                           int sample_rate);
void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const float> samples, int sample_rate);

// Decode cache keyed by utt_id. Safe for concurrent readers and writers.
class AudioCache {
 public:
  explicit AudioCache(int target_rate = kCanonicalSampleRate)
      : target_rate_(target_rate) {}

  std::shared_ptr<const AudioClip> get(const std::string& utt_id,
                                       const std::filesystem::path& path);
  std::size_t size() const;
  void clear();

 private:
  int target_rate_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const AudioClip>> clips_;
};

}  // namespace spoofbench::dataio
