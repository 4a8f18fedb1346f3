#include <cstring>
#include <fstream>

#include "detail.hpp"
#include "spoofbench/dataio/audio.hpp"

namespace spoofbench::dataio {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw MissingFile(path);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingFile(path);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

bool has_magic(std::span<const std::uint8_t> bytes, const char* magic, std::size_t at = 0) {
  const std::size_t n = std::strlen(magic);
  return bytes.size() >= at + n && std::memcmp(bytes.data() + at, magic, n) == 0;
}

bool is_flac(std::span<const std::uint8_t> bytes) {
  return has_magic(bytes, "fLaC") || has_magic(bytes, "ID3");
}

}  // namespace

PcmBuffer decode_audio(std::span<const std::uint8_t> bytes) {
  if (has_magic(bytes, "RIFF") && has_magic(bytes, "WAVE", 8)) return decode_wav(bytes);
  if (is_flac(bytes)) return decode_flac(bytes);
  throw UndecodableAudio("unrecognized audio container (expected WAV or FLAC)");
}

AudioClip load_audio(const std::filesystem::path& path, int target_rate,
                     std::string utt_id) {
  const auto bytes = read_file(path);
  PcmBuffer pcm;
  try {
    pcm = decode_audio(bytes);
  } catch (const UndecodableAudio& e) {
    throw UndecodableAudio(path.string() + ": " + e.what());
  }
  const std::size_t frames = pcm.frames();
  if (frames == 0) throw ZeroLengthAudio(path);

  std::vector<float> mono(frames);
  if (pcm.channels == 1) {
    mono = std::move(pcm.interleaved);
  } else {
    for (std::size_t f = 0; f < frames; ++f) {
      double acc = 0.0;
      for (int c = 0; c < pcm.channels; ++c) acc += pcm.interleaved[f * pcm.channels + c];
      mono[f] = static_cast<float>(acc / pcm.channels);
    }
  }

  AudioClip clip;
  clip.utt_id = utt_id.empty() ? path.stem().string() : std::move(utt_id);
  clip.sample_rate = target_rate;
  clip.samples = pcm.sample_rate == target_rate
                     ? std::move(mono)
                     : resample(mono, pcm.sample_rate, target_rate);
  if (clip.samples.empty()) throw ZeroLengthAudio(path);
  return clip;
}

double probe_duration(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (has_magic(bytes, "RIFF")) return wav_header_duration(bytes);
  if (is_flac(bytes)) {
    if (auto d = flac_header_duration(bytes)) return *d;
    const auto pcm = decode_flac(bytes);
    return static_cast<double>(pcm.frames()) / pcm.sample_rate;
  }
  throw UndecodableAudio(path.string() + ": unrecognized audio container");
}

std::shared_ptr<const AudioClip> AudioCache::get(const std::string& utt_id,
                                                 const std::filesystem::path& path) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = clips_.find(utt_id); it != clips_.end()) return it->second;
  }
  // Decode outside the lock; a concurrent duplicate decode is harmless.
  auto clip = std::make_shared<const AudioClip>(load_audio(path, target_rate_, utt_id));
  std::lock_guard lock(mutex_);
  return clips_.emplace(utt_id, std::move(clip)).first->second;
}

std::size_t AudioCache::size() const {
  std::lock_guard lock(mutex_);
  return clips_.size();
}

void AudioCache::clear() {
  std::lock_guard lock(mutex_);
  clips_.clear();
}

}  // namespace spoofbench::dataio
