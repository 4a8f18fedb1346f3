#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spoofbench/dataio/audio.hpp"

namespace spoofbench::dataio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct WavLayout {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

WavLayout parse_layout(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw UndecodableAudio("not a RIFF/WAVE stream");
  }
  WavLayout layout;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::size_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) {
        throw UndecodableAudio("truncated fmt chunk");
      }
      const std::uint8_t* f = bytes.data() + body;
      layout.format = read_u16(f);
      layout.channels = read_u16(f + 2);
      layout.sample_rate = read_u32(f + 4);
      layout.block_align = read_u16(f + 12);
      layout.bits = read_u16(f + 14);
      if (layout.format == kFormatExtensible) {
        if (size < 40 || body + 40 > bytes.size()) {
          throw UndecodableAudio("truncated WAVE_FORMAT_EXTENSIBLE header");
        }
        layout.format = read_u16(f + 24);  // first two bytes of SubFormat
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      layout.data_offset = body;
      // Streaming writers leave 0 or 0xFFFFFFFF here.
      layout.data_size = std::min(size, bytes.size() - body);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw UndecodableAudio("WAV without fmt chunk");
  if (!have_data) throw UndecodableAudio("WAV without data chunk");
  if (layout.channels == 0 || layout.sample_rate == 0) {
    throw UndecodableAudio("WAV declares zero channels or zero sample rate");
  }
  const bool pcm_ok = layout.format == kFormatPcm &&
                      (layout.bits == 8 || layout.bits == 16 ||
                       layout.bits == 24 || layout.bits == 32);
  const bool float_ok =
      layout.format == kFormatFloat && (layout.bits == 32 || layout.bits == 64);
  if (!pcm_ok && !float_ok) {
    throw UndecodableAudio("unsupported WAV encoding (format " +
                           std::to_string(layout.format) + ", " +
                           std::to_string(layout.bits) + " bits)");
  }
  const std::size_t bytes_per_frame =
      static_cast<std::size_t>(layout.channels) * (layout.bits / 8);
  if (layout.block_align == 0) layout.block_align = static_cast<std::uint16_t>(bytes_per_frame);
  if (layout.block_align < bytes_per_frame) {
    throw UndecodableAudio("WAV block alignment smaller than frame size");
  }
  return layout;
}

}  // namespace

PcmBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  const WavLayout layout = parse_layout(bytes);
  PcmBuffer out;
  out.sample_rate = static_cast<int>(layout.sample_rate);
  out.channels = layout.channels;
  out.bits_per_sample = layout.bits;

  const std::size_t frames = layout.data_size / layout.block_align;
  const std::size_t width = layout.bits / 8;
  out.interleaved.resize(frames * layout.channels);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::uint8_t* frame =
        bytes.data() + layout.data_offset + f * layout.block_align;
    for (std::size_t c = 0; c < layout.channels; ++c) {
      const std::uint8_t* p = frame + c * width;
      double v = 0.0;
      if (layout.format == kFormatPcm) {
        switch (layout.bits) {
          case 8:
            v = (static_cast<int>(p[0]) - 128) / 128.0;
            break;
          case 16:
            v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
            break;
          case 24: {
            std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
            if (s & 0x800000) s |= ~0xFFFFFF;
            v = s / 8388608.0;
            break;
          }
          default:
            v = static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
        }
      } else if (layout.bits == 32) {
        float x;
        std::memcpy(&x, p, 4);
        v = x;
      } else {
        std::memcpy(&v, p, 8);
      }
      if (!std::isfinite(v)) throw UndecodableAudio("non-finite sample in WAV");
      out.interleaved[f * layout.channels + c] =
          static_cast<float>(std::clamp(v, -1.0, 1.0));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_wav_pcm16(std::span<const float> samples,
                                           int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (float s : samples) {
    const double scaled = std::round(std::clamp(static_cast<double>(s), -1.0, 1.0) * 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const float> samples, int sample_rate) {
  const auto bytes = encode_wav_pcm16(samples, sample_rate);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("short write: " + path.string());
}

double wav_header_duration(std::span<const std::uint8_t> bytes) {
  const WavLayout layout = parse_layout(bytes);
  return static_cast<double>(layout.data_size / layout.block_align) /
         layout.sample_rate;
}

}  // namespace spoofbench::dataio
