// Native FLAC decoder covering the subset emitted by reference encoders:
// CONSTANT / VERBATIM / FIXED / LPC subframes, Rice and Rice2 residuals,
// wasted bits and all three stereo decorrelation modes. Checksums are
// skipped; the decoder stops at the first undecodable frame header.

#include <cstring>

#include "detail.hpp"
#include "spoofbench/dataio/audio.hpp"

namespace spoofbench::dataio {
namespace {

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes, std::size_t byte_pos = 0)
      : bytes_(bytes), bit_(byte_pos * 8) {}

  std::uint64_t read(unsigned n) {
    std::uint64_t v = 0;
    while (n > 0) {
      require(1);
      const std::size_t byte = bit_ >> 3;
      const unsigned offset = bit_ & 7;
      const unsigned avail = 8 - offset;
      const unsigned take = n < avail ? n : avail;
      const unsigned shift = avail - take;
      const std::uint64_t chunk = (bytes_[byte] >> shift) & ((1u << take) - 1);
      v = (v << take) | chunk;
      bit_ += take;
      n -= take;
    }
    return v;
  }

  std::int64_t read_signed(unsigned n) {
    if (n == 0) return 0;
    const std::uint64_t v = read(n);
    const std::uint64_t sign = std::uint64_t{1} << (n - 1);
    return static_cast<std::int64_t>((v ^ sign)) - static_cast<std::int64_t>(sign);
  }

  std::uint32_t read_unary() {
    std::uint32_t zeros = 0;
    for (;;) {
      require(1);
      const std::size_t byte = bit_ >> 3;
      const unsigned offset = bit_ & 7;
      const std::uint8_t rest = static_cast<std::uint8_t>(bytes_[byte] << offset);
      if (rest == 0) {
        zeros += 8 - offset;
        bit_ += 8 - offset;
        continue;
      }
      const unsigned lead = static_cast<unsigned>(__builtin_clz(rest) - 24);
      zeros += lead;
      bit_ += lead + 1;
      return zeros;
    }
  }

  void align() { bit_ = (bit_ + 7) & ~std::size_t{7}; }
  std::size_t byte_pos() const { return bit_ >> 3; }
  bool at_end() const { return bit_ >= bytes_.size() * 8; }

 private:
  void require(std::size_t bits) const {
    if (bit_ + bits > bytes_.size() * 8) {
      throw UndecodableAudio("FLAC stream truncated");
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t bit_;
};

struct StreamInfo {
  std::uint32_t sample_rate = 0;
  unsigned channels = 0;
  unsigned bits = 0;
  std::uint64_t total_samples = 0;
};

std::size_t skip_id3(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 10 && std::memcmp(bytes.data(), "ID3", 3) == 0) {
    const std::size_t size = (static_cast<std::size_t>(bytes[6] & 0x7F) << 21) |
                             ((bytes[7] & 0x7F) << 14) | ((bytes[8] & 0x7F) << 7) |
                             (bytes[9] & 0x7F);
    return 10 + size;
  }
  return 0;
}

// Returns the byte offset of the first audio frame.
std::size_t read_metadata(std::span<const std::uint8_t> bytes, StreamInfo& info) {
  std::size_t pos = skip_id3(bytes);
  if (bytes.size() < pos + 4 || std::memcmp(bytes.data() + pos, "fLaC", 4) != 0) {
    throw UndecodableAudio("missing fLaC marker");
  }
  pos += 4;
  bool have_info = false;
  for (bool last = false; !last;) {
    if (pos + 4 > bytes.size()) throw UndecodableAudio("truncated FLAC metadata");
    last = (bytes[pos] & 0x80) != 0;
    const unsigned type = bytes[pos] & 0x7F;
    const std::size_t length = (static_cast<std::size_t>(bytes[pos + 1]) << 16) |
                               (bytes[pos + 2] << 8) | bytes[pos + 3];
    pos += 4;
    if (pos + length > bytes.size()) throw UndecodableAudio("truncated FLAC metadata block");
    if (type == 0) {
      if (length < 34) throw UndecodableAudio("short STREAMINFO block");
      BitReader br(bytes, pos);
      br.read(16);  // min block size
      br.read(16);  // max block size
      br.read(24);  // min frame size
      br.read(24);  // max frame size
      info.sample_rate = static_cast<std::uint32_t>(br.read(20));
      info.channels = static_cast<unsigned>(br.read(3)) + 1;
      info.bits = static_cast<unsigned>(br.read(5)) + 1;
      info.total_samples = br.read(36);
      have_info = true;
    }
    pos += length;
  }
  if (!have_info) throw UndecodableAudio("FLAC stream without STREAMINFO");
  return pos;
}

void decode_residual(BitReader& br, unsigned block_size, unsigned order,
                     std::int64_t* out) {
  const unsigned method = static_cast<unsigned>(br.read(2));
  if (method > 1) throw UndecodableAudio("reserved FLAC residual coding method");
  const unsigned param_bits = method == 0 ? 4 : 5;
  const unsigned escape = method == 0 ? 15 : 31;
  const unsigned partition_order = static_cast<unsigned>(br.read(4));
  const unsigned partitions = 1u << partition_order;
  if ((block_size >> partition_order) < order && partition_order > 0) {
    throw UndecodableAudio("FLAC residual partition smaller than predictor order");
  }
  std::size_t idx = 0;
  for (unsigned p = 0; p < partitions; ++p) {
    unsigned count = block_size >> partition_order;
    if (p == 0) count -= order;
    const unsigned param = static_cast<unsigned>(br.read(param_bits));
    if (param == escape) {
      const unsigned raw_bits = static_cast<unsigned>(br.read(5));
      for (unsigned i = 0; i < count; ++i) out[idx++] = br.read_signed(raw_bits);
    } else {
      for (unsigned i = 0; i < count; ++i) {
        const std::uint64_t q = br.read_unary();
        const std::uint64_t u = (q << param) | br.read(param);
        out[idx++] = static_cast<std::int64_t>(u >> 1) ^ -static_cast<std::int64_t>(u & 1);
      }
    }
  }
}

void decode_subframe(BitReader& br, unsigned block_size, unsigned bps,
                     std::int64_t* out) {
  if (br.read(1) != 0) throw UndecodableAudio("FLAC subframe padding bit set");
  const unsigned type = static_cast<unsigned>(br.read(6));
  unsigned wasted = 0;
  if (br.read(1) != 0) wasted = br.read_unary() + 1;
  if (wasted >= bps) throw UndecodableAudio("FLAC wasted bits exceed sample size");
  bps -= wasted;

  if (type == 0) {
    const std::int64_t v = br.read_signed(bps);
    for (unsigned i = 0; i < block_size; ++i) out[i] = v;
  } else if (type == 1) {
    for (unsigned i = 0; i < block_size; ++i) out[i] = br.read_signed(bps);
  } else if (type >= 8 && type <= 12) {
    const unsigned order = type - 8;
    if (order > block_size) throw UndecodableAudio("FLAC fixed order exceeds block");
    for (unsigned i = 0; i < order; ++i) out[i] = br.read_signed(bps);
    decode_residual(br, block_size, order, out + order);
    for (unsigned i = order; i < block_size; ++i) {
      std::int64_t pred = 0;
      switch (order) {
        case 1: pred = out[i - 1]; break;
        case 2: pred = 2 * out[i - 1] - out[i - 2]; break;
        case 3: pred = 3 * out[i - 1] - 3 * out[i - 2] + out[i - 3]; break;
        case 4: pred = 4 * out[i - 1] - 6 * out[i - 2] + 4 * out[i - 3] - out[i - 4]; break;
        default: break;
      }
      out[i] += pred;
    }
  } else if (type >= 32) {
    const unsigned order = (type & 31) + 1;
    if (order > block_size) throw UndecodableAudio("FLAC LPC order exceeds block");
    for (unsigned i = 0; i < order; ++i) out[i] = br.read_signed(bps);
    const unsigned precision = static_cast<unsigned>(br.read(4)) + 1;
    if (precision == 16) throw UndecodableAudio("invalid FLAC LPC precision");
    const auto shift = static_cast<int>(br.read_signed(5));
    if (shift < 0) throw UndecodableAudio("negative FLAC LPC shift");
    std::int64_t coefs[32];
    for (unsigned i = 0; i < order; ++i) coefs[i] = br.read_signed(precision);
    decode_residual(br, block_size, order, out + order);
    for (unsigned i = order; i < block_size; ++i) {
      std::int64_t acc = 0;
      for (unsigned j = 0; j < order; ++j) acc += coefs[j] * out[i - 1 - j];
      out[i] += acc >> shift;
    }
  } else {
    throw UndecodableAudio("reserved FLAC subframe type " + std::to_string(type));
  }
  if (wasted > 0) {
    for (unsigned i = 0; i < block_size; ++i) out[i] *= (std::int64_t{1} << wasted);
  }
}

std::uint64_t read_utf8_number(BitReader& br) {
  const auto first = static_cast<std::uint32_t>(br.read(8));
  if ((first & 0x80) == 0) return first;
  unsigned extra = 0;
  std::uint32_t mask = 0x40;
  while (first & mask) {
    ++extra;
    mask >>= 1;
  }
  if (extra == 0 || extra > 6) throw UndecodableAudio("bad FLAC frame number encoding");
  std::uint64_t v = first & (mask - 1);
  for (unsigned i = 0; i < extra; ++i) {
    const auto b = static_cast<std::uint32_t>(br.read(8));
    if ((b & 0xC0) != 0x80) throw UndecodableAudio("bad FLAC frame number continuation");
    v = (v << 6) | (b & 0x3F);
  }
  return v;
}

}  // namespace

std::optional<double> flac_header_duration(std::span<const std::uint8_t> bytes) {
  StreamInfo info;
  read_metadata(bytes, info);
  if (info.total_samples == 0 || info.sample_rate == 0) return std::nullopt;
  return static_cast<double>(info.total_samples) / info.sample_rate;
}

PcmBuffer decode_flac(std::span<const std::uint8_t> bytes) {
  StreamInfo info;
  const std::size_t first_frame = read_metadata(bytes, info);
  if (info.channels == 0 || info.channels > 8) throw UndecodableAudio("bad FLAC channel count");

  PcmBuffer out;
  out.sample_rate = static_cast<int>(info.sample_rate);
  out.channels = static_cast<int>(info.channels);
  out.bits_per_sample = static_cast<int>(info.bits);
  if (info.total_samples > 0) out.interleaved.reserve(info.total_samples * info.channels);

  std::vector<std::int64_t> chans[8];
  BitReader br(bytes, first_frame);
  std::uint64_t decoded = 0;
  while (br.byte_pos() + 2 <= bytes.size()) {
    if (info.total_samples > 0 && decoded >= info.total_samples) break;
    if (br.read(14) != 0x3FFE) throw UndecodableAudio("lost FLAC frame sync");
    br.read(1);  // reserved
    br.read(1);  // blocking strategy
    const unsigned bs_code = static_cast<unsigned>(br.read(4));
    const unsigned sr_code = static_cast<unsigned>(br.read(4));
    const unsigned assignment = static_cast<unsigned>(br.read(4));
    const unsigned ss_code = static_cast<unsigned>(br.read(3));
    br.read(1);
    read_utf8_number(br);

    unsigned block_size = 0;
    if (bs_code == 1) block_size = 192;
    else if (bs_code >= 2 && bs_code <= 5) block_size = 576u << (bs_code - 2);
    else if (bs_code == 6) block_size = static_cast<unsigned>(br.read(8)) + 1;
    else if (bs_code == 7) block_size = static_cast<unsigned>(br.read(16)) + 1;
    else if (bs_code >= 8) block_size = 256u << (bs_code - 8);
    else throw UndecodableAudio("reserved FLAC block size");

    std::uint32_t rate = info.sample_rate;
    if (sr_code == 12) rate = static_cast<std::uint32_t>(br.read(8)) * 1000;
    else if (sr_code == 13) rate = static_cast<std::uint32_t>(br.read(16));
    else if (sr_code == 14) rate = static_cast<std::uint32_t>(br.read(16)) * 10;
    else if (sr_code == 15) throw UndecodableAudio("invalid FLAC sample rate code");
    if (sr_code != 0 && sr_code < 12) {
      static constexpr std::uint32_t kRates[] = {0,     88200, 176400, 192000, 8000,  16000,
                                                 22050, 24000, 32000,  44100,  48000, 96000};
      rate = kRates[sr_code];
    }
    if (rate != info.sample_rate) throw UndecodableAudio("FLAC sample rate changes mid-stream");

    unsigned bps = info.bits;
    switch (ss_code) {
      case 0: break;
      case 1: bps = 8; break;
      case 2: bps = 12; break;
      case 4: bps = 16; break;
      case 5: bps = 20; break;
      case 6: bps = 24; break;
      case 7: bps = 32; break;
      default: throw UndecodableAudio("reserved FLAC sample size");
    }
    br.read(8);  // CRC-8

    unsigned n_channels = 0;
    if (assignment <= 7) n_channels = assignment + 1;
    else if (assignment <= 10) n_channels = 2;
    else throw UndecodableAudio("reserved FLAC channel assignment");
    if (n_channels != info.channels) throw UndecodableAudio("FLAC channel count changes mid-stream");

    for (unsigned c = 0; c < n_channels; ++c) {
      chans[c].resize(block_size);
      const bool side = (assignment == 8 && c == 1) || (assignment == 9 && c == 0) ||
                        (assignment == 10 && c == 1);
      decode_subframe(br, block_size, bps + (side ? 1 : 0), chans[c].data());
    }
    br.align();
    br.read(16);  // CRC-16

    auto& a = chans[0];
    auto& b = chans[1];
    for (unsigned i = 0; i < block_size && n_channels == 2; ++i) {
      if (assignment == 8) {
        b[i] = a[i] - b[i];
      } else if (assignment == 9) {
        a[i] = a[i] + b[i];
      } else if (assignment == 10) {
        const std::int64_t mid = (a[i] * 2) | (b[i] & 1);
        const std::int64_t s = b[i];
        a[i] = (mid + s) >> 1;
        b[i] = (mid - s) >> 1;
      }
    }

    std::uint64_t keep = block_size;
    if (info.total_samples > 0) keep = std::min<std::uint64_t>(keep, info.total_samples - decoded);
    const double scale = 1.0 / static_cast<double>(std::int64_t{1} << (bps - 1));
    for (std::uint64_t i = 0; i < keep; ++i) {
      for (unsigned c = 0; c < n_channels; ++c) {
        double v = static_cast<double>(chans[c][i]) * scale;
        v = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
        out.interleaved.push_back(static_cast<float>(v));
      }
    }
    decoded += keep;
  }
  return out;
}

}  // namespace spoofbench::dataio
