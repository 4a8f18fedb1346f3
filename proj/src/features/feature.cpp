#include "spoofbench/features/feature.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "spoofbench/features/spectral.hpp"

namespace spoofbench::features {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::cqtspec: return "cqtspec";
    case FeatureKind::logspec: return "logspec";
    case FeatureKind::melspec: return "melspec";
    case FeatureKind::raw: return "raw";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "cqtspec") return FeatureKind::cqtspec;
  if (name == "logspec") return FeatureKind::logspec;
  if (name == "melspec") return FeatureKind::melspec;
  if (name == "raw") return FeatureKind::raw;
  throw InvalidConfig("unknown feature kind: " + std::string(name));
}

FeatureConfig FeatureConfig::defaults(FeatureKind kind) {
  FeatureConfig c;
  c.kind = kind;
  return c;
}

void FeatureConfig::validate() const {
  if (kind == FeatureKind::raw) return;
  if (n_bins != kSpectralBins) {
    throw InvalidConfig("spectral features must have 513 bins, got " + std::to_string(n_bins));
  }
  if (hop == 0) throw InvalidConfig("hop must be positive");
  if (!(log_floor > 0.0)) throw InvalidConfig("log_floor must be positive");
  if (window != "hann") throw InvalidConfig("unsupported window: " + window);
  if (kind == FeatureKind::logspec && fft_size / 2 + 1 != n_bins) {
    throw InvalidConfig("logspec requires fft_size/2+1 == n_bins");
  }
  if (kind == FeatureKind::melspec && fft_size < 2) throw InvalidConfig("fft_size too small");
  if (kind == FeatureKind::cqtspec) {
    if (!(cqt_fmin > 0.0)) throw InvalidConfig("cqt_fmin must be positive");
    if (cqt_bins_per_octave == 0) throw InvalidConfig("cqt_bins_per_octave must be positive");
  }
}

void to_json(nlohmann::json& j, const FeatureConfig& c) {
  j = nlohmann::json{{"kind", std::string(to_string(c.kind))},
                     {"n_bins", c.n_bins},
                     {"fft_size", c.fft_size},
                     {"hop", c.hop},
                     {"window", c.window},
                     {"cqt_fmin", c.cqt_fmin},
                     {"cqt_bins_per_octave", c.cqt_bins_per_octave},
                     {"log_floor", c.log_floor}};
}

void from_json(const nlohmann::json& j, FeatureConfig& c) {
  c = FeatureConfig::defaults(parse_feature_kind(j.at("kind").get<std::string>()));
  c.n_bins = j.value("n_bins", c.n_bins);
  c.fft_size = j.value("fft_size", c.fft_size);
  c.hop = j.value("hop", c.hop);
  c.window = j.value("window", c.window);
  c.cqt_fmin = j.value("cqt_fmin", c.cqt_fmin);
  c.cqt_bins_per_octave = j.value("cqt_bins_per_octave", c.cqt_bins_per_octave);
  c.log_floor = j.value("log_floor", c.log_floor);
}

std::size_t frame_count(std::size_t n_samples, const FeatureConfig& config) {
  if (config.kind == FeatureKind::raw) return n_samples;
  return 1 + n_samples / config.hop;
}

FeatureMatrix extract(const dataio::AudioClip& clip, const FeatureConfig& config) {
  config.validate();
  FeatureMatrix m;
  m.kind = config.kind;
  m.utt_id = clip.utt_id;
  const std::size_t n = clip.samples.size();

  if (config.kind == FeatureKind::raw) {
    if (n == 0) throw ClipTooShort(0, 1);
    m.bins = 1;
    m.frames = n;
    m.values = clip.samples;
    return m;
  }
  if (clip.sample_rate != dataio::kCanonicalSampleRate) {
    throw InvalidConfig("features expect 16 kHz audio, got " + std::to_string(clip.sample_rate));
  }
  if (n < config.fft_size) throw ClipTooShort(n, config.fft_size);

  std::vector<double> linear;
  std::size_t frames = 1 + n / config.hop;
  if (config.kind == FeatureKind::cqtspec) {
    CqtParams p;
    p.n_bins = config.n_bins;
    p.bins_per_octave = config.cqt_bins_per_octave;
    p.fmin = config.cqt_fmin;
    p.sample_rate = clip.sample_rate;
    p.hop = config.hop;
    linear = cqt_magnitude(clip.samples, p);
  } else {
    const auto window = hann_window(config.fft_size);
    auto mag = stft_magnitude(clip.samples, config.fft_size, config.hop, window);
    if (config.kind == FeatureKind::logspec) {
      linear = std::move(mag);
    } else {
      const std::size_t bins = config.fft_size / 2 + 1;
      const auto fb = mel_filterbank(config.n_bins, config.fft_size, clip.sample_rate, 0.0,
                                     clip.sample_rate / 2.0);
      linear.assign(config.n_bins * frames, 0.0);
      for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t t = 0; t < frames; ++t) {
          const double v = mag[b * frames + t];
          mag[b * frames + t] = v * v;
        }
      }
      for (std::size_t f = 0; f < config.n_bins; ++f) {
        const double* w = &fb[f * bins];
        double* row = &linear[f * frames];
        for (std::size_t b = 0; b < bins; ++b) {
          if (w[b] == 0.0) continue;
          const double* power = &mag[b * frames];
          for (std::size_t t = 0; t < frames; ++t) row[t] += w[b] * power[t];
        }
      }
    }
  }

  m.bins = config.n_bins;
  m.frames = frames;
  m.values.resize(linear.size());
  for (std::size_t i = 0; i < linear.size(); ++i) {
    m.values[i] = static_cast<float>(std::log(linear[i] + config.log_floor));
  }
  return m;
}

FeatureMatrix pad_frames_cyclic(const FeatureMatrix& m, std::size_t frames) {
  if (frames < m.frames) throw Error("pad_frames_cyclic: target shorter than input");
  if (frames == m.frames) return m;
  FeatureMatrix out;
  out.bins = m.bins;
  out.frames = frames;
  out.kind = m.kind;
  out.utt_id = m.utt_id;
  out.values.resize(m.bins * frames);
  for (std::size_t b = 0; b < m.bins; ++b) {
    for (std::size_t t = 0; t < frames; ++t) {
      out.values[b * frames + t] = m.values[b * m.frames + t % m.frames];
    }
  }
  return out;
}

}  // namespace spoofbench::features
