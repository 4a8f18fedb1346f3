#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spoofbench/common/random.hpp"
#include "spoofbench/dataio/audio.hpp"
#include "spoofbench/dataio/synthetic.hpp"

namespace spoofbench::dataio {
namespace {

constexpr double kRate = kCanonicalSampleRate;
constexpr std::size_t kSpeakers = 10;

std::vector<float> tone_complex(std::size_t n, RandomStream& rng) {
  const double f0 = uniform(rng, 100.0, 300.0);
  const double am_rate = uniform(rng, 2.0, 6.0);
  const double am_depth = uniform(rng, 0.3, 0.6);
  const double am_phase = uniform(rng, 0.0, 2.0 * M_PI);
  const double peak = uniform(rng, 0.3, 0.6);
  double phases[8];
  for (double& p : phases) p = uniform(rng, 0.0, 2.0 * M_PI);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    double s = 0.0;
    for (int h = 1; h <= 8; ++h) {
      if (h * f0 >= 7000.0) break;
      s += std::sin(2.0 * M_PI * h * f0 * t + phases[h - 1]) / h;
    }
    y[i] = s * (1.0 + am_depth * std::sin(2.0 * M_PI * am_rate * t + am_phase));
  }
  for (auto& v : y) v += 1e-3 * standard_normal(rng);
  const double max_abs = std::max(1e-9, std::abs(*std::max_element(
      y.begin(), y.end(), [](double a, double b) { return std::abs(a) < std::abs(b); })));
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(y[i] / max_abs * peak);
  return out;
}

std::vector<float> tilted_noise(std::size_t n, RandomStream& rng) {
  const double emphasis = uniform(rng, 0.85, 0.97);
  const double rms_target = uniform(rng, 0.05, 0.12);
  // RBJ low-pass biquad at 7 kHz, Q = 1/sqrt(2).
  const double w0 = 2.0 * M_PI * 7000.0 / kRate;
  const double alpha = std::sin(w0) / (2.0 * M_SQRT1_2);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  const double b0 = (1.0 - c) / 2.0 / a0, b1 = (1.0 - c) / a0, b2 = b0;
  const double a1 = -2.0 * c / a0, a2 = (1.0 - alpha) / a0;

  std::vector<double> y(n);
  double prev = 0.0, x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = standard_normal(rng);
    const double tilted = w - emphasis * prev;
    prev = w;
    const double v = b0 * tilted + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = tilted;
    y2 = y1;
    y1 = v;
    y[i] = v;
  }
  double energy = 0.0;
  for (double v : y) energy += v * v;
  const double gain = rms_target / std::sqrt(std::max(energy / n, 1e-18));
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(std::clamp(y[i] * gain, -1.0, 1.0));
  return out;
}

}  // namespace

std::vector<float> synthesize_clip(Label label, std::uint64_t clip_seed) {
  RandomStream rng(clip_seed);
  const double seconds = uniform(rng, 1.0, 6.0);
  const auto n = static_cast<std::size_t>(std::llround(seconds * kRate));
  return label == Label::bonafide ? tone_complex(n, rng) : tilted_noise(n, rng);
}

DatasetManifest generate_synthetic_corpus(std::size_t n_clips, double balance,
                                          std::uint64_t seed,
                                          const std::filesystem::path& out_dir) {
  if (n_clips < 2) throw Error("synthetic corpus needs at least 2 clips");
  if (!(balance > 0.0 && balance < 1.0)) throw Error("balance must lie in (0, 1)");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw UnwritableDirectory(out_dir);

  const auto n_bona = static_cast<std::size_t>(std::llround(n_clips * balance));
  std::vector<Label> labels(n_clips, Label::spoof);
  std::fill_n(labels.begin(), std::min(n_bona, n_clips), Label::bonafide);
  RandomStream order_rng(mix_seed(seed, 0x5eed));
  shuffle(labels.begin(), labels.end(), order_rng);

  DatasetManifest manifest;
  manifest.name = "synthetic";
  for (std::size_t i = 0; i < n_clips; ++i) {
    char utt[32];
    std::snprintf(utt, sizeof utt, "SYN_%05zu", i);
    char spk[16];
    std::snprintf(spk, sizeof spk, "SYN_S%02zu", i % kSpeakers);
    ManifestEntry e;
    e.utt_id = utt;
    e.speaker_id = spk;
    e.label = labels[i];
    e.split = Split::train;
    e.path = out_dir / (e.utt_id + ".wav");
    const auto samples = synthesize_clip(e.label, mix_seed(seed, i + 1));
    try {
      write_wav_pcm16(e.path, samples, kCanonicalSampleRate);
    } catch (const Error&) {
      throw UnwritableDirectory(out_dir);
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

}  // namespace spoofbench::dataio
