#include <set>

#include "spoofbench/dataio/audio.hpp"
#include "spoofbench/dataio/stats.hpp"

namespace spoofbench::dataio {

CorpusStats corpus_stats(const DatasetManifest& manifest, const DurationMap& durations) {
  CorpusStats stats;
  std::set<std::string> speakers;
  double seconds_bona = 0.0;
  double seconds_spoof = 0.0;
  for (const auto& e : manifest.entries) {
    const auto it = durations.find(e.utt_id);
    if (it == durations.end()) throw MissingDuration(e.utt_id);
    speakers.insert(e.speaker_id);
    if (e.label == Label::bonafide) {
      ++stats.n_bonafide;
      seconds_bona += it->second;
    } else {
      ++stats.n_spoof;
      seconds_spoof += it->second;
    }
  }
  stats.n_speakers = speakers.size();
  stats.hours_bonafide = seconds_bona / 3600.0;
  stats.hours_spoof = seconds_spoof / 3600.0;
  const std::size_t n = stats.n_bonafide + stats.n_spoof;
  stats.mean_clip_seconds = n > 0 ? (seconds_bona + seconds_spoof) / n : 0.0;
  return stats;
}

std::map<std::string, CorpusStats> per_speaker_stats(const DatasetManifest& manifest,
                                                     const DurationMap& durations) {
  std::map<std::string, DatasetManifest> by_speaker;
  for (const auto& e : manifest.entries) by_speaker[e.speaker_id].entries.push_back(e);
  std::map<std::string, CorpusStats> out;
  for (const auto& [speaker, part] : by_speaker) out[speaker] = corpus_stats(part, durations);
  return out;
}

std::map<std::string, std::size_t> attack_counts(const DatasetManifest& manifest) {
  std::map<std::string, std::size_t> out;
  for (const auto& e : manifest.entries) ++out[e.attack_id.value_or("NONE")];
  return out;
}

DurationMap probe_durations(const DatasetManifest& manifest) {
  DurationMap out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out[e.utt_id] = probe_duration(e.path);
  return out;
}

}  // namespace spoofbench::dataio
