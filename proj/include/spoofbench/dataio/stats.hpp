#pragma once

#include <map>
#include <string>
#include <unordered_map>

#include "spoofbench/dataio/manifest.hpp"

namespace spoofbench::dataio {

class MissingDuration : public Error {
 public:
  explicit MissingDuration(const std::string& utt)
      : Error("no duration for utterance: " + utt), utt_id_(utt) {}
  const std::string& utt_id() const { return utt_id_; }

 private:
  std::string utt_id_;
};

struct CorpusStats {
  std::size_t n_speakers = 0;
  double hours_bonafide = 0.0;
  double hours_spoof = 0.0;
  std::size_t n_bonafide = 0;
  std::size_t n_spoof = 0;
  double mean_clip_seconds = 0.0;
};

using DurationMap = std::unordered_map<std::string, double>;

CorpusStats corpus_stats(const DatasetManifest& manifest,
                         const DurationMap& durations);

// Same statistics restricted to each speaker; totals add up to corpus_stats.
std::map<std::string, CorpusStats> per_speaker_stats(
    const DatasetManifest& manifest, const DurationMap& durations);

// Entry counts per attack id ("NONE" for bonafide / unattributed spoofs).
std::map<std::string, std::size_t> attack_counts(
    const DatasetManifest& manifest);

// Reads container headers for every entry.
DurationMap probe_durations(const DatasetManifest& manifest);

}  // namespace spoofbench::dataio
