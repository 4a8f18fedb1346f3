#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spoofbench/dataio/manifest.hpp"

namespace spoofbench::metrics {

using dataio::Label;

// Unit of evaluation. Higher score means more bonafide.
struct ScoreRecord {
  std::string utt_id;
  double score = 0.0;
  Label label = Label::bonafide;

  bool operator==(const ScoreRecord&) const = default;
};

class SingleClassInput : public Error {
 public:
  SingleClassInput() : Error("scores must contain both bonafide and spoof records") {}
};

// "<utt_id> <score>" per line, full double precision.
std::string format_score_file(std::span<const ScoreRecord> records);
void write_score_file(const std::filesystem::path& path, std::span<const ScoreRecord> records);
std::vector<std::pair<std::string, double>> parse_score_file(std::string_view text);
std::vector<std::pair<std::string, double>> read_score_file(const std::filesystem::path& path);

// Attaches manifest labels; throws when an utterance is not in the manifest.
std::vector<ScoreRecord> join_labels(const std::vector<std::pair<std::string, double>>& scores,
                                     const dataio::DatasetManifest& manifest);

void split_by_label(std::span<const ScoreRecord> records, std::vector<double>& bonafide,
                    std::vector<double>& spoof);

}  // namespace spoofbench::metrics
