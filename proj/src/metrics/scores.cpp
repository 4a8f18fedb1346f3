#include "spoofbench/metrics/scores.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace spoofbench::metrics {

std::string format_score_file(std::span<const ScoreRecord> records) {
  std::string out;
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, " %.17g\n", r.score);
    out += r.utt_id;
    out += buf;
  }
  return out;
}

void write_score_file(const std::filesystem::path& path, std::span<const ScoreRecord> records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write score file " + path.string());
  os << format_score_file(records);
}

std::vector<std::pair<std::string, double>> parse_score_file(std::string_view text) {
  std::vector<std::pair<std::string, double>> out;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string utt, score_text, extra;
    if (!(ls >> utt)) continue;
    if (!(ls >> score_text) || (ls >> extra)) {
      throw Error("score file line " + std::to_string(line_no) + ": expected '<utt_id> <score>'");
    }
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(score_text, &used);
      if (used != score_text.size()) throw std::invalid_argument(score_text);
    } catch (const std::exception&) {
      throw Error("score file line " + std::to_string(line_no) + ": bad score '" + score_text + "'");
    }
    out.emplace_back(std::move(utt), v);
  }
  return out;
}

std::vector<std::pair<std::string, double>> read_score_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read score file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_score_file(ss.str());
}

std::vector<ScoreRecord> join_labels(const std::vector<std::pair<std::string, double>>& scores,
                                     const dataio::DatasetManifest& manifest) {
  std::unordered_map<std::string, Label> labels;
  labels.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) labels.emplace(e.utt_id, e.label);
  std::vector<ScoreRecord> out;
  out.reserve(scores.size());
  for (const auto& [utt, score] : scores) {
    auto it = labels.find(utt);
    if (it == labels.end()) throw Error("scored utterance not in manifest: " + utt);
    out.push_back({utt, score, it->second});
  }
  return out;
}

void split_by_label(std::span<const ScoreRecord> records, std::vector<double>& bonafide,
                    std::vector<double>& spoof) {
  bonafide.clear();
  spoof.clear();
  for (const auto& r : records) {
    (r.label == Label::bonafide ? bonafide : spoof).push_back(r.score);
  }
}

}  // namespace spoofbench::metrics
