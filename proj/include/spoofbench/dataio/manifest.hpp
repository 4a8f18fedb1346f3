#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoofbench/common/error.hpp"

namespace spoofbench::dataio {

enum class Label { bonafide, spoof };
enum class Split { train, dev, eval, itw };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
Split parse_split(std::string_view name);

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_no, const std::string& why)
      : Error("malformed protocol line " + std::to_string(line_no) + ": " +
              why),
        line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class UnknownKey : public Error {
 public:
  UnknownKey(std::size_t line_no, const std::string& key)
      : Error("unknown protocol key '" + key + "' on line " +
              std::to_string(line_no)) {}
};

class DuplicateUttId : public Error {
 public:
  explicit DuplicateUttId(const std::string& utt)
      : Error("duplicate utterance id: " + utt) {}
};

class MissingColumn : public Error {
 public:
  explicit MissingColumn(const std::string& column)
      : Error("metadata header lacks column: " + column) {}
};

class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(const std::string& value)
      : Error("unknown label value: " + value), value_(value) {}
  const std::string& value() const { return value_; }

 private:
  std::string value_;
};

class EmptyManifest : public Error {
 public:
  using Error::Error;
};

struct ManifestEntry {
  std::string utt_id;
  std::string speaker_id;
  std::optional<std::string> attack_id;  // A01..A19; nullopt == NONE
  Label label = Label::bonafide;
  std::filesystem::path path;
  Split split = Split::train;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::size_t count(Label label) const;
  bool operator==(const DatasetManifest&) const = default;
};

// ASVspoof 2019 CM protocol: "speaker utt_id - attack|- bonafide|spoof".
DatasetManifest parse_asvspoof_protocol(std::string_view text,
                                        const std::filesystem::path& audio_root,
                                        Split split,
                                        std::string_view extension = ".flac");
std::string serialize_asvspoof_protocol(const DatasetManifest& manifest);

// In-the-wild metadata: CSV with header naming file, speaker, label.
DatasetManifest parse_itw_manifest(std::string_view csv,
                                   const std::filesystem::path& audio_root);
std::string serialize_itw_manifest(const DatasetManifest& manifest);

// Throws EmptyManifest / DuplicateUttId / Error when invariants fail.
void validate(const DatasetManifest& manifest);

// Concatenates manifests (e.g. train+dev+eval for the all-splits variant);
// entries keep their own split tags.
DatasetManifest merge(const std::vector<DatasetManifest>& parts,
                      std::string name);

// Stratified split by label into consecutive fractions, re-tagging splits.
std::vector<DatasetManifest> split_stratified(
    const DatasetManifest& manifest, const std::vector<double>& fractions,
    const std::vector<Split>& tags, std::uint64_t seed);

}  // namespace spoofbench::dataio
