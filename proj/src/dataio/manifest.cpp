#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "spoofbench/common/random.hpp"
#include "spoofbench/dataio/manifest.hpp"

namespace spoofbench::dataio {
namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

bool valid_attack_id(std::string_view a) {
  if (a.size() != 3 || a[0] != 'A' || !std::isdigit(static_cast<unsigned char>(a[1])) ||
      !std::isdigit(static_cast<unsigned char>(a[2]))) {
    return false;
  }
  const int n = (a[1] - '0') * 10 + (a[2] - '0');
  return n >= 1 && n <= 19;
}

// RFC 4180 field splitting for one physical line.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::bonafide ? "bonafide" : "spoof";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::eval: return "eval";
    case Split::itw: return "itw";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "eval") return Split::eval;
  if (name == "itw") return Split::itw;
  throw Error("unknown split name: " + std::string(name));
}

std::size_t DatasetManifest::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.label == label; }));
}

DatasetManifest parse_asvspoof_protocol(std::string_view text,
                                        const std::filesystem::path& audio_root,
                                        Split split, std::string_view extension) {
  DatasetManifest manifest;
  manifest.name = "asvspoof2019_la_" + std::string(to_string(split));
  std::unordered_set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const std::size_t line_no = i + 1;
    const auto f = split_ws(lines[i]);
    if (f.size() != 5) {
      throw MalformedLine(line_no, "expected 5 fields, found " + std::to_string(f.size()));
    }
    ManifestEntry e;
    e.speaker_id = std::string(f[0]);
    e.utt_id = std::string(f[1]);
    e.split = split;
    e.path = audio_root / (e.utt_id + std::string(extension));
    if (f[4] == "bonafide") {
      e.label = Label::bonafide;
      if (f[3] != "-") throw MalformedLine(line_no, "bonafide entry carries an attack id");
    } else if (f[4] == "spoof") {
      e.label = Label::spoof;
      if (f[3] != "-") {
        if (!valid_attack_id(f[3])) {
          throw MalformedLine(line_no, "attack id outside A01..A19: " + std::string(f[3]));
        }
        e.attack_id = std::string(f[3]);
      }
    } else {
      throw UnknownKey(line_no, std::string(f[4]));
    }
    if (!seen.insert(e.utt_id).second) throw DuplicateUttId(e.utt_id);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string serialize_asvspoof_protocol(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e.speaker_id;
    out += ' ';
    out += e.utt_id;
    out += " - ";
    out += e.attack_id.value_or("-");
    out += ' ';
    out += to_string(e.label);
    out += '\n';
  }
  return out;
}

DatasetManifest parse_itw_manifest(std::string_view csv,
                                   const std::filesystem::path& audio_root) {
  const auto lines = split_lines(csv);
  std::size_t header_idx = 0;
  while (header_idx < lines.size() && is_blank(lines[header_idx])) ++header_idx;
  if (header_idx == lines.size()) throw MissingColumn("file");
  const auto header = split_csv(lines[header_idx]);
  if (!header) throw MalformedLine(header_idx + 1, "unterminated quote in header");

  auto column = [&](const std::string& name) {
    for (std::size_t c = 0; c < header->size(); ++c) {
      if (trim((*header)[c]) == name) return c;
    }
    throw MissingColumn(name);
  };
  const std::size_t col_file = column("file");
  const std::size_t col_speaker = column("speaker");
  const std::size_t col_label = column("label");
  const std::size_t needed = std::max({col_file, col_speaker, col_label}) + 1;

  DatasetManifest manifest;
  manifest.name = "in_the_wild";
  std::unordered_set<std::string> seen;
  for (std::size_t i = header_idx + 1; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const auto row = split_csv(lines[i]);
    if (!row) throw MalformedLine(i + 1, "unterminated quote");
    if (row->size() < needed) {
      throw MalformedLine(i + 1, "expected at least " + std::to_string(needed) + " fields");
    }
    ManifestEntry e;
    e.utt_id = (*row)[col_file];
    e.speaker_id = (*row)[col_speaker];
    const std::string label = trim((*row)[col_label]);
    if (label == "bona-fide") e.label = Label::bonafide;
    else if (label == "spoof") e.label = Label::spoof;
    else throw UnknownLabel(label);
    e.split = Split::itw;
    e.path = audio_root / e.utt_id;
    if (!seen.insert(e.utt_id).second) throw DuplicateUttId(e.utt_id);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string serialize_itw_manifest(const DatasetManifest& manifest) {
  std::string out = "file,speaker,label\n";
  for (const auto& e : manifest.entries) {
    out += csv_field(e.utt_id);
    out += ',';
    out += csv_field(e.speaker_id);
    out += ',';
    out += e.label == Label::bonafide ? "bona-fide" : "spoof";
    out += '\n';
  }
  return out;
}

void validate(const DatasetManifest& manifest) {
  if (manifest.entries.empty()) throw EmptyManifest("manifest '" + manifest.name + "' is empty");
  std::unordered_set<std::string> seen;
  const Split split = manifest.entries.front().split;
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.utt_id).second) throw DuplicateUttId(e.utt_id);
    if (e.label == Label::bonafide && e.attack_id) {
      throw Error("bonafide entry " + e.utt_id + " carries an attack id");
    }
    if (e.split != split) throw Error("manifest '" + manifest.name + "' mixes split tags");
  }
}

DatasetManifest merge(const std::vector<DatasetManifest>& parts, std::string name) {
  DatasetManifest out;
  out.name = std::move(name);
  std::unordered_set<std::string> seen;
  for (const auto& part : parts) {
    for (const auto& e : part.entries) {
      if (!seen.insert(e.utt_id).second) throw DuplicateUttId(e.utt_id);
      out.entries.push_back(e);
    }
  }
  return out;
}

std::vector<DatasetManifest> split_stratified(const DatasetManifest& manifest,
                                              const std::vector<double>& fractions,
                                              const std::vector<Split>& tags,
                                              std::uint64_t seed) {
  if (fractions.size() != tags.size() || fractions.empty()) {
    throw Error("split_stratified: one tag per fraction required");
  }
  std::vector<DatasetManifest> out(tags.size());
  for (std::size_t k = 0; k < tags.size(); ++k) {
    out[k].name = manifest.name + "_" + std::string(to_string(tags[k]));
  }
  std::vector<std::vector<std::size_t>> assigned(tags.size());
  for (Label label : {Label::bonafide, Label::spoof}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      if (manifest.entries[i].label == label) idx.push_back(i);
    }
    RandomStream rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
    shuffle(idx.begin(), idx.end(), rng);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      std::size_t take = k + 1 == tags.size()
                             ? idx.size() - pos
                             : static_cast<std::size_t>(std::floor(fractions[k] * idx.size()));
      take = std::min(take, idx.size() - pos);
      assigned[k].insert(assigned[k].end(), idx.begin() + pos, idx.begin() + pos + take);
      pos += take;
    }
  }
  for (std::size_t k = 0; k < tags.size(); ++k) {
    std::sort(assigned[k].begin(), assigned[k].end());
    for (auto i : assigned[k]) {
      ManifestEntry e = manifest.entries[i];
      e.split = tags[k];
      out[k].entries.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace spoofbench::dataio
