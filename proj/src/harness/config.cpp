#include "spoofbench/harness/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "spoofbench/common/random.hpp"

namespace spoofbench::harness {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

DatasetSource parse_source(const nlohmann::json& j, const std::string& where,
                           dataio::Split default_split) {
  reject_unknown(j, {"format", "protocol", "audio", "split", "extension", "asv_scores"}, where);
  DatasetSource s;
  s.format = j.value("format", std::string("asvspoof"));
  if (s.format != "asvspoof" && s.format != "itw") {
    throw ConfigError(where + ": format must be asvspoof or itw");
  }
  s.protocol = j.at("protocol").get<std::string>();
  s.audio = j.at("audio").get<std::string>();
  s.split = j.contains("split") ? dataio::parse_split(j.at("split").get<std::string>())
                                : (s.format == "itw" ? dataio::Split::itw : default_split);
  s.extension = j.value("extension", std::string(".flac"));
  if (j.contains("asv_scores")) s.asv_scores = j.at("asv_scores").get<std::string>();
  return s;
}

}  // namespace

std::string config_hash(const nlohmann::json& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

std::string HarnessConfig::hash() const { return config_hash(document); }

HarnessConfig parse_config(const nlohmann::json& doc) {
  reject_unknown(doc, {"experiment", "training", "data", "hyperparams", "eval_batch_size",
                       "cache_features"},
                 "config");
  HarnessConfig c;
  c.document = doc;
  try {
    c.experiment = doc.at("experiment").get<ExperimentSpec>();
    auto tj = doc.value("training", nlohmann::json::object());
    c.training = tj.get<training::TrainConfig>();
    if (!tj.contains("train_splits")) c.training.train_splits = c.experiment.train_splits;
    if (c.training.train_splits != c.experiment.train_splits) {
      throw ConfigError("training.train_splits disagrees with experiment.train_splits");
    }
    const auto& data = doc.at("data");
    reject_unknown(data, {"train", "dev", "eval"}, "data");
    c.train = parse_source(data.at("train"), "data.train", dataio::Split::train);
    c.dev = parse_source(data.at("dev"), "data.dev", dataio::Split::dev);
    for (const auto& [name, src] : data.at("eval").items()) {
      c.eval[name] = parse_source(src, "data.eval." + name, dataio::Split::eval);
    }
    if (doc.contains("hyperparams")) {
      for (const auto& [model, hp] : doc.at("hyperparams").items()) {
        models::parse_model_id(model);
        c.hyperparams[model] = hp;
      }
    }
    c.eval_batch_size = doc.value("eval_batch_size", std::size_t{32});
    c.cache_features = doc.value("cache_features", true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& name : c.experiment.eval_manifests) {
    if (!c.eval.count(name)) throw ConfigError("eval manifest '" + name + "' has no data entry");
  }
  if (c.eval_batch_size == 0) throw ConfigError("eval_batch_size must be positive");
  return c;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::filesystem::path resolve_data_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("SPOOFBENCH_DATA_ROOT"); env && *env) return env;
  return std::filesystem::current_path();
}

dataio::DatasetManifest load_dataset(const DatasetSource& source, const std::string& name,
                                     const std::filesystem::path& data_root) {
  const auto protocol = data_root / source.protocol;
  const auto audio = data_root / source.audio;
  if (!std::filesystem::is_regular_file(protocol)) {
    throw DataMissing(name + ": protocol file not found: " + protocol.string());
  }
  if (!std::filesystem::is_directory(audio)) {
    throw DataMissing(name + ": audio directory not found: " + audio.string());
  }
  std::ifstream is(protocol);
  std::stringstream ss;
  ss << is.rdbuf();
  auto m = source.format == "itw"
               ? dataio::parse_itw_manifest(ss.str(), audio)
               : dataio::parse_asvspoof_protocol(ss.str(), audio, source.split, source.extension);
  m.name = name;
  if (source.format == "itw" && source.split != dataio::Split::itw) {
    for (auto& e : m.entries) e.split = source.split;
  }
  return m;
}

models::ModelConfig model_config(const HarnessConfig& config, models::ModelId id,
                                 std::uint64_t seed) {
  auto c = models::ModelConfig::defaults(id, seed);
  if (auto it = config.hyperparams.find(std::string(models::to_string(id)));
      it != config.hyperparams.end()) {
    c.hyperparams = it->second;
  }
  return c;
}

}  // namespace spoofbench::harness
