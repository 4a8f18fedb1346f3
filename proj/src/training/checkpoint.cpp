#include "spoofbench/training/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace spoofbench::training {
namespace {

constexpr char kMagic[4] = {'S', 'B', 'C', 'K'};

std::string dtype_name(const torch::Tensor& t) {
  switch (t.scalar_type()) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    default: throw SchemaMismatch("unsupported tensor dtype in checkpoint");
  }
}

torch::Dtype parse_dtype(const std::string& s) {
  if (s == "float32") return torch::kFloat32;
  if (s == "float64") return torch::kFloat64;
  if (s == "int64") return torch::kInt64;
  throw SchemaMismatch("unknown tensor dtype " + s);
}

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw SchemaMismatch("truncated checkpoint");
  return v;
}

}  // namespace

std::vector<std::pair<std::string, torch::Tensor>> capture_state(const models::DetectorImpl& model) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& p : model.named_parameters()) {
    out.emplace_back(p.key(), p.value().detach().clone().contiguous());
  }
  for (const auto& b : model.named_buffers()) {
    out.emplace_back(b.key(), b.value().detach().clone().contiguous());
  }
  return out;
}

void load_state(models::DetectorImpl& model,
                const std::vector<std::pair<std::string, torch::Tensor>>& state) {
  std::map<std::string, torch::Tensor> targets;
  for (const auto& p : model.named_parameters()) targets[p.key()] = p.value();
  for (const auto& b : model.named_buffers()) targets[b.key()] = b.value();
  if (targets.size() != state.size()) {
    throw SchemaMismatch("checkpoint holds " + std::to_string(state.size()) +
                         " tensors, model expects " + std::to_string(targets.size()));
  }
  torch::NoGradGuard ng;
  for (const auto& [name, t] : state) {
    auto it = targets.find(name);
    if (it == targets.end()) throw SchemaMismatch("unexpected tensor " + name);
    if (it->second.sizes() != t.sizes() || it->second.scalar_type() != t.scalar_type()) {
      throw SchemaMismatch("shape or dtype mismatch for " + name);
    }
    it->second.copy_(t);
  }
}

models::Detector restore(const Checkpoint& checkpoint) {
  auto model = models::build(checkpoint.model);
  load_state(*model, checkpoint.state);
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [name, t] : c.state) {
    table.push_back({{"name", name}, {"dtype", dtype_name(t)}, {"shape", t.sizes().vec()}});
  }
  nlohmann::json header = {
      {"model", c.model},
      {"feature", c.feature},
      {"length_mode", std::string(features::to_string(c.policy.mode))},
      {"target_samples", c.policy.target_samples},
      {"rng_seed", c.policy.rng_seed},
      {"best_dev_metric", c.best_dev_metric},
      {"best_epoch", c.best_epoch},
      {"tensors", table},
  };
  const auto text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write checkpoint " + path.string());
    os.write(kMagic, 4);
    put<std::uint32_t>(os, c.schema_version);
    put<std::uint64_t>(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : c.state) {
      auto cpu = t.contiguous().to(torch::kCPU);
      os.write(static_cast<const char*>(cpu.data_ptr()), static_cast<std::streamsize>(cpu.nbytes()));
    }
    if (!os) throw Error("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw SchemaMismatch(path.string() + " is not a checkpoint");
  }
  Checkpoint c;
  c.schema_version = take<std::uint32_t>(is);
  if (c.schema_version != kCheckpointSchema) {
    throw SchemaMismatch("checkpoint schema " + std::to_string(c.schema_version) +
                         ", expected " + std::to_string(kCheckpointSchema));
  }
  const auto len = take<std::uint64_t>(is);
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw SchemaMismatch("truncated header");
  try {
    const auto h = nlohmann::json::parse(text);
    c.model = h.at("model").get<models::ModelConfig>();
    c.feature = h.at("feature").get<features::FeatureConfig>();
    c.policy.mode = features::parse_length_mode(h.at("length_mode").get<std::string>());
    c.policy.target_samples = h.at("target_samples").get<std::size_t>();
    c.policy.rng_seed = h.at("rng_seed").get<std::uint64_t>();
    c.best_dev_metric = h.at("best_dev_metric").is_null() ? std::nan("")
                                                          : h.at("best_dev_metric").get<double>();
    c.best_epoch = h.at("best_epoch").get<std::size_t>();
    for (const auto& entry : h.at("tensors")) {
      auto t = torch::empty(entry.at("shape").get<std::vector<std::int64_t>>(),
                            torch::TensorOptions().dtype(parse_dtype(entry.at("dtype"))));
      if (!is.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(t.nbytes()))) {
        throw SchemaMismatch("truncated tensor data");
      }
      c.state.emplace_back(entry.at("name").get<std::string>(), t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("bad checkpoint header: ") + e.what());
  }
  return c;
}

}  // namespace spoofbench::training
