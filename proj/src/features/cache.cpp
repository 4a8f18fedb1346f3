#include "spoofbench/features/cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <thread>
#include <nlohmann/json.hpp>

#include "spoofbench/common/random.hpp"

namespace spoofbench::features {
namespace {

constexpr char kMagic[4] = {'S', 'B', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw Error("feature cache entry truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') c = '_';
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_matrix(const FeatureMatrix& m) {
  static_assert(std::endian::native == std::endian::little, "cache format is little-endian");
  std::vector<std::uint8_t> out;
  out.reserve(28 + m.values.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.kind));
  put<std::uint64_t>(out, m.bins);
  put<std::uint64_t>(out, m.frames);
  const auto* raw = reinterpret_cast<const std::uint8_t*>(m.values.data());
  out.insert(out.end(), raw, raw + m.values.size() * sizeof(float));
  return out;
}

FeatureMatrix decode_matrix(std::span<const std::uint8_t> bytes, std::string utt_id) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error("not a feature cache entry");
  }
  std::size_t pos = 4;
  if (get<std::uint32_t>(bytes, pos) != kVersion) throw Error("feature cache version mismatch");
  FeatureMatrix m;
  m.kind = static_cast<FeatureKind>(get<std::uint32_t>(bytes, pos));
  m.bins = get<std::uint64_t>(bytes, pos);
  m.frames = get<std::uint64_t>(bytes, pos);
  const std::size_t count = m.bins * m.frames;
  if (bytes.size() - pos != count * sizeof(float)) throw Error("feature cache payload size mismatch");
  m.values.resize(count);
  std::memcpy(m.values.data(), bytes.data() + pos, count * sizeof(float));
  m.utt_id = std::move(utt_id);
  return m;
}

FeatureCache::FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path FeatureCache::path_for(const std::string& utt_id,
                                             const FeatureConfig& config,
                                             const LengthPolicy& policy) const {
  const nlohmann::json key = {{"feature", config},
                              {"mode", std::string(to_string(policy.mode))},
                              {"target", policy.target_samples},
                              {"seed", policy.rng_seed}};
  char tag[17];
  std::snprintf(tag, sizeof tag, "%016llx", static_cast<unsigned long long>(fnv1a64(key.dump())));
  return dir_ / std::string(to_string(config.kind)) / (sanitize(utt_id) + "." + tag + ".sbfm");
}

std::optional<FeatureMatrix> FeatureCache::load(const std::string& utt_id,
                                                const FeatureConfig& config,
                                                const LengthPolicy& policy) const {
  const auto path = path_for(utt_id, config, policy);
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(is),
                                  std::istreambuf_iterator<char>()};
  try {
    return decode_matrix(bytes, utt_id);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void FeatureCache::store(const FeatureMatrix& m, const FeatureConfig& config,
                         const LengthPolicy& policy) const {
  const auto path = path_for(m.utt_id, config, policy);
  std::filesystem::create_directories(path.parent_path());
  const auto bytes = encode_matrix(m);
  // Write-then-rename so concurrent readers never observe partial files.
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write feature cache entry " + tmp.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace spoofbench::features
