#include "spoofbench/models/model.hpp"

#include <mutex>

#include "architectures.hpp"
#include "layers.hpp"

namespace spoofbench::models {
namespace {

// manual_seed touches the process-wide generator.
std::mutex& seed_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

torch::Tensor DetectorImpl::drop(const torch::Tensor& x, double p) const {
  if (!is_training() || !dropout_enabled_ || p <= 0.0) return x;
  auto mask = torch::empty_like(x).bernoulli_(
      1.0 - p, generator_.defined() ? std::optional<at::Generator>(generator_) : std::nullopt);
  return x * mask / (1.0 - p);
}

std::int64_t class_index(dataio::Label label) {
  return label == dataio::Label::bonafide ? kBonafideClass : kSpoofClass;
}

Batch make_batch(const std::vector<features::FeatureMatrix>& items,
                 const std::vector<dataio::Label>& labels) {
  if (items.empty()) throw ShapeMismatch("empty batch");
  if (!labels.empty() && labels.size() != items.size()) {
    throw ShapeMismatch("labels do not match batch size");
  }
  Batch b;
  b.kind = features::is_spectral(items.front().kind) ? InputKind::spectral : InputKind::raw;
  const auto bins = items.front().bins;
  std::size_t width = 0;
  for (const auto& m : items) {
    if (m.bins != bins || features::is_spectral(m.kind) != (b.kind == InputKind::spectral)) {
      throw ShapeMismatch("batch mixes feature shapes");
    }
    if (m.frames == 0) throw ShapeMismatch("empty feature matrix " + m.utt_id);
    width = std::max(width, m.frames);
  }
  const auto n = static_cast<std::int64_t>(items.size());
  auto t = torch::empty({n, static_cast<std::int64_t>(bins), static_cast<std::int64_t>(width)});
  auto* out = t.data_ptr<float>();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& m = items[i];
    for (std::size_t r = 0; r < bins; ++r) {
      const float* row = m.values.data() + r * m.frames;
      float* dst = out + (i * bins + r) * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] = row[c % m.frames];
    }
    b.lengths.push_back(static_cast<std::int64_t>(m.frames));
    b.utt_ids.push_back(m.utt_id);
  }
  b.inputs = b.kind == InputKind::raw ? t.squeeze(1) : t;
  if (!labels.empty()) {
    std::vector<std::int64_t> l;
    for (auto x : labels) l.push_back(class_index(x));
    b.labels = torch::tensor(l, torch::kInt64);
  }
  return b;
}

Detector build(const ModelConfig& config) {
  const auto hp = resolve_hyperparams(config);
  std::lock_guard<std::mutex> lock(seed_mutex());
  torch::manual_seed(config.init_seed);
  Detector d;
  switch (config.id) {
    case ModelId::LSTM: d = detail::make_lstm(hp); break;
    case ModelId::LCNN:
    case ModelId::LCNN_ATTENTION:
    case ModelId::LCNN_LSTM: d = detail::make_lcnn(config.id, hp); break;
    case ModelId::MESONET:
    case ModelId::MESOINCEPTION: d = detail::make_mesonet(config.id, hp); break;
    case ModelId::RESNET18: d = detail::make_resnet18(hp); break;
    case ModelId::TRANSFORMER: d = detail::make_transformer(hp); break;
    case ModelId::CRNNSPOOF: d = detail::make_crnnspoof(hp); break;
    case ModelId::RAWNET2: d = detail::make_rawnet2(hp); break;
    case ModelId::RAWPC: d = detail::make_rawpc(hp); break;
    case ModelId::RAWGAT_ST: d = detail::make_rawgat_st(hp); break;
  }
  return d;
}

torch::Tensor forward(DetectorImpl& model, const torch::Tensor& inputs) {
  std::int64_t length = 0;
  if (model.input_kind() == InputKind::spectral) {
    if (inputs.dim() != 3 || inputs.size(1) != static_cast<std::int64_t>(features::kSpectralBins)) {
      throw ShapeMismatch(std::string(to_string(model.id())) + " expects (batch, 513, frames)");
    }
    length = inputs.size(2);
  } else {
    if (inputs.dim() != 2) {
      throw ShapeMismatch(std::string(to_string(model.id())) + " expects (batch, samples)");
    }
    length = inputs.size(1);
  }
  if (inputs.size(0) == 0) throw ShapeMismatch("empty batch");
  if (length < model.min_length()) throw InputTooShort(length, model.min_length());
  return model.forward(inputs.to(torch::kFloat32));
}

torch::Tensor forward(DetectorImpl& model, const Batch& batch) {
  if (batch.kind != model.input_kind()) {
    throw ShapeMismatch(std::string(to_string(model.id())) + " cannot take " +
                        std::string(to_string(batch.kind)) + " input");
  }
  return forward(model, batch.inputs);
}

std::vector<double> score(const torch::Tensor& logits) {
  if (logits.dim() != 2 || logits.size(1) != 2) throw ShapeMismatch("logits must be (batch, 2)");
  auto s = torch::log_softmax(logits.detach().to(torch::kCPU, torch::kFloat64), 1)
               .select(1, kBonafideClass)
               .contiguous();
  return {s.data_ptr<double>(), s.data_ptr<double>() + s.numel()};
}

std::int64_t parameter_count(const DetectorImpl& model) {
  std::int64_t n = 0;
  for (const auto& p : model.parameters()) {
    if (p.requires_grad()) n += p.numel();
  }
  return n;
}

torch::Tensor temporal_mean(const torch::Tensor& h) { return h.mean(1); }

nlohmann::json layer_ledger(const DetectorImpl& model) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : model.named_parameters()) params[p.key()] = p.value().sizes().vec();
  nlohmann::json buffers = nlohmann::json::object();
  for (const auto& b : model.named_buffers()) {
    // BatchNorm step counters carry no shape information.
    if (b.key().ends_with("num_batches_tracked")) continue;
    buffers[b.key()] = b.value().sizes().vec();
  }
  return {{"model", std::string(to_string(model.id()))},
          {"parameters", params},
          {"buffers", buffers},
          {"trainable", parameter_count(model)}};
}

nlohmann::json layer_ledger_all() {
  nlohmann::json all = nlohmann::json::object();
  for (auto id : kAllModels) {
    auto m = build(ModelConfig::defaults(id));
    all[std::string(to_string(id))] = layer_ledger(*m);
  }
  return all;
}

}  // namespace spoofbench::models
