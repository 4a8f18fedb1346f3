// Architectures over (B, 513, frames) spectra.
#include "architectures.hpp"
#include "layers.hpp"

#include <cmath>

namespace spoofbench::models::detail {
namespace {

class LstmDetector : public DetectorImpl {
 public:
  explicit LstmDetector(const nlohmann::json& hp) : DetectorImpl(ModelId::LSTM, hp) {
    const auto hidden = hp.at("hidden_dim").get<std::int64_t>();
    lstm_ = register_module(
        "lstm", nn::LSTM(nn::LSTMOptions(features::kSpectralBins, hidden)
                             .num_layers(hp.at("n_layers").get<std::int64_t>())
                             .batch_first(true)));
    fc_ = register_module("fc", nn::Linear(hidden, 2));
  }

  std::int64_t min_length() const override { return 1; }

  torch::Tensor frame_features(torch::Tensor x) override {
    return std::get<0>(lstm_->forward(x.transpose(1, 2)));
  }

  torch::Tensor forward(torch::Tensor x) override {
    return fc_(temporal_mean(frame_features(x)));
  }

 private:
  nn::LSTM lstm_{nullptr};
  nn::Linear fc_{nullptr};
};

// Five conv/MFM/pool/BN blocks; (B, 513, T) -> (B, T / 32, D).
struct LcnnTrunkImpl : nn::Module {
  explicit LcnnTrunkImpl(const std::vector<std::int64_t>& widths) {
    const std::vector<std::int64_t> kernels = {5, 3, 3, 3, 3};
    std::int64_t in = 1;
    std::int64_t freq = features::kSpectralBins;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const auto k = kernels[std::min(i, kernels.size() - 1)];
      convs.push_back(register_module("conv" + std::to_string(i),
                                      conv2d(in, 2 * widths[i], {k, k}, {k / 2, k / 2})));
      norms.push_back(
          register_module("bn" + std::to_string(i), nn::BatchNorm2d(widths[i])));
      in = widths[i];
      freq /= 2;
    }
    out_dim = in * freq;
    reduction = std::int64_t{1} << widths.size();
  }

  torch::Tensor forward(const torch::Tensor& x) {
    auto h = x.unsqueeze(1);
    for (std::size_t i = 0; i < convs.size(); ++i) {
      h = norms[i](torch::max_pool2d(mfm(convs[i](h)), 2));
    }
    // (B, C, F, T) -> (B, T, C * F)
    return h.permute({0, 3, 1, 2}).flatten(2);
  }

  std::vector<nn::Conv2d> convs;
  std::vector<nn::BatchNorm2d> norms;
  std::int64_t out_dim = 0;
  std::int64_t reduction = 1;
};
TORCH_MODULE(LcnnTrunk);

class LcnnDetector : public DetectorImpl {
 public:
  LcnnDetector(ModelId id, const nlohmann::json& hp) : DetectorImpl(id, hp) {
    trunk_ = register_module("trunk", LcnnTrunk(ints(hp.at("widths"))));
    const auto dim = trunk_->out_dim;
    const auto head = hp.at("head_dim").get<std::int64_t>();
    dropout_ = hp.at("dropout").get<double>();
    if (id == ModelId::LCNN_ATTENTION) {
      attention_ = register_module("attention",
                                   AttentionPool(dim, hp.at("attention_dim").get<std::int64_t>()));
    } else if (id == ModelId::LCNN_LSTM) {
      const auto hidden = hp.at("lstm_hidden").get<std::int64_t>();
      if (2 * hidden != dim) {
        throw IncompatibleConfig("LCNN_LSTM needs 2 * lstm_hidden == trunk width (" +
                                 std::to_string(dim) + ")");
      }
      lstm_ = register_module(
          "lstm", nn::LSTM(nn::LSTMOptions(dim, hidden).batch_first(true).bidirectional(true)));
    }
    if (head % 2 != 0) throw IncompatibleConfig("head_dim must be even for MFM");
    fc1_ = register_module("fc1", nn::Linear(dim, head));
    fc2_ = register_module("fc2", nn::Linear(head / 2, 2));
  }

  std::int64_t min_length() const override { return trunk_->reduction; }

  torch::Tensor frame_features(torch::Tensor x) override {
    if (attention_) return {};
    auto h = trunk_(x);
    if (lstm_) h = h + std::get<0>(lstm_->forward(h));
    return h;
  }

  torch::Tensor forward(torch::Tensor x) override {
    torch::Tensor pooled =
        attention_ ? attention_(trunk_(x)) : temporal_mean(frame_features(x));
    return fc2_(drop(mfm(fc1_(pooled)), dropout_));
  }

 private:
  LcnnTrunk trunk_{nullptr};
  AttentionPool attention_{nullptr};
  nn::LSTM lstm_{nullptr};
  nn::Linear fc1_{nullptr}, fc2_{nullptr};
  double dropout_ = 0.0;
};

// Parallel 1x1 and dilated 3x3 branches, concatenated, then BN and pooling.
struct InceptionImpl : nn::Module {
  InceptionImpl(std::int64_t in, const std::vector<std::int64_t>& w) {
    b1 = register_module("b1", conv2d(in, w[0], {1, 1}, {0, 0}));
    for (int i = 1; i <= 3; ++i) {
      reduce.push_back(
          register_module("reduce" + std::to_string(i), conv2d(in, w[i], {1, 1}, {0, 0})));
      spread.push_back(register_module(
          "spread" + std::to_string(i),
          nn::Conv2d(nn::Conv2dOptions(w[i], w[i], 3).padding(i).dilation(i))));
    }
    out = w[0] + w[1] + w[2] + w[3];
    bn = register_module("bn", nn::BatchNorm2d(out));
  }

  torch::Tensor forward(const torch::Tensor& x) {
    std::vector<torch::Tensor> parts = {b1(x)};
    for (std::size_t i = 0; i < reduce.size(); ++i) parts.push_back(spread[i](reduce[i](x)));
    return torch::max_pool2d(bn(torch::relu(torch::cat(parts, 1))), 2);
  }

  nn::Conv2d b1{nullptr};
  std::vector<nn::Conv2d> reduce, spread;
  nn::BatchNorm2d bn{nullptr};
  std::int64_t out = 0;
};
TORCH_MODULE(Inception);

class MesoDetector : public DetectorImpl {
 public:
  MesoDetector(ModelId id, const nlohmann::json& hp) : DetectorImpl(id, hp) {
    const auto widths = ints(hp.at("widths"));
    std::int64_t in = 1;
    std::size_t next = 0;
    std::vector<std::int64_t> kernels = {3, 5, 5, 5};
    if (id == ModelId::MESOINCEPTION) {
      inc1_ = register_module("inception1", Inception(1, ints(hp.at("inception1"))));
      inc2_ = register_module("inception2", Inception(inc1_->out, ints(hp.at("inception2"))));
      in = inc2_->out;
      kernels = {5, 5};
      pools_ = {2, 2, 2, 4};
      next = 2;
    } else {
      pools_ = {2, 2, 2, 4};
    }
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const auto k = kernels[i];
      convs_.push_back(register_module("conv" + std::to_string(i),
                                       conv2d(in, widths[i], {k, k}, {k / 2, k / 2})));
      norms_.push_back(register_module("bn" + std::to_string(i), nn::BatchNorm2d(widths[i])));
      in = widths[i];
    }
    first_pool_ = next;
    std::int64_t freq = features::kSpectralBins;
    reduction_ = 1;
    for (auto p : pools_) {
      freq /= p;
      reduction_ *= p;
    }
    dropout_ = hp.at("dropout").get<double>();
    const auto fc_dim = hp.at("fc_dim").get<std::int64_t>();
    fc1_ = register_module("fc1", nn::Linear(in * freq, fc_dim));
    fc2_ = register_module("fc2", nn::Linear(fc_dim, 2));
  }

  std::int64_t min_length() const override { return reduction_; }

  torch::Tensor frame_features(torch::Tensor x) override {
    auto h = x.unsqueeze(1);
    if (inc1_) h = inc2_(inc1_(h));
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      const auto p = pools_[first_pool_ + i];
      h = torch::max_pool2d(norms_[i](torch::relu(convs_[i](h))), p);
    }
    return h.permute({0, 3, 1, 2}).flatten(2);
  }

  torch::Tensor forward(torch::Tensor x) override {
    auto h = drop(temporal_mean(frame_features(x)), dropout_);
    h = torch::leaky_relu(fc1_(h), 0.1);
    return fc2_(drop(h, dropout_));
  }

 private:
  Inception inc1_{nullptr}, inc2_{nullptr};
  std::vector<nn::Conv2d> convs_;
  std::vector<nn::BatchNorm2d> norms_;
  std::vector<std::int64_t> pools_;
  std::size_t first_pool_ = 0;
  std::int64_t reduction_ = 1;
  nn::Linear fc1_{nullptr}, fc2_{nullptr};
  double dropout_ = 0.0;
};

struct BasicBlockImpl : nn::Module {
  BasicBlockImpl(std::int64_t in, std::int64_t out, std::int64_t stride) {
    conv1 = register_module("conv1", conv2d(in, out, {3, 3}, {1, 1}, {stride, stride}, false));
    bn1 = register_module("bn1", nn::BatchNorm2d(out));
    conv2 = register_module("conv2", conv2d(out, out, {3, 3}, {1, 1}, {1, 1}, false));
    bn2 = register_module("bn2", nn::BatchNorm2d(out));
    if (stride != 1 || in != out) {
      down_conv = register_module("down_conv",
                                  conv2d(in, out, {1, 1}, {0, 0}, {stride, stride}, false));
      down_bn = register_module("down_bn", nn::BatchNorm2d(out));
    }
  }

  torch::Tensor forward(const torch::Tensor& x) {
    auto h = torch::relu(bn1(conv1(x)));
    h = bn2(conv2(h));
    auto skip = down_conv ? down_bn(down_conv(x)) : x;
    return torch::relu(h + skip);
  }

  nn::Conv2d conv1{nullptr}, conv2{nullptr}, down_conv{nullptr};
  nn::BatchNorm2d bn1{nullptr}, bn2{nullptr}, down_bn{nullptr};
};
TORCH_MODULE(BasicBlock);

class ResNet18Detector : public DetectorImpl {
 public:
  explicit ResNet18Detector(const nlohmann::json& hp) : DetectorImpl(ModelId::RESNET18, hp) {
    const auto w = hp.at("base_width").get<std::int64_t>();
    stem_ = register_module("stem", conv2d(1, w, {7, 7}, {3, 3}, {2, 2}, false));
    stem_bn_ = register_module("stem_bn", nn::BatchNorm2d(w));
    std::int64_t in = w;
    for (int stage = 0; stage < 4; ++stage) {
      const auto out = w << stage;
      for (int b = 0; b < 2; ++b) {
        const auto stride = (stage > 0 && b == 0) ? 2 : 1;
        blocks_.push_back(register_module(
            "layer" + std::to_string(stage + 1) + "_" + std::to_string(b),
            BasicBlock(in, out, stride)));
        in = out;
      }
    }
    fc_ = register_module("fc", nn::Linear(in, 2));
  }

  // Two stride-2 stem stages and three strided stages.
  std::int64_t min_length() const override { return 32; }

  torch::Tensor forward(torch::Tensor x) override {
    auto h = torch::relu(stem_bn_(stem_(x.unsqueeze(1))));
    h = torch::max_pool2d(h, 3, 2, 1);
    for (auto& b : blocks_) h = b(h);
    return fc_(h.mean({2, 3}));
  }

 private:
  nn::Conv2d stem_{nullptr};
  nn::BatchNorm2d stem_bn_{nullptr};
  std::vector<BasicBlock> blocks_;
  nn::Linear fc_{nullptr};
};

// Post-norm encoder layer; dropout goes through the owner's toggle.
struct EncoderLayerImpl : nn::Module {
  EncoderLayerImpl(std::int64_t dim, std::int64_t heads, std::int64_t ff) {
    attn = register_module("attn", nn::MultiheadAttention(nn::MultiheadAttentionOptions(dim, heads)));
    ff1 = register_module("ff1", nn::Linear(dim, ff));
    ff2 = register_module("ff2", nn::Linear(ff, dim));
    norm1 = register_module("norm1", nn::LayerNorm(nn::LayerNormOptions({dim})));
    norm2 = register_module("norm2", nn::LayerNorm(nn::LayerNormOptions({dim})));
  }

  template <typename Drop>
  torch::Tensor forward(const torch::Tensor& x, const Drop& drop) {  // (T, B, D)
    auto a = std::get<0>(attn->forward(x, x, x));
    auto h = norm1(x + drop(a));
    auto f = ff2(drop(torch::relu(ff1(h))));
    return norm2(h + drop(f));
  }

  nn::MultiheadAttention attn{nullptr};
  nn::Linear ff1{nullptr}, ff2{nullptr};
  nn::LayerNorm norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(EncoderLayer);

class TransformerDetector : public DetectorImpl {
 public:
  explicit TransformerDetector(const nlohmann::json& hp) : DetectorImpl(ModelId::TRANSFORMER, hp) {
    dim_ = hp.at("hidden_dim").get<std::int64_t>();
    const auto heads = hp.at("n_heads").get<std::int64_t>();
    if (dim_ % heads != 0) throw IncompatibleConfig("hidden_dim must be divisible by n_heads");
    if (dim_ % 2 != 0) throw IncompatibleConfig("hidden_dim must be even");
    dropout_ = hp.at("dropout").get<double>();
    input_ = register_module("input", nn::Linear(features::kSpectralBins, dim_));
    const auto layers = hp.at("n_attention_layers").get<std::int64_t>();
    for (std::int64_t i = 0; i < layers; ++i) {
      layers_.push_back(register_module("layer" + std::to_string(i),
                                        EncoderLayer(dim_, heads, hp.at("ff_dim").get<std::int64_t>())));
    }
    fc_ = register_module("fc", nn::Linear(dim_, 2));
  }

  std::int64_t min_length() const override { return 1; }

  torch::Tensor frame_features(torch::Tensor x) override {
    auto h = input_(x.transpose(1, 2));  // (B, T, D)
    h = drop(h + positions(h.size(1), h.options()), dropout_).transpose(0, 1);
    auto d = [this](const torch::Tensor& t) { return drop(t, dropout_); };
    for (auto& l : layers_) h = l->forward(h, d);
    return h.transpose(0, 1);
  }

  torch::Tensor forward(torch::Tensor x) override {
    return fc_(temporal_mean(frame_features(x)));
  }

 private:
  torch::Tensor positions(std::int64_t t, const torch::TensorOptions& opt) const {
    auto pos = torch::arange(t, opt).unsqueeze(1);
    auto i = torch::arange(0, dim_, 2, opt);
    auto freq = torch::exp(i * (-std::log(10000.0) / static_cast<double>(dim_)));
    auto pe = torch::zeros({t, dim_}, opt);
    pe.index_put_({torch::indexing::Slice(), torch::indexing::Slice(0, torch::indexing::None, 2)},
                  torch::sin(pos * freq));
    pe.index_put_({torch::indexing::Slice(), torch::indexing::Slice(1, torch::indexing::None, 2)},
                  torch::cos(pos * freq));
    return pe.unsqueeze(0);
  }

  std::int64_t dim_ = 0;
  double dropout_ = 0.0;
  nn::Linear input_{nullptr}, fc_{nullptr};
  std::vector<EncoderLayer> layers_;
};

}  // namespace

Detector make_lstm(const nlohmann::json& hp) { return std::make_shared<LstmDetector>(hp); }
Detector make_lcnn(ModelId id, const nlohmann::json& hp) {
  return std::make_shared<LcnnDetector>(id, hp);
}
Detector make_mesonet(ModelId id, const nlohmann::json& hp) {
  return std::make_shared<MesoDetector>(id, hp);
}
Detector make_resnet18(const nlohmann::json& hp) { return std::make_shared<ResNet18Detector>(hp); }
Detector make_transformer(const nlohmann::json& hp) {
  return std::make_shared<TransformerDetector>(hp);
}

}  // namespace spoofbench::models::detail
