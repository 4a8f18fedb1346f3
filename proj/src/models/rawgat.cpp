// Spectro-temporal graph attention over a sinc/residual encoder.
#include "architectures.hpp"
#include "graph.hpp"
#include "layers.hpp"

namespace spoofbench::models::detail {

GraphAttentionImpl::GraphAttentionImpl(std::int64_t in, std::int64_t out) {
  att_proj = register_module("att_proj", nn::Linear(in, out));
  att_weight = register_parameter("att_weight", torch::empty({out, 1}));
  torch::nn::init::xavier_normal_(att_weight);
  with_att = register_module("with_att", nn::Linear(in, out));
  without_att = register_module("without_att", nn::Linear(in, out));
  bn = register_module("bn", nn::BatchNorm1d(out));
}

torch::Tensor GraphAttentionImpl::attention(const torch::Tensor& x) {
  const auto n = x.size(1);
  // Pairwise elementwise products (B, N, N, D).
  auto pairs = x.unsqueeze(2).expand({-1, -1, n, -1}) * x.unsqueeze(1).expand({-1, n, -1, -1});
  auto a = torch::matmul(torch::tanh(att_proj->forward(pairs)), att_weight);  // (B, N, N, 1)
  return torch::softmax(a, 2).squeeze(-1);
}

torch::Tensor GraphAttentionImpl::forward(const torch::Tensor& x, const DropFn& drop) {
  auto h = drop(x);
  auto att = attention(h);
  h = with_att(torch::matmul(att, h)) + without_att(h);
  h = bn(h.transpose(1, 2)).transpose(1, 2);
  return torch::selu(h);
}

GraphPoolImpl::GraphPoolImpl(std::int64_t dim, double ratio) : ratio(ratio) {
  proj = register_module("proj", nn::Linear(dim, 1));
}

std::int64_t GraphPoolImpl::kept(std::int64_t nodes) const {
  return std::max<std::int64_t>(static_cast<std::int64_t>(nodes * ratio), 1);
}

torch::Tensor GraphPoolImpl::forward(const torch::Tensor& h, const DropFn& drop) {
  auto scores = torch::sigmoid(proj(drop(h)));  // (B, N, 1)
  auto idx = std::get<1>(torch::topk(scores, kept(h.size(1)), 1));
  // Keep the surviving nodes in their original order.
  idx = std::get<0>(torch::sort(idx, 1));
  auto weighted = h * scores;
  return torch::gather(weighted, 1, idx.expand({-1, -1, h.size(2)}));
}

namespace {

struct GatResBlockImpl : nn::Module {
  GatResBlockImpl(std::int64_t in, std::int64_t out, bool first) : first(first) {
    if (!first) bn1 = register_module("bn1", nn::BatchNorm2d(in));
    conv1 = register_module("conv1", conv2d(in, out, {2, 3}, {1, 1}));
    bn2 = register_module("bn2", nn::BatchNorm2d(out));
    conv2 = register_module("conv2", conv2d(out, out, {2, 3}, {0, 1}));
    if (in != out) down = register_module("down", conv2d(in, out, {1, 3}, {0, 1}));
  }

  torch::Tensor forward(const torch::Tensor& x) {
    auto h = first ? x : torch::selu(bn1(x));
    h = conv2(torch::selu(bn2(conv1(h))));
    return torch::max_pool2d(h + (down ? down(x) : x), {1, 3});
  }

  bool first;
  nn::BatchNorm2d bn1{nullptr}, bn2{nullptr};
  nn::Conv2d conv1{nullptr}, conv2{nullptr}, down{nullptr};
};
TORCH_MODULE(GatResBlock);

class RawGatStDetector : public DetectorImpl {
 public:
  explicit RawGatStDetector(const nlohmann::json& hp) : DetectorImpl(ModelId::RAWGAT_ST, hp) {
    sinc_ = register_module("sinc", SincBank(hp.at("sinc_filters").get<std::int64_t>(),
                                             hp.at("sinc_kernel").get<std::int64_t>()));
    first_bn_ = register_module("first_bn", nn::BatchNorm2d(1));
    const auto w = ints(hp.at("encoder_widths"));
    std::int64_t in = 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      encoder_.push_back(
          register_module("encoder" + std::to_string(i), GatResBlock(in, w[i], i == 0)));
      in = w[i];
    }
    reduction_ = 3;
    for (std::size_t i = 0; i < w.size(); ++i) reduction_ *= 3;

    const auto dims = ints(hp.at("gat_dims"));
    const auto ratios = hp.at("pool_ratios").get<std::vector<double>>();
    dropout_ = hp.at("dropout").get<double>();
    gat_spectral_ = register_module("gat_spectral", GraphAttention(in, dims[0]));
    pool_spectral_ = register_module("pool_spectral", GraphPool(dims[0], ratios[0]));
    gat_temporal_ = register_module("gat_temporal", GraphAttention(in, dims[0]));
    pool_temporal_ = register_module("pool_temporal", GraphPool(dims[0], ratios[1]));
    fusion_nodes_ = hp.at("fusion_nodes").get<std::int64_t>();
    gat_fused_ = register_module("gat_fused", GraphAttention(dims[0], dims[1]));
    pool_fused_ = register_module("pool_fused", GraphPool(dims[1], ratios[2]));
    node_proj_ = register_module("node_proj", nn::Linear(dims[1], 1));
    out_ = register_module("out", nn::Linear(pool_fused_->kept(fusion_nodes_), 2));
  }

  std::int64_t min_length() const override { return sinc_->kernel_size() - 1 + reduction_; }

  torch::Tensor forward(torch::Tensor x) override {
    const DropFn d = [this](const torch::Tensor& t) { return drop(t, dropout_); };
    auto h = sinc_(x.unsqueeze(1)).unsqueeze(1);  // (B, 1, F, T)
    h = torch::selu(first_bn_(torch::max_pool2d(torch::abs(h), 3)));
    for (auto& b : encoder_) h = b(h);
    auto a = torch::abs(h);
    // Spectral nodes: one per frequency row, max over time; temporal nodes
    // the other way round. Both are (B, nodes, C).
    auto spectral = std::get<0>(a.max(3)).transpose(1, 2);
    auto temporal = std::get<0>(a.max(2)).transpose(1, 2);
    auto s = pool_spectral_->forward(gat_spectral_->forward(spectral, d), d);
    auto t = pool_temporal_->forward(gat_temporal_->forward(temporal, d), d);
    auto fused = resample_nodes(s) * resample_nodes(t);
    auto g = pool_fused_->forward(gat_fused_->forward(fused, d), d);
    return out_(node_proj_(g).flatten(1));
  }

 private:
  torch::Tensor resample_nodes(const torch::Tensor& h) const {
    return torch::adaptive_avg_pool1d(h.transpose(1, 2), fusion_nodes_).transpose(1, 2);
  }

  SincBank sinc_{nullptr};
  nn::BatchNorm2d first_bn_{nullptr};
  std::vector<GatResBlock> encoder_;
  std::int64_t reduction_ = 1;
  GraphAttention gat_spectral_{nullptr}, gat_temporal_{nullptr}, gat_fused_{nullptr};
  GraphPool pool_spectral_{nullptr}, pool_temporal_{nullptr}, pool_fused_{nullptr};
  std::int64_t fusion_nodes_ = 0;
  double dropout_ = 0.0;
  nn::Linear node_proj_{nullptr}, out_{nullptr};
};

}  // namespace

Detector make_rawgat_st(const nlohmann::json& hp) { return std::make_shared<RawGatStDetector>(hp); }

}  // namespace spoofbench::models::detail
