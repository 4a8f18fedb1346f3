// Waveform architectures: CRNNSpoof, RawNet2 and RawPC.
#include "architectures.hpp"
#include "layers.hpp"

namespace spoofbench::models::detail {
namespace {

class CrnnDetector : public DetectorImpl {
 public:
  explicit CrnnDetector(const nlohmann::json& hp) : DetectorImpl(ModelId::CRNNSPOOF, hp) {
    const auto widths = ints(hp.at("conv_widths"));
    // First conv is strided; pools shrink the sequence further.
    const std::vector<std::int64_t> kernels = {11, 5, 5, 3, 3};
    const std::vector<std::int64_t> pools = {4, 4, 2, 2, 2};
    std::int64_t in = 1;
    reduction_ = 5;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const auto k = kernels[std::min(i, kernels.size() - 1)];
      const auto stride = i == 0 ? 5 : 1;
      convs_.push_back(register_module("conv" + std::to_string(i),
                                       conv1d(in, widths[i], k, k / 2, stride)));
      norms_.push_back(register_module("bn" + std::to_string(i), nn::BatchNorm1d(widths[i])));
      pools_.push_back(pools[std::min(i, pools.size() - 1)]);
      reduction_ *= pools_.back();
      in = widths[i];
    }
    const auto hidden = hp.at("rnn_hidden").get<std::int64_t>();
    rnn_ = register_module("rnn", nn::LSTM(nn::LSTMOptions(in, hidden)
                                               .num_layers(hp.at("rnn_layers").get<std::int64_t>())
                                               .batch_first(true)
                                               .bidirectional(true)));
    fc_ = register_module("fc", nn::Linear(2 * hidden, 2));
  }

  std::int64_t min_length() const override { return reduction_; }

  torch::Tensor frame_features(torch::Tensor x) override {
    auto h = x.unsqueeze(1);
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      h = torch::max_pool1d(torch::relu(norms_[i](convs_[i](h))), pools_[i]);
    }
    return std::get<0>(rnn_->forward(h.transpose(1, 2)));
  }

  torch::Tensor forward(torch::Tensor x) override {
    return fc_(temporal_mean(frame_features(x)));
  }

 private:
  std::vector<nn::Conv1d> convs_;
  std::vector<nn::BatchNorm1d> norms_;
  std::vector<std::int64_t> pools_;
  std::int64_t reduction_ = 1;
  nn::LSTM rnn_{nullptr};
  nn::Linear fc_{nullptr};
};

// Residual block with filter-wise feature map scaling.
struct RawResBlockImpl : nn::Module {
  RawResBlockImpl(std::int64_t in, std::int64_t out, bool first) : first(first) {
    if (!first) bn1 = register_module("bn1", nn::BatchNorm1d(in));
    conv1 = register_module("conv1", conv1d(in, out, 3, 1));
    bn2 = register_module("bn2", nn::BatchNorm1d(out));
    conv2 = register_module("conv2", conv1d(out, out, 3, 1));
    if (in != out) down = register_module("down", conv1d(in, out, 1, 0));
    attention = register_module("attention", nn::Linear(out, out));
  }

  torch::Tensor forward(const torch::Tensor& x) {
    auto h = first ? x : torch::leaky_relu(bn1(x), 0.3);
    h = conv2(torch::leaky_relu(bn2(conv1(h)), 0.3));
    h = torch::max_pool1d(h + (down ? down(x) : x), 3);
    auto s = torch::sigmoid(attention(h.mean(2))).unsqueeze(2);
    return h * s + s;
  }

  bool first;
  nn::BatchNorm1d bn1{nullptr}, bn2{nullptr};
  nn::Conv1d conv1{nullptr}, conv2{nullptr}, down{nullptr};
  nn::Linear attention{nullptr};
};
TORCH_MODULE(RawResBlock);

class RawNet2Detector : public DetectorImpl {
 public:
  explicit RawNet2Detector(const nlohmann::json& hp) : DetectorImpl(ModelId::RAWNET2, hp) {
    const auto filters = hp.at("sinc_filters").get<std::int64_t>();
    sinc_ = register_module("sinc", SincBank(filters, hp.at("sinc_kernel").get<std::int64_t>()));
    first_bn_ = register_module("first_bn", nn::BatchNorm1d(filters));
    const auto w = ints(hp.at("block_widths"));
    const std::vector<std::pair<std::int64_t, std::int64_t>> shape = {
        {filters, w[0]}, {w[0], w[0]}, {w[0], w[1]}, {w[1], w[1]}, {w[1], w[1]}, {w[1], w[1]}};
    for (std::size_t i = 0; i < shape.size(); ++i) {
      blocks_.push_back(register_module("block" + std::to_string(i),
                                        RawResBlock(shape[i].first, shape[i].second, i == 0)));
    }
    gru_bn_ = register_module("gru_bn", nn::BatchNorm1d(w[1]));
    const auto hidden = hp.at("gru_hidden").get<std::int64_t>();
    gru_ = register_module("gru", nn::GRU(nn::GRUOptions(w[1], hidden)
                                              .num_layers(hp.at("gru_layers").get<std::int64_t>())
                                              .batch_first(true)));
    const auto fc = hp.at("fc_dim").get<std::int64_t>();
    fc1_ = register_module("fc1", nn::Linear(hidden, fc));
    fc2_ = register_module("fc2", nn::Linear(fc, 2));
  }

  // Seven pools of 3 after the sinc convolution.
  std::int64_t min_length() const override { return sinc_->kernel_size() - 1 + 2187; }

  torch::Tensor forward(torch::Tensor x) override {
    auto h = torch::max_pool1d(torch::abs(sinc_(x.unsqueeze(1))), 3);
    h = torch::selu(first_bn_(h));
    for (auto& b : blocks_) h = b(h);
    h = torch::selu(gru_bn_(h)).transpose(1, 2);
    h = std::get<0>(gru_->forward(h)).select(1, -1);
    return fc2_(fc1_(h));
  }

 private:
  SincBank sinc_{nullptr};
  nn::BatchNorm1d first_bn_{nullptr}, gru_bn_{nullptr};
  std::vector<RawResBlock> blocks_;
  nn::GRU gru_{nullptr};
  nn::Linear fc1_{nullptr}, fc2_{nullptr};
};

// Candidate operations of the fixed cell genotype.
enum class Op { skip, max_pool_3, std_conv_3, std_conv_5, dil_conv_3, dil_conv_5 };

struct CellOpImpl : nn::Module {
  CellOpImpl(Op op, std::int64_t c, std::int64_t stride) : op(op), stride(stride) {
    std::int64_t k = 0, dil = 1;
    switch (op) {
      case Op::skip:
        if (stride > 1) {
          conv = register_module("conv", conv1d(c, c, 1, 0, stride, 1, false));
          bn = register_module("bn", nn::BatchNorm1d(c));
        }
        return;
      case Op::max_pool_3: return;
      case Op::std_conv_3: k = 3; break;
      case Op::std_conv_5: k = 5; break;
      case Op::dil_conv_3: k = 3; dil = 2; break;
      case Op::dil_conv_5: k = 5; dil = 2; break;
    }
    conv = register_module("conv", conv1d(c, c, k, dil * (k - 1) / 2, stride, dil, false));
    bn = register_module("bn", nn::BatchNorm1d(c));
  }

  torch::Tensor forward(const torch::Tensor& x) {
    if (op == Op::max_pool_3) return torch::max_pool1d(x, 3, stride, 1);
    if (op == Op::skip && stride == 1) return x;
    return bn(conv(torch::relu(x)));
  }

  Op op;
  std::int64_t stride;
  nn::Conv1d conv{nullptr};
  nn::BatchNorm1d bn{nullptr};
};
TORCH_MODULE(CellOp);

struct Edge {
  Op op;
  int input;
};

// Four nodes, each the sum of two edges; inputs 0 and 1 are the two
// preceding cell outputs.
const std::vector<Edge> kNormalCell = {
    {Op::dil_conv_5, 0}, {Op::std_conv_3, 1}, {Op::std_conv_5, 1}, {Op::skip, 0},
    {Op::dil_conv_3, 2}, {Op::max_pool_3, 1}, {Op::std_conv_3, 3}, {Op::skip, 2},
};
const std::vector<Edge> kReductionCell = {
    {Op::max_pool_3, 0}, {Op::std_conv_5, 1}, {Op::dil_conv_5, 1}, {Op::max_pool_3, 0},
    {Op::skip, 2},       {Op::std_conv_3, 1}, {Op::dil_conv_3, 3}, {Op::std_conv_3, 2},
};

struct CellImpl : nn::Module {
  CellImpl(std::int64_t c_prev_prev, std::int64_t c_prev, std::int64_t c, bool reduction) {
    pre0 = register_module("pre0", conv1d(c_prev_prev, c, 1, 0, 1, 1, false));
    pre0_bn = register_module("pre0_bn", nn::BatchNorm1d(c));
    pre1 = register_module("pre1", conv1d(c_prev, c, 1, 0, 1, 1, false));
    pre1_bn = register_module("pre1_bn", nn::BatchNorm1d(c));
    edges = reduction ? kReductionCell : kNormalCell;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto stride = (reduction && edges[i].input < 2) ? 2 : 1;
      ops.push_back(register_module("op" + std::to_string(i), CellOp(edges[i].op, c, stride)));
    }
  }

  torch::Tensor forward(const torch::Tensor& s0, const torch::Tensor& s1) {
    // s0 comes from one pooling stage earlier; match its length to s1.
    auto a = torch::adaptive_max_pool1d(s0, s1.size(2));
    std::vector<torch::Tensor> states = {pre0_bn(pre0(torch::relu(std::get<0>(a)))),
                                         pre1_bn(pre1(torch::relu(s1)))};
    for (std::size_t n = 0; n < edges.size(); n += 2) {
      states.push_back(ops[n](states[edges[n].input]) + ops[n + 1](states[edges[n + 1].input]));
    }
    return torch::cat(std::vector<torch::Tensor>(states.end() - 4, states.end()), 1);
  }

  nn::Conv1d pre0{nullptr}, pre1{nullptr};
  nn::BatchNorm1d pre0_bn{nullptr}, pre1_bn{nullptr};
  std::vector<Edge> edges;
  std::vector<CellOp> ops;
};
TORCH_MODULE(Cell);

class RawPcDetector : public DetectorImpl {
 public:
  explicit RawPcDetector(const nlohmann::json& hp) : DetectorImpl(ModelId::RAWPC, hp) {
    const auto filters = hp.at("sinc_filters").get<std::int64_t>();
    sinc_ = register_module("sinc", SincBank(filters, hp.at("sinc_kernel").get<std::int64_t>()));
    stem_bn_ = register_module("stem_bn", nn::BatchNorm1d(filters));
    const auto n_cells = hp.at("n_cells").get<std::int64_t>();
    std::int64_t c = hp.at("cell_channels").get<std::int64_t>();
    std::int64_t c_pp = filters, c_p = filters;
    reduction_ = 3;
    for (std::int64_t i = 0; i < n_cells; ++i) {
      const bool reduce = n_cells >= 3 && (i == n_cells / 3 || i == 2 * n_cells / 3);
      if (reduce) {
        c *= 2;
        reduction_ *= 2;
      }
      reduction_ *= 2;
      cells_.push_back(register_module("cell" + std::to_string(i), Cell(c_pp, c_p, c, reduce)));
      c_pp = c_p;
      c_p = 4 * c;
    }
    gru_bn_ = register_module("gru_bn", nn::BatchNorm1d(c_p));
    const auto hidden = hp.at("gru_hidden").get<std::int64_t>();
    gru_ = register_module("gru", nn::GRU(nn::GRUOptions(c_p, hidden)
                                              .num_layers(hp.at("gru_layers").get<std::int64_t>())
                                              .batch_first(true)));
    fc_ = register_module("fc", nn::Linear(hidden, 2));
  }

  std::int64_t min_length() const override { return sinc_->kernel_size() - 1 + reduction_; }

  torch::Tensor forward(torch::Tensor x) override {
    auto h = torch::max_pool1d(torch::abs(sinc_(x.unsqueeze(1))), 3);
    h = torch::leaky_relu(stem_bn_(h), 0.3);
    auto s0 = h, s1 = h;
    for (auto& cell : cells_) {
      auto out = torch::max_pool1d(cell(s0, s1), 2);
      s0 = s1;
      s1 = out;
    }
    h = torch::leaky_relu(gru_bn_(s1), 0.3).transpose(1, 2);
    return fc_(std::get<0>(gru_->forward(h)).select(1, -1));
  }

 private:
  SincBank sinc_{nullptr};
  nn::BatchNorm1d stem_bn_{nullptr}, gru_bn_{nullptr};
  std::vector<Cell> cells_;
  std::int64_t reduction_ = 1;
  nn::GRU gru_{nullptr};
  nn::Linear fc_{nullptr};
};

}  // namespace

Detector make_crnnspoof(const nlohmann::json& hp) { return std::make_shared<CrnnDetector>(hp); }
Detector make_rawnet2(const nlohmann::json& hp) { return std::make_shared<RawNet2Detector>(hp); }
Detector make_rawpc(const nlohmann::json& hp) { return std::make_shared<RawPcDetector>(hp); }

}  // namespace spoofbench::models::detail
