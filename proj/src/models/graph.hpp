#pragma once

#include <torch/torch.h>

#include <functional>

namespace spoofbench::models::detail {

using DropFn = std::function<torch::Tensor(const torch::Tensor&)>;

// Attention over all node pairs of (B, N, D), projected to (B, N, out).
struct GraphAttentionImpl : torch::nn::Module {
  GraphAttentionImpl(std::int64_t in, std::int64_t out);
  // drop is applied to the input nodes.
  torch::Tensor forward(const torch::Tensor& x, const DropFn& drop);
  // Row-stochastic (B, N, N) attention weights.
  torch::Tensor attention(const torch::Tensor& x);

  torch::nn::Linear att_proj{nullptr}, with_att{nullptr}, without_att{nullptr};
  torch::Tensor att_weight;
  torch::nn::BatchNorm1d bn{nullptr};
};
TORCH_MODULE(GraphAttention);

// Keeps the top ratio of nodes by a learned sigmoid score, scaled by it.
struct GraphPoolImpl : torch::nn::Module {
  GraphPoolImpl(std::int64_t dim, double ratio);
  // drop is applied to the scorer input only.
  torch::Tensor forward(const torch::Tensor& h, const DropFn& drop);
  std::int64_t kept(std::int64_t nodes) const;

  torch::nn::Linear proj{nullptr};
  double ratio;
};
TORCH_MODULE(GraphPool);

}  // namespace spoofbench::models::detail
