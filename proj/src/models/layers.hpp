#pragma once

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

#include "spoofbench/models/model.hpp"

namespace spoofbench::models::detail {

namespace nn = torch::nn;

inline std::vector<std::int64_t> ints(const nlohmann::json& v) {
  return v.get<std::vector<std::int64_t>>();
}

// Max-feature-map: splits channels in two halves and keeps the maximum.
inline torch::Tensor mfm(const torch::Tensor& x, std::int64_t dim = 1) {
  auto halves = x.chunk(2, dim);
  return torch::max(halves[0], halves[1]);
}

inline nn::Conv2d conv2d(std::int64_t in, std::int64_t out, std::vector<std::int64_t> k,
                         std::vector<std::int64_t> pad, std::vector<std::int64_t> stride = {1, 1},
                         bool bias = true) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, k).padding(pad).stride(stride).bias(bias));
}

inline nn::Conv1d conv1d(std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t pad,
                         std::int64_t stride = 1, std::int64_t dilation = 1, bool bias = true) {
  return nn::Conv1d(
      nn::Conv1dOptions(in, out, k).padding(pad).stride(stride).dilation(dilation).bias(bias));
}

// Additive attention over steps of (B, T, D); returns (B, D).
struct AttentionPoolImpl : nn::Module {
  AttentionPoolImpl(std::int64_t dim, std::int64_t attn_dim)
      : proj(register_module("proj", nn::Linear(dim, attn_dim))),
        score(register_module("score", nn::Linear(nn::LinearOptions(attn_dim, 1).bias(false)))) {}

  torch::Tensor forward(const torch::Tensor& h) {
    auto w = torch::softmax(score(torch::tanh(proj(h))), 1);  // (B, T, 1)
    return (w * h).sum(1);
  }

  nn::Linear proj, score;
};
TORCH_MODULE(AttentionPool);

// Sinc band-pass bank with fixed mel-spaced cutoffs and a Hamming window.
// The filters are a buffer, not parameters.
struct SincBankImpl : nn::Module {
  SincBankImpl(std::int64_t n_filters, std::int64_t kernel, double sample_rate = 16000.0);
  torch::Tensor forward(const torch::Tensor& x) {  // (B, 1, L) -> (B, F, L - K + 1)
    return torch::conv1d(x, filters);
  }
  std::int64_t kernel_size() const { return filters.size(2); }

  torch::Tensor filters;
};
TORCH_MODULE(SincBank);

// Repeats frames of a (B, D, T) or (B, T) tensor cyclically to length n.
torch::Tensor repeat_to(const torch::Tensor& x, std::int64_t n);

}  // namespace spoofbench::models::detail
