#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "graph.hpp"
#include "layers.hpp"
#include "model_helpers.hpp"
#include "spoofbench/models/model.hpp"
#include "test_util.hpp"

using namespace spoofbench;
using namespace spoofbench::models;
using spoofbench::testing::synthetic_input;

namespace {

std::vector<torch::Tensor> flat_parameters(const DetectorImpl& m) {
  std::vector<torch::Tensor> out;
  for (const auto& p : m.parameters()) out.push_back(p.detach().clone());
  return out;
}

// Short inputs that clear every model's minimum length.
std::int64_t short_length(InputKind kind) { return kind == InputKind::spectral ? 96 : 16000; }

class EveryModel : public ::testing::TestWithParam<ModelId> {};

std::string model_name(const ::testing::TestParamInfo<ModelId>& info) {
  return std::string(to_string(info.param));
}

}  // namespace

TEST(ModelId, RoundTripsNames) {
  for (auto id : kAllModels) EXPECT_EQ(parse_model_id(to_string(id)), id);
  EXPECT_THROW(parse_model_id("WAV2VEC"), UnknownModelId);
}

TEST(ModelId, InputKinds) {
  for (std::size_t i = 0; i < kAllModels.size(); ++i) {
    EXPECT_EQ(required_input(kAllModels[i]), i < 8 ? InputKind::spectral : InputKind::raw);
  }
}

TEST(ModelConfig, RawModelRejectsSpectralInput) {
  auto c = ModelConfig::defaults(ModelId::RAWNET2);
  c.input_kind = InputKind::spectral;
  EXPECT_THROW(build(c), IncompatibleConfig);
}

TEST(ModelConfig, RejectsBadHyperparams) {
  auto c = ModelConfig::defaults(ModelId::LCNN);
  c.hyperparams = {{"widths", {32, 48, 0, 32, 32}}};
  EXPECT_THROW(build(c), IncompatibleConfig);
  c.hyperparams = {{"widths", {32, 48}}};
  EXPECT_THROW(build(c), IncompatibleConfig);
  c.hyperparams = {{"n_heads", 4}};
  EXPECT_THROW(build(c), IncompatibleConfig);
  c.hyperparams = {{"dropout", 1.0}};
  EXPECT_THROW(build(c), IncompatibleConfig);
  auto t = ModelConfig::defaults(ModelId::TRANSFORMER);
  t.hyperparams = {{"n_heads", 3}};
  EXPECT_THROW(build(t), IncompatibleConfig);
}

TEST(ModelConfig, JsonRoundTrip) {
  auto c = ModelConfig::defaults(ModelId::MESONET, 42);
  c.hyperparams = {{"fc_dim", 32}};
  nlohmann::json j = c;
  EXPECT_EQ(j.get<ModelConfig>(), c);
}

TEST(ModelBuild, TransformerDimensions) {
  auto m = build(ModelConfig::defaults(ModelId::TRANSFORMER));
  EXPECT_EQ(m->hyperparams().at("hidden_dim"), 256);
  EXPECT_EQ(m->hyperparams().at("n_attention_layers"), 4);
  std::int64_t layers = 0;
  for (const auto& c : m->named_children()) {
    if (c.key().rfind("layer", 0) == 0) ++layers;
  }
  EXPECT_EQ(layers, 4);
}

TEST(ModelBuild, LstmParameterCountGolden) {
  // Counted by hand: per LSTM layer 4 * h * (in + h) weights and two 4h biases.
  const std::int64_t h = 256;
  auto layer = [&](std::int64_t in) { return 4 * h * (in + h) + 8 * h; };
  const std::int64_t analytic = layer(513) + 2 * layer(h) + (h * 2 + 2);
  EXPECT_EQ(analytic, 1842690);
  auto m = build(ModelConfig::defaults(ModelId::LSTM, 1));
  EXPECT_EQ(parameter_count(*m), 1842690);
}

TEST(ModelBuild, WiderIsLarger) {
  auto base = ModelConfig::defaults(ModelId::LSTM);
  auto wide = base;
  wide.hyperparams = {{"hidden_dim", 512}};
  EXPECT_GT(parameter_count(*build(wide)), parameter_count(*build(base)));
  auto lcnn = ModelConfig::defaults(ModelId::LCNN);
  auto lcnn_wide = lcnn;
  lcnn_wide.hyperparams = {{"widths", {64, 96, 128, 64, 64}}, {"head_dim", 320}};
  EXPECT_GT(parameter_count(*build(lcnn_wide)), parameter_count(*build(lcnn)));
}

TEST(ModelBuild, ShippedLedgerMatchesCode) {
  std::ifstream is(SPOOFBENCH_LEDGER_PATH);
  ASSERT_TRUE(is.good());
  auto shipped = nlohmann::json::parse(is);
  EXPECT_EQ(shipped, layer_ledger_all());
  EXPECT_EQ(shipped.at("LSTM").at("trainable"), 1842690);
}

TEST(ModelForward, LcnnShapesAndVariableLength) {
  auto m = build(ModelConfig::defaults(ModelId::LCNN, 3));
  m->eval();
  torch::NoGradGuard ng;
  for (std::int64_t frames : {251, 997}) {
    auto y = forward(*m, synthetic_input(InputKind::spectral, 8, frames));
    EXPECT_EQ(y.sizes(), (std::vector<std::int64_t>{8, 2}));
    EXPECT_TRUE(torch::isfinite(y).all().item<bool>());
  }
}

TEST(ModelForward, RawGatOnFourSeconds) {
  auto m = build(ModelConfig::defaults(ModelId::RAWGAT_ST, 3));
  m->eval();
  torch::NoGradGuard ng;
  auto y = forward(*m, synthetic_input(InputKind::raw, 4, 64000));
  EXPECT_EQ(y.sizes(), (std::vector<std::int64_t>{4, 2}));
  EXPECT_TRUE(torch::isfinite(y).all().item<bool>());
}

TEST(ModelForward, Errors) {
  auto lcnn = build(ModelConfig::defaults(ModelId::LCNN));
  lcnn->eval();
  torch::NoGradGuard ng;
  EXPECT_THROW(forward(*lcnn, torch::zeros({2, 400, 100})), ShapeMismatch);
  EXPECT_THROW(forward(*lcnn, torch::zeros({2, 64000})), ShapeMismatch);
  try {
    forward(*lcnn, torch::zeros({2, 513, 16}));
    FAIL() << "expected InputTooShort";
  } catch (const InputTooShort& e) {
    EXPECT_EQ(e.min_length(), 32);
  }
  auto raw = build(ModelConfig::defaults(ModelId::RAWNET2));
  raw->eval();
  EXPECT_THROW(forward(*raw, torch::zeros({1, 1000})), InputTooShort);
}

TEST(ModelScore, Examples) {
  auto s = score(torch::tensor({{0.0f, 0.0f}, {-10.0f, 10.0f}}));
  EXPECT_NEAR(s[0], std::log(0.5), 1e-12);
  EXPECT_NEAR(s[1], -2.0611536e-9, 1e-15);
  EXPECT_LT(s[1], 0.0);
  auto shifted = score(torch::tensor({{3.5f, 3.5f}, {-6.5f, 13.5f}}));
  EXPECT_NEAR(shifted[0], s[0], 1e-12);
  EXPECT_NEAR(shifted[1], s[1], 1e-14);
  EXPECT_THROW(score(torch::zeros({2, 3})), ShapeMismatch);
}

TEST(ModelScore, HigherBonafideLogitRanksHigher) {
  auto s = score(torch::tensor({{1.0f, 0.0f}, {0.0f, 1.0f}}));
  EXPECT_LT(s[0], s[1]);
}

TEST(Layers, MaxFeatureMap) {
  auto x = torch::tensor({1.0f, -2.0f, 5.0f, 0.5f, 3.0f, -1.0f, 4.0f, 7.0f}).view({1, 8, 1, 1});
  auto y = models::detail::mfm(x);
  EXPECT_EQ(y.size(1), 4);
  auto expect = torch::tensor({3.0f, -1.0f, 5.0f, 7.0f}).view({1, 4, 1, 1});
  EXPECT_TRUE(torch::equal(y, expect));
  auto r = torch::randn({3, 10, 5, 4});
  auto halves = r.chunk(2, 1);
  EXPECT_TRUE(torch::equal(models::detail::mfm(r), torch::max(halves[0], halves[1])));
}

TEST(Layers, SincBankIsFixedAndBandPass) {
  models::detail::SincBank bank(20, 1024);
  EXPECT_EQ(bank->kernel_size(), 1025);
  EXPECT_TRUE(bank->parameters().empty());
  // The summed taps approximate each filter's DC gain, which is ~0 except
  // for the lowest band that starts at 0 Hz.
  auto dc = bank->filters.sum(2).squeeze(1);
  EXPECT_GT(dc[0].item<float>(), 0.5f);
  for (int f = 1; f < 20; ++f) EXPECT_LT(std::abs(dc[f].item<float>()), 0.05f);
}

TEST(Layers, GraphAttentionIsPermutationEquivariant) {
  torch::manual_seed(5);
  models::detail::GraphAttention gat(8, 6);
  const models::detail::DropFn id = [](const torch::Tensor& t) { return t; };
  gat->eval();
  torch::NoGradGuard ng;
  auto x = torch::randn({2, 9, 8});
  auto perm = torch::randperm(9, torch::kInt64);
  auto y = gat->forward(x, id);
  auto yp = gat->forward(x.index_select(1, perm), id);
  EXPECT_TRUE(torch::allclose(yp, y.index_select(1, perm), 1e-5, 1e-6));
  auto att = gat->attention(x);
  EXPECT_TRUE(torch::allclose(att.sum(2), torch::ones({2, 9}), 1e-5, 1e-6));
}

TEST(Layers, GraphPoolKeepsTopNodesInOrder) {
  torch::manual_seed(6);
  models::detail::GraphPool pool(4, 0.5);
  const models::detail::DropFn id = [](const torch::Tensor& t) { return t; };
  pool->eval();
  torch::NoGradGuard ng;
  auto h = torch::randn({1, 7, 4});
  auto out = pool->forward(h, id);
  EXPECT_EQ(out.size(1), 3);
  auto scores = torch::sigmoid(pool->proj(h)).squeeze(-1).squeeze(0);
  auto top = std::get<0>(torch::sort(std::get<1>(torch::topk(scores, 3))));
  for (int i = 0; i < 3; ++i) {
    const auto n = top[i].item<std::int64_t>();
    EXPECT_TRUE(torch::allclose(out[0][i], h[0][n] * scores[n]));
  }
}

TEST(Batching, CyclicPaddingAndLabels) {
  features::FeatureMatrix a{2, 3, {1, 2, 3, 4, 5, 6}, features::FeatureKind::logspec, "a"};
  features::FeatureMatrix b{2, 5, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, features::FeatureKind::logspec, "b"};
  auto batch = make_batch({a, b}, {dataio::Label::spoof, dataio::Label::bonafide});
  EXPECT_EQ(batch.inputs.sizes(), (std::vector<std::int64_t>{2, 2, 5}));
  EXPECT_EQ(batch.lengths, (std::vector<std::int64_t>{3, 5}));
  auto row = batch.inputs[0][1];
  std::vector<float> got(row.data_ptr<float>(), row.data_ptr<float>() + 5);
  EXPECT_EQ(got, (std::vector<float>{4, 5, 6, 4, 5}));
  EXPECT_EQ(batch.labels[0].item<std::int64_t>(), kSpoofClass);
  EXPECT_EQ(batch.labels[1].item<std::int64_t>(), kBonafideClass);

  features::FeatureMatrix r{1, 4, {1, 2, 3, 4}, features::FeatureKind::raw, "r"};
  auto raw = make_batch({r});
  EXPECT_EQ(raw.kind, InputKind::raw);
  EXPECT_EQ(raw.inputs.sizes(), (std::vector<std::int64_t>{1, 4}));
  EXPECT_THROW(make_batch({a, r}), ShapeMismatch);
  EXPECT_THROW(make_batch({}), ShapeMismatch);
}

TEST_P(EveryModel, BuildIsDeterministic) {
  auto c = ModelConfig::defaults(GetParam(), 11);
  auto a = build(c);
  auto b = build(c);
  auto pa = flat_parameters(*a), pb = flat_parameters(*b);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE(torch::equal(pa[i], pb[i]));
  EXPECT_EQ(parameter_count(*a), parameter_count(*b));
  c.init_seed = 12;
  auto d = build(c);
  auto pd = flat_parameters(*d);
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) differs = differs || !torch::equal(pa[i], pd[i]);
  EXPECT_TRUE(differs);
}

TEST_P(EveryModel, EvalIsDeterministicAndPermutationEquivariant) {
  auto m = build(ModelConfig::defaults(GetParam(), 2));
  m->eval();
  torch::NoGradGuard ng;
  auto x = synthetic_input(m->input_kind(), 3, short_length(m->input_kind()));
  auto y1 = forward(*m, x);
  auto y2 = forward(*m, x);
  EXPECT_TRUE(torch::equal(y1, y2));
  auto perm = torch::tensor({2, 0, 1}, torch::kInt64);
  auto yp = forward(*m, x.index_select(0, perm));
  EXPECT_TRUE(torch::allclose(yp, y1.index_select(0, perm), 1e-4, 1e-5));
  EXPECT_TRUE(torch::isfinite(y1).all().item<bool>());
}

TEST_P(EveryModel, GradientReachesParameters) {
  auto m = build(ModelConfig::defaults(GetParam(), 4));
  auto x = synthetic_input(m->input_kind(), 2, short_length(m->input_kind()));
  EXPECT_GE(spoofbench::testing::nonzero_gradient_fraction(*m, x), 0.99);
}

class MeanPooledModel : public ::testing::TestWithParam<ModelId> {};

TEST_P(MeanPooledModel, PooledEmbeddingIdempotentUnderRepetition) {
  auto m = build(ModelConfig::defaults(GetParam(), 9));
  m->eval();
  torch::NoGradGuard ng;
  auto x = synthetic_input(m->input_kind(), 2, short_length(m->input_kind()));
  auto h = m->frame_features(x);
  ASSERT_TRUE(h.defined());
  auto once = temporal_mean(h);
  auto twice = temporal_mean(torch::cat({h, h}, 1));
  EXPECT_LT((twice - once).norm().item<double>(), 1e-5 * once.norm().item<double>());
  // The head really averages these features.
  auto direct = m->forward(x);
  EXPECT_TRUE(torch::isfinite(direct).all().item<bool>());
}

INSTANTIATE_TEST_SUITE_P(All, EveryModel, ::testing::ValuesIn(kAllModels), model_name);
INSTANTIATE_TEST_SUITE_P(All, MeanPooledModel,
                         ::testing::Values(ModelId::LSTM, ModelId::LCNN, ModelId::LCNN_LSTM,
                                           ModelId::MESONET, ModelId::MESOINCEPTION,
                                           ModelId::TRANSFORMER, ModelId::CRNNSPOOF),
                         model_name);

TEST(ModelForward, NativePoolingModelsExposeNoFrameFeatures) {
  for (auto id : {ModelId::LCNN_ATTENTION, ModelId::RESNET18, ModelId::RAWNET2, ModelId::RAWPC,
                  ModelId::RAWGAT_ST}) {
    auto m = build(ModelConfig::defaults(id));
    auto x = synthetic_input(m->input_kind(), 1, short_length(m->input_kind()));
    EXPECT_FALSE(m->frame_features(x).defined()) << to_string(id);
  }
}
