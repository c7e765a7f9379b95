#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_support.hpp"
#include "videoqg/encoder.hpp"
#include "videoqg/gradcheck.hpp"

using namespace videoqg;

TEST_CASE("positional encoding closed forms") {
  Tensor pe = positional_encoding(4, 6);
  SUBCASE("position zero alternates 0 and 1") {
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(pe.at(0, i) == doctest::Approx(i % 2 == 0 ? 0.0 : 1.0));
    }
  }
  SUBCASE("all values within [-1, 1]") {
    for (double v : pe.values()) {
      CHECK(v <= 1.0);
      CHECK(v >= -1.0);
    }
  }
  SUBCASE("PE[1,0] = sin(1)") { CHECK(pe.at(1, 0) == doctest::Approx(std::sin(1.0))); }
  SUBCASE("zero length is allowed") {
    CHECK(positional_encoding(0, 6).shape() == Shape{0, 6});
  }
}

TEST_CASE("single head attention") {
  SUBCASE("one key: output equals the single value row") {
    std::mt19937_64 rng(1);
    Tensor q = uniform_init({3, 4}, -2.0, 2.0, rng);
    Tensor k = uniform_init({1, 4}, -2.0, 2.0, rng);
    Tensor v = uniform_init({1, 5}, -2.0, 2.0, rng);
    auto res = single_head_attention(q, k, v);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 5; ++c) CHECK(res.output.at(r, c) == v.at(0, c));
      CHECK(res.weights.at(r, 0) == doctest::Approx(1.0));
    }
  }
  SUBCASE("orthogonal query yields the column mean of V") {
    Tensor q = Tensor::from({1, 2}, {1.0, 0.0});
    Tensor k = Tensor::from({3, 2}, {0, 1, 0, 2, 0, 3});  // all orthogonal to q
    Tensor v = Tensor::from({3, 2}, {3, 9, 6, 12, 9, 15});
    auto res = single_head_attention(q, k, v);
    CHECK(res.output.at(0, 0) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(res.output.at(0, 1) == doctest::Approx(12.0).epsilon(1e-12));
  }
  SUBCASE("hand-computed softmax at d_h = 1") {
    Tensor q = Tensor::from({1, 1}, {1.0});
    Tensor k = Tensor::from({2, 1}, {std::log(1.0), std::log(3.0)});
    Tensor v = Tensor::from({2, 2}, {10, 1, 20, 2});
    auto res = single_head_attention(q, k, v);
    CHECK(res.weights.at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(res.weights.at(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.output.at(0, 0) == doctest::Approx(17.5).epsilon(1e-12));
    CHECK(res.output.at(0, 1) == doctest::Approx(1.75).epsilon(1e-12));
  }
  SUBCASE("Q/K width mismatch throws") {
    CHECK_THROWS_AS(
        single_head_attention(Tensor::zeros({1, 3}), Tensor::zeros({2, 4}), Tensor::zeros({2, 4})),
        ShapeError);
  }
}

namespace {

MultiHeadParams identity_params(std::size_t d_model) {
  MultiHeadParams p;
  std::vector<double> eye(d_model * d_model, 0.0);
  for (std::size_t i = 0; i < d_model; ++i) eye[i * d_model + i] = 1.0;
  p.w_q = {Tensor::from({d_model, d_model}, eye)};
  p.w_k = {Tensor::from({d_model, d_model}, eye)};
  p.w_v = {Tensor::from({d_model, d_model}, eye)};
  p.w_o = Tensor::from({d_model, d_model}, eye);
  return p;
}

}  // namespace

TEST_CASE("multi head attention") {
  std::mt19937_64 rng(2);
  SUBCASE("H=1 with identity projections equals single head") {
    Tensor q = uniform_init({4, 6}, -1.0, 1.0, rng);
    Tensor k = uniform_init({5, 6}, -1.0, 1.0, rng);
    Tensor v = uniform_init({5, 6}, -1.0, 1.0, rng);
    auto multi = multi_head_attention(q, k, v, identity_params(6));
    auto single = single_head_attention(q, k, v);
    for (std::size_t i = 0; i < multi.output.numel(); ++i) {
      CHECK(std::abs(multi.output.at(i) - single.output.at(i)) < 1e-12);
    }
  }
  SUBCASE("output row count equals query row count") {
    ParameterStore store;
    auto params = MultiHeadParams::create(store, "mh", 6, 2, rng);
    for (auto [m, n] : {std::pair<std::size_t, std::size_t>{1, 5}, {7, 3}}) {
      Tensor q = uniform_init({m, 6}, -1.0, 1.0, rng);
      Tensor kv = uniform_init({n, 6}, -1.0, 1.0, rng);
      auto res = multi_head_attention(q, kv, kv, params);
      CHECK(res.output.shape() == Shape{m, 6});
      CHECK(res.head_weights.size() == 2);
      CHECK(res.head_weights[0].shape() == Shape{m, n});
    }
  }
  SUBCASE("H=2 equals independently recomputed heads times Wo") {
    ParameterStore store;
    auto params = MultiHeadParams::create(store, "mh", 6, 2, rng);
    Tensor q = uniform_init({3, 6}, -1.0, 1.0, rng);
    Tensor kv = uniform_init({4, 6}, -1.0, 1.0, rng);
    auto res = multi_head_attention(q, kv, kv, params);
    Tensor h0 = single_head_attention(matmul(q, params.w_q[0]), matmul(kv, params.w_k[0]),
                                      matmul(kv, params.w_v[0]))
                    .output;
    Tensor h1 = single_head_attention(matmul(q, params.w_q[1]), matmul(kv, params.w_k[1]),
                                      matmul(kv, params.w_v[1]))
                    .output;
    Tensor expected = matmul(concat_lastdim({h0, h1}), params.w_o);
    for (std::size_t i = 0; i < expected.numel(); ++i) {
      CHECK(res.output.at(i) == doctest::Approx(expected.at(i)).epsilon(1e-14));
    }
  }
}

TEST_CASE("self attention stack") {
  std::mt19937_64 rng(3);
  EncoderConfig config;
  config.d_model = 6;
  config.n_heads = 2;
  config.ffn_dim = 10;

  SUBCASE("zero layers reduce to input plus positions") {
    config.n_layers = 0;
    ParameterStore store;
    SelfAttentionStack stack(store, "enc", config, rng);
    Tensor x = uniform_init({5, 6}, -1.0, 1.0, rng);
    Tensor out = stack.forward(x, nullptr);
    Tensor expected = add(x, positional_encoding(5, 6));
    for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out.at(i) == expected.at(i));
  }
  SUBCASE("output shape equals input shape") {
    config.n_layers = 2;
    ParameterStore store;
    SelfAttentionStack stack(store, "enc", config, rng);
    for (std::size_t len : {1, 4, 9}) {
      Tensor x = uniform_init({len, 6}, -1.0, 1.0, rng);
      CHECK(stack.forward(x, nullptr).shape() == Shape{len, 6});
    }
  }
  SUBCASE("zeroed residual branches leave a layer-norm chain") {
    config.n_layers = 2;
    ParameterStore store;
    SelfAttentionStack stack(store, "enc", config, rng);
    for (const auto& [name, tensor] : store.items()) {
      const bool is_ln = name.find(".ln") != std::string::npos;
      if (!is_ln) {
        Tensor handle = tensor;
        auto values = handle.mutable_values();
        std::fill(values.begin(), values.end(), 0.0);
      }
    }
    Tensor x = uniform_init({4, 6}, -1.0, 1.0, rng);
    Tensor out = stack.forward(x, nullptr);
    Tensor expected = add(x, positional_encoding(4, 6));
    for (int layer = 0; layer < 2; ++layer) {
      const std::string lp = "enc.layer" + std::to_string(layer);
      expected = layer_norm(expected, store.at(lp + ".ln1.gain"), store.at(lp + ".ln1.bias"));
      expected = layer_norm(expected, store.at(lp + ".ln2.gain"), store.at(lp + ".ln2.bias"));
    }
    for (std::size_t i = 0; i < out.numel(); ++i) {
      CHECK(out.at(i) == doctest::Approx(expected.at(i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cmsa fusion") {
  std::mt19937_64 rng(4);
  EncoderConfig config;
  config.d_model = 4;
  config.n_heads = 2;

  ParameterStore store;
  CmsaFusion fusion(store, "cmsa", config, rng);

  SUBCASE("a single subtitle row receives weight 1 from every query") {
    Tensor video = uniform_init({3, 4}, -1.0, 1.0, rng);
    Tensor sub = uniform_init({1, 4}, -1.0, 1.0, rng);
    std::vector<Tensor> trace;
    fusion.fuse(video, sub, &trace);
    for (const auto& head : trace) {
      for (std::size_t r = 0; r < 3; ++r) CHECK(head.at(r, 0) == doctest::Approx(1.0));
    }
  }
  SUBCASE("output is query-shaped for n_frame != n_S") {
    Tensor video = uniform_init({9, 4}, -1.0, 1.0, rng);
    Tensor sub = uniform_init({4, 4}, -1.0, 1.0, rng);
    std::vector<Tensor> trace;
    CHECK(fusion.fuse(video, sub, &trace).shape() == Shape{9, 4});
  }
  SUBCASE("jointly permuting subtitle rows leaves the output unchanged") {
    Tensor video = uniform_init({5, 4}, -1.0, 1.0, rng);
    Tensor sub = uniform_init({6, 4}, -1.0, 1.0, rng);
    std::vector<double> permuted(sub.numel());
    const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t c = 0; c < 4; ++c) permuted[r * 4 + c] = sub.at(perm[r], c);
    }
    Tensor a = fusion.fuse(video, sub, nullptr);
    Tensor b = fusion.fuse(video, Tensor::from({6, 4}, permuted), nullptr);
    for (std::size_t i = 0; i < a.numel(); ++i) {
      CHECK(a.at(i) == doctest::Approx(b.at(i)).epsilon(1e-9));
    }
  }
  SUBCASE("empty subtitles raise a scenario error") {
    Tensor video = uniform_init({2, 4}, -1.0, 1.0, rng);
    CHECK_THROWS_AS(fusion.fuse(video, Tensor::zeros({0, 4}), nullptr), ScenarioError);
  }
}

namespace {

struct EncoderFixture {
  ParameterStore store;
  EmbeddingTables tables;
  SrcmsaEncoder encoder;

  EncoderFixture(const EncoderConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    tables = EmbeddingTables::create(store, "emb", 6, 9, 5, rng);
    EncoderDims dims;
    dims.frame_dim = 6;
    dims.embed_dim = 5;
    encoder = SrcmsaEncoder(store, "encoder", config, dims, rng);
  }
};

EncoderConfig small_config(bool use_sre, bool use_subtitles) {
  EncoderConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_layers = 1;
  c.ffn_dim = 12;
  c.use_sre = use_sre;
  c.use_subtitles = use_subtitles;
  return c;
}

}  // namespace

TEST_CASE("encode scenarios") {
  SUBCASE("pure self-attention ablation runs without subtitles or objects") {
    EncoderFixture fx(small_config(false, false), 10);
    MultimodalClip clip = videoqg::test::tiny_clip(1);
    EncoderOutput out = fx.encoder.encode(clip, fx.tables);
    CHECK(out.fused.shape() == Shape{3, 8});
    CHECK(out.fused.node() == out.video_ctx.node());  // exact ablation contract
    CHECK_FALSE(out.sub_ctx.defined());
  }
  SUBCASE("disabling subtitles makes the output independent of subtitle content") {
    EncoderFixture fx(small_config(true, false), 11);
    MultimodalClip clip = videoqg::test::tiny_clip(2);
    EncoderOutput a = fx.encoder.encode(clip, fx.tables);
    clip.subtitle = {8, 8, 8, 8};
    EncoderOutput b = fx.encoder.encode(clip, fx.tables);
    CHECK(std::equal(a.fused.values().begin(), a.fused.values().end(),
                     b.fused.values().begin()));
  }
  SUBCASE("full configuration output shape on a 12-frame, 20-token clip") {
    EncoderFixture fx(small_config(true, true), 12);
    MultimodalClip clip = videoqg::test::tiny_clip(3, 12, 20);
    EncoderOutput out = fx.encoder.encode(clip, fx.tables);
    CHECK(out.fused.shape() == Shape{12, 8});
    CHECK(out.video_ctx.shape() == Shape{12, 8});
    CHECK(out.sub_ctx.shape() == Shape{20, 8});
  }
  SUBCASE("with-subtitles configuration rejects empty subtitles") {
    EncoderFixture fx(small_config(true, true), 13);
    MultimodalClip clip = videoqg::test::tiny_clip(4);
    clip.subtitle.clear();
    CHECK_THROWS_AS(fx.encoder.encode(clip, fx.tables), ScenarioError);
  }
}

TEST_CASE("every attention weight row is a probability distribution") {
  EncoderFixture fx(small_config(true, true), 14);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MultimodalClip clip = videoqg::test::tiny_clip(seed, 2 + seed % 4, 3 + seed % 5);
    EncoderOutput out = fx.encoder.encode(clip, fx.tables);
    for (const Tensor* weights : out.attn.all()) {
      const std::size_t cols = weights->shape()[1];
      for (std::size_t r = 0; r < weights->shape()[0]; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          CHECK(weights->at(r, c) >= 0.0);
          sum += weights->at(r, c);
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("cmsa output length equals the query length on random shape pairs") {
  EncoderFixture fx(small_config(true, true), 15);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> frames(1, 12), subs(1, 15);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n_frame = frames(rng), n_s = subs(rng);
    MultimodalClip clip = videoqg::test::tiny_clip(1000 + trial, n_frame, n_s);
    EncoderOutput out = fx.encoder.encode(clip, fx.tables);
    CHECK(out.fused.shape() == Shape{n_frame, 8});
  }
}

TEST_CASE("end-to-end encoder gradients match finite differences") {
  EncoderFixture fx(small_config(true, true), 16);
  MultimodalClip clip = videoqg::test::tiny_clip(5, 3, 4);
  std::vector<std::pair<std::string, Tensor>> leaves;
  for (const auto& [name, tensor] : fx.store.items()) leaves.emplace_back(name, tensor);
  auto report = check_gradients(
      [&] { return sum_all(fx.encoder.encode(clip, fx.tables).fused); }, leaves, 1e-3);
  INFO("worst rel err ", report.worst_rel_err, " over ", report.coordinates_checked);
  for (const auto& f : report.failures) {
    INFO(f.where, " analytic=", f.analytic, " numeric=", f.numeric);
  }
  CHECK(report.ok());
}

TEST_CASE("dropout knob perturbs training-mode outputs only") {
  EncoderConfig config = small_config(false, false);
  config.dropout = 0.5;
  EncoderFixture fx(config, 17);
  MultimodalClip clip = videoqg::test::tiny_clip(6);
  EncoderOutput eval_a = fx.encoder.encode(clip, fx.tables);
  EncoderOutput eval_b = fx.encoder.encode(clip, fx.tables);
  CHECK(std::equal(eval_a.fused.values().begin(), eval_a.fused.values().end(),
                   eval_b.fused.values().begin()));
  std::mt19937_64 rng(1);
  EncoderOutput train_out = fx.encoder.encode(clip, fx.tables, &rng);
  bool differs = false;
  for (std::size_t i = 0; i < train_out.fused.numel(); ++i) {
    if (train_out.fused.at(i) != eval_a.fused.at(i)) differs = true;
  }
  CHECK(differs);
}
