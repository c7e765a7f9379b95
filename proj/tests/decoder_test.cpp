#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "support/test_support.hpp"
#include "videoqg/decoder.hpp"

using namespace videoqg;

namespace {

struct DecoderFixture {
  ParameterStore store;
  AttentiveLstmDecoder dec;
  Tensor memory;

  explicit DecoderFixture(std::uint64_t seed, std::size_t vocab = 10, std::size_t d_mem = 6,
                          std::size_t n_mem = 4, double init_scale = 1.0) {
    std::mt19937_64 rng(seed);
    DecoderConfig cfg;
    cfg.d_dec = 8;
    cfg.n_layers = 2;
    cfg.emb_dim = 5;
    dec = AttentiveLstmDecoder(store, "dec", cfg, d_mem, vocab, rng);
    memory = uniform_init({n_mem, d_mem}, -init_scale, init_scale, rng);
  }

  // shifts the output bias of one vocabulary entry
  void bias_token(int token, double amount) {
    Tensor b = store.at("dec.output.b");
    b.mutable_values()[static_cast<std::size_t>(token)] += amount;
  }
};

}  // namespace

TEST_CASE("init_state") {
  DecoderFixture fx(1);
  SUBCASE("zero memory yields the projection biases") {
    DecoderState state = fx.dec.init_state(Tensor::zeros({3, 6}));
    for (std::size_t l = 0; l < 2; ++l) {
      const Tensor hb = fx.store.at("dec.init_h" + std::to_string(l) + ".b");
      const Tensor cb = fx.store.at("dec.init_c" + std::to_string(l) + ".b");
      CHECK(test::approx_equal(state.layers[l].first.values(),
                               {hb.values().begin(), hb.values().end()}, 0.0));
      CHECK(test::approx_equal(state.layers[l].second.values(),
                               {cb.values().begin(), cb.values().end()}, 0.0));
    }
  }
  SUBCASE("state shape is n_layers x (h, c) x d_dec") {
    DecoderState state = fx.dec.init_state(fx.memory);
    CHECK(state.layers.size() == 2);
    for (const auto& [h, c] : state.layers) {
      CHECK(h.shape() == Shape{1, 8});
      CHECK(c.shape() == Shape{1, 8});
    }
  }
  SUBCASE("duplicating every memory row leaves the init unchanged") {
    DecoderState a = fx.dec.init_state(fx.memory);
    std::vector<double> doubled;
    auto v = fx.memory.values();
    doubled.insert(doubled.end(), v.begin(), v.end());
    doubled.insert(doubled.end(), v.begin(), v.end());
    DecoderState b = fx.dec.init_state(Tensor::from({8, 6}, doubled));
    for (std::size_t l = 0; l < 2; ++l) {
      for (std::size_t i = 0; i < 8; ++i) {
        CHECK(a.layers[l].first.at(i) ==
              doctest::Approx(b.layers[l].first.at(i)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("decode_step") {
  DecoderFixture fx(2);
  DecoderState state = fx.dec.init_state(fx.memory);
  StepResult res = fx.dec.step(fx.memory, state, Vocabulary::kBos);
  SUBCASE("attention sums to 1") {
    double sum = 0.0;
    for (double w : res.attn.values()) sum += w;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  SUBCASE("logits cover the vocabulary") { CHECK(res.logits.shape() == Shape{10}); }
  SUBCASE("identical inputs give identical outputs") {
    StepResult again = fx.dec.step(fx.memory, state, Vocabulary::kBos);
    CHECK(std::equal(res.logits.values().begin(), res.logits.values().end(),
                     again.logits.values().begin()));
  }
  SUBCASE("invalid token id is rejected") {
    CHECK_THROWS_AS(fx.dec.step(fx.memory, state, 99), IndexError);
    CHECK_THROWS_AS(fx.dec.step(fx.memory, state, -1), IndexError);
  }
}

TEST_CASE("greedy decoding") {
  SUBCASE("a model that forces EOS yields the empty question") {
    DecoderFixture fx(3);
    fx.bias_token(Vocabulary::kEos, 100.0);
    auto tokens = greedy_decode(fx.dec, fx.memory, fx.dec.init_state(fx.memory), 10);
    CHECK(tokens.empty());
  }
  SUBCASE("output never contains PAD or BOS even when their logits dominate") {
    DecoderFixture fx(4);
    fx.bias_token(Vocabulary::kPad, 50.0);
    fx.bias_token(Vocabulary::kBos, 50.0);
    fx.bias_token(Vocabulary::kEos, -50.0);
    auto tokens = greedy_decode(fx.dec, fx.memory, fx.dec.init_state(fx.memory), 12);
    CHECK_FALSE(tokens.empty());
    for (int t : tokens) {
      CHECK(t != Vocabulary::kPad);
      CHECK(t != Vocabulary::kBos);
    }
  }
  SUBCASE("length never exceeds max_len") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      DecoderFixture fx(100 + seed);
      fx.bias_token(Vocabulary::kEos, -50.0);  // discourage stopping
      auto tokens = greedy_decode(fx.dec, fx.memory, fx.dec.init_state(fx.memory), 7);
      CHECK(tokens.size() <= 7);
    }
  }
  SUBCASE("constant logits tie-break to the lowest selectable id") {
    DecoderFixture fx(5);
    // zero the output projection: logits become the bias, set uniform
    Tensor w = fx.store.at("dec.output.W");
    std::fill(w.mutable_values().begin(), w.mutable_values().end(), 0.0);
    Tensor b = fx.store.at("dec.output.b");
    std::fill(b.mutable_values().begin(), b.mutable_values().end(), 0.0);
    auto tokens = greedy_decode(fx.dec, fx.memory, fx.dec.init_state(fx.memory), 3);
    // EOS (id 2) is the lowest selectable id, so decoding stops immediately
    CHECK(tokens.empty());
  }
}

TEST_CASE("beam search equals greedy at beam size 1 on 100 random models") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DecoderFixture fx(1000 + seed);
    DecoderState init = fx.dec.init_state(fx.memory);
    auto greedy = greedy_decode(fx.dec, fx.memory, init, 8);
    BeamHypothesis beam = beam_search(fx.dec, fx.memory, init, 1, 8);
    CHECK(beam.tokens == greedy);
  }
}

TEST_CASE("beam of the whole vocabulary with max_len 1 returns the top first token") {
  DecoderFixture fx(6);
  fx.bias_token(Vocabulary::kEos, -100.0);
  DecoderState init = fx.dec.init_state(fx.memory);
  StepResult first = fx.dec.step(fx.memory, init, Vocabulary::kBos);
  int best = -1;
  auto v = first.logits.values();
  for (int id = 0; id < 10; ++id) {
    if (id == Vocabulary::kPad || id == Vocabulary::kBos) continue;
    if (best < 0 || v[static_cast<std::size_t>(id)] > v[static_cast<std::size_t>(best)]) {
      best = id;
    }
  }
  BeamHypothesis hyp = beam_search(fx.dec, fx.memory, init, 10, 1);
  REQUIRE(hyp.tokens.size() == 1);
  CHECK(hyp.tokens[0] == best);
}

TEST_CASE("beam score equals teacher-forced rescoring within 1e-9") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    DecoderFixture fx(2000 + seed);
    DecoderState init = fx.dec.init_state(fx.memory);
    BeamHypothesis hyp = beam_search(fx.dec, fx.memory, init, 3, 8);
    const double rescored =
        teacher_forced_logprob(fx.dec, fx.memory, init, hyp.tokens, hyp.ended_with_eos);
    CHECK(std::abs(hyp.log_prob - rescored) < 1e-9);
  }
}

TEST_CASE("step log-probs only accumulate downward") {
  DecoderFixture fx(7);
  DecoderState init = fx.dec.init_state(fx.memory);
  BeamHypothesis hyp = beam_search(fx.dec, fx.memory, init, 2, 8);
  double prev = 0.0;
  for (std::size_t k = 1; k <= hyp.tokens.size(); ++k) {
    std::vector<int> prefix(hyp.tokens.begin(), hyp.tokens.begin() + static_cast<long>(k));
    const double lp = teacher_forced_logprob(fx.dec, fx.memory, init, prefix, false);
    CHECK(lp <= prev + 1e-12);
    prev = lp;
  }
}

TEST_CASE("widening the beam never lowers the returned model score") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DecoderFixture fx(3000 + seed);
    DecoderState init = fx.dec.init_state(fx.memory);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t beam : {1, 2, 3, 5, 8}) {
      BeamHypothesis hyp = beam_search(fx.dec, fx.memory, init, beam, 6);
      CHECK(hyp.log_prob >= prev - 1e-12);
      prev = hyp.log_prob;
    }
  }
}

TEST_CASE("finished hypotheses carry their flags") {
  DecoderFixture fx(8);
  fx.bias_token(Vocabulary::kEos, 100.0);
  BeamHypothesis hyp = beam_search(fx.dec, fx.memory, fx.dec.init_state(fx.memory), 2, 5);
  CHECK(hyp.finished);
  CHECK(hyp.ended_with_eos);
  CHECK(hyp.log_prob <= 0.0);
}
