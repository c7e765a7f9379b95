#pragma once

#include <string>
#include <vector>

#include "videoqg/params.hpp"
#include "videoqg/tensor.hpp"
#include "videoqg/vocab.hpp"

namespace videoqg {

struct DecoderConfig {
  std::size_t d_dec = 128;
  std::size_t n_layers = 2;
  std::size_t emb_dim = 64;

  void validate() const;
};

// Per-layer (h, c), each [1 x d_dec].
struct DecoderState {
  std::vector<std::pair<Tensor, Tensor>> layers;
};

// One LSTM cell with per-gate weight matrices.
struct LstmCell {
  Tensor w_xi, w_xf, w_xg, w_xo;  // [in x d]
  Tensor w_hi, w_hf, w_hg, w_ho;  // [d x d]
  Tensor b_i, b_f, b_g, b_o;      // [1 x d]

  static LstmCell create(ParameterStore& store, const std::string& prefix, std::size_t in,
                         std::size_t d, std::mt19937_64& rng);
  // returns (h', c')
  std::pair<Tensor, Tensor> step(const Tensor& x, const Tensor& h, const Tensor& c) const;
};

struct StepResult {
  Tensor logits;  // [V]
  Tensor attn;    // detached [n_mem], sums to 1
  DecoderState state;
};

// Stacked LSTM with multiplicative attention over an encoder memory
// (score_i = h W_a m_i^T), context concatenation and an output projection.
class AttentiveLstmDecoder {
 public:
  AttentiveLstmDecoder() = default;
  AttentiveLstmDecoder(ParameterStore& store, const std::string& prefix,
                       const DecoderConfig& config, std::size_t memory_dim,
                       std::size_t vocab_size, std::mt19937_64& rng);

  // h0/c0 of each layer are affine projections of the memory's row mean.
  DecoderState init_state(const Tensor& memory) const;
  // Zero state (all h, c zero), for models that seed the state themselves.
  DecoderState zero_state() const;

  StepResult step(const Tensor& memory, const DecoderState& state, int prev_token) const;

  const DecoderConfig& config() const { return config_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t memory_dim() const { return memory_dim_; }

 private:
  DecoderConfig config_;
  std::size_t memory_dim_ = 0;
  std::size_t vocab_size_ = 0;
  Tensor embedding_;  // [V x emb_dim]
  std::vector<LstmCell> cells_;
  std::vector<Affine> init_h_, init_c_;
  Tensor w_attn_;  // [d_dec x memory_dim]
  Affine output_;  // [(d_dec + memory_dim) x V]
};

struct BeamHypothesis {
  std::vector<int> tokens;  // emitted question tokens, no BOS/EOS
  double log_prob = 0.0;    // cumulative step log-probs (includes EOS when hit)
  DecoderState state;
  bool finished = false;
  bool ended_with_eos = false;

  double score(double length_norm_alpha) const;
};

// Greedy argmax decoding from BOS until EOS or max_len tokens. PAD and BOS are
// never selectable; argmax ties break toward the lowest token id.
std::vector<int> greedy_decode(const AttentiveLstmDecoder& decoder, const Tensor& memory,
                               const DecoderState& init, std::size_t max_len);

// Standard beam search over step log-probs. Finished hypotheses are ranked by
// log_prob / len^alpha (alpha = 0 keeps raw log-probs); all ties break by the
// lexicographically smaller token sequence, which makes beam_size 1 coincide
// with greedy_decode.
BeamHypothesis beam_search(const AttentiveLstmDecoder& decoder, const Tensor& memory,
                           const DecoderState& init, std::size_t beam_size, std::size_t max_len,
                           double length_norm_alpha = 0.0);

// Teacher-forces `tokens` from BOS and returns the summed step log-probs,
// including the terminating EOS term when `include_eos` is set. Matches the
// score bookkeeping of beam_search.
double teacher_forced_logprob(const AttentiveLstmDecoder& decoder, const Tensor& memory,
                              const DecoderState& init, const std::vector<int>& tokens,
                              bool include_eos);

}  // namespace videoqg
