#pragma once

#include <optional>
#include <string>
#include <vector>

#include "videoqg/features.hpp"
#include "videoqg/params.hpp"
#include "videoqg/tensor.hpp"

namespace videoqg {

struct EncoderConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  std::size_t ffn_dim = 128;
  bool use_subtitles = true;  // scenario switch
  bool use_sre = true;        // ablation switch
  double dropout = 0.0;

  void validate() const;
};

// Sinusoidal positions: PE[pos, 2i] = sin(pos / 10000^(2i/d)), odd dims cos.
Tensor positional_encoding(std::size_t length, std::size_t d_model);

struct AttentionResult {
  Tensor output;   // [m x d_v]
  Tensor weights;  // [m x n], rows sum to 1
};

// softmax(Q K^T / sqrt(d_h)) V
AttentionResult single_head_attention(const Tensor& q, const Tensor& k, const Tensor& v);

struct MultiHeadParams {
  std::vector<Tensor> w_q, w_k, w_v;  // per head, [d_model x d_head]
  Tensor w_o;                         // [d_model x d_model]

  static MultiHeadParams create(ParameterStore& store, const std::string& prefix,
                                std::size_t d_model, std::size_t n_heads, std::mt19937_64& rng);
  std::size_t n_heads() const { return w_q.size(); }
};

struct MultiHeadResult {
  Tensor output;                    // [m x d_model]
  std::vector<Tensor> head_weights; // per head, detached [m x n]
};

MultiHeadResult multi_head_attention(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                                     const MultiHeadParams& params);

// Detached per-layer, per-head attention weights captured during encoding.
struct AttentionTrace {
  std::vector<std::vector<Tensor>> video_layers;
  std::vector<std::vector<Tensor>> subtitle_layers;
  std::vector<Tensor> cmsa_heads;

  std::vector<const Tensor*> all() const;
};

// Contextualized streams; `fused` is what the decoder consumes. When the
// subtitle stream is disabled, `fused` aliases `video_ctx` exactly.
struct EncoderOutput {
  Tensor fused;
  Tensor video_ctx;
  Tensor sub_ctx;  // undefined in the video-only scenario
  AttentionTrace attn;
};

// Pre-norm-free transformer stack: per layer, multi-head self-attention with
// residual + layer norm, then a two-layer feed-forward with residual + layer
// norm. Positional encoding is added once at the input; L = 0 reduces to
// input + positions.
class SelfAttentionStack {
 public:
  SelfAttentionStack() = default;
  SelfAttentionStack(ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                     std::mt19937_64& rng);

  Tensor forward(const Tensor& x, std::vector<std::vector<Tensor>>* trace,
                 std::mt19937_64* dropout_rng = nullptr) const;

 private:
  struct Layer {
    MultiHeadParams attn;
    Tensor ln1_gain, ln1_bias;
    Affine ffn1, ffn2;
    Tensor ln2_gain, ln2_bias;
  };
  std::vector<Layer> layers_;
  std::size_t d_model_ = 0;
  double dropout_ = 0.0;
};

// Cross-modal fusion: video stream queries the subtitle stream (keys and
// values), with residual + layer norm. Output is query-shaped.
class CmsaFusion {
 public:
  CmsaFusion() = default;
  CmsaFusion(ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
             std::mt19937_64& rng);

  Tensor fuse(const Tensor& video_ctx, const Tensor& sub_ctx, std::vector<Tensor>* trace) const;

 private:
  MultiHeadParams attn_;
  Tensor ln_gain_, ln_bias_;
};

struct EncoderDims {
  std::size_t frame_dim = 2048;
  std::size_t embed_dim = 300;
};

// The two-stream encoder: SRE features (or projected frames) through a video
// self-attention stack, embedded subtitles through a second stack, fused by
// cross-modal attention when subtitles are in play.
class SrcmsaEncoder {
 public:
  SrcmsaEncoder() = default;
  SrcmsaEncoder(ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                const EncoderDims& dims, std::mt19937_64& rng);

  EncoderOutput encode(const MultimodalClip& clip, const EmbeddingTables& tables,
                       std::mt19937_64* dropout_rng = nullptr) const;

  const EncoderConfig& config() const { return config_; }
  const Tensor& w_proj() const { return w_proj_; }

 private:
  EncoderConfig config_;
  Tensor w_proj_;           // [d_F x d_e], SRE projection (use_sre only)
  Affine video_input_;      // lifts SRE output or raw frames to d_model
  Affine subtitle_input_;   // lifts subtitle embeddings to d_model
  SelfAttentionStack video_stack_;
  SelfAttentionStack subtitle_stack_;
  CmsaFusion fusion_;
};

}  // namespace videoqg
