#include "videoqg/encoder.hpp"

#include <cmath>

namespace videoqg {

void EncoderConfig::validate() const {
  if (d_model == 0 || n_heads == 0) throw ConfigError("encoder: d_model and n_heads must be > 0");
  if (d_model % n_heads != 0) {
    throw ConfigError("encoder: d_model " + std::to_string(d_model) + " not divisible by " +
                      std::to_string(n_heads) + " heads");
  }
  if (ffn_dim == 0) throw ConfigError("encoder: ffn_dim must be > 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must be in [0, 1)");
}

Tensor positional_encoding(std::size_t length, std::size_t d_model) {
  std::vector<double> v(length * d_model);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d_model; ++i) {
      const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      v[pos * d_model + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::from({length, d_model}, std::move(v));
}

AttentionResult single_head_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) {
    throw ShapeError("attention: Q, K, V must be rank 2");
  }
  if (q.shape()[1] != k.shape()[1]) {
    throw ShapeError("attention: Q dim " + shape_str(q.shape()) + " vs K dim " +
                     shape_str(k.shape()));
  }
  if (k.shape()[0] != v.shape()[0]) {
    throw ShapeError("attention: K rows " + shape_str(k.shape()) + " vs V rows " +
                     shape_str(v.shape()));
  }
  if (k.shape()[0] == 0) throw ShapeError("attention: no keys");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.shape()[1]));
  Tensor scores = scale(matmul(q, transpose(k)), inv_sqrt_d);
  Tensor weights = softmax_lastdim(scores);
  return {matmul(weights, v), weights};
}

MultiHeadParams MultiHeadParams::create(ParameterStore& store, const std::string& prefix,
                                        std::size_t d_model, std::size_t n_heads,
                                        std::mt19937_64& rng) {
  if (n_heads == 0 || d_model % n_heads != 0) {
    throw ConfigError("multi_head: d_model " + std::to_string(d_model) + " not divisible by " +
                      std::to_string(n_heads) + " heads");
  }
  const std::size_t d_head = d_model / n_heads;
  MultiHeadParams p;
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::string hp = prefix + ".head" + std::to_string(h);
    p.w_q.push_back(store.add(hp + ".Wq", xavier_init({d_model, d_head}, d_model, d_head, rng)));
    p.w_k.push_back(store.add(hp + ".Wk", xavier_init({d_model, d_head}, d_model, d_head, rng)));
    p.w_v.push_back(store.add(hp + ".Wv", xavier_init({d_model, d_head}, d_model, d_head, rng)));
  }
  p.w_o = store.add(prefix + ".Wo", xavier_init({d_model, d_model}, d_model, d_model, rng));
  return p;
}

MultiHeadResult multi_head_attention(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                                     const MultiHeadParams& params) {
  if (params.w_q.empty()) throw ConfigError("multi_head: no heads");
  std::vector<Tensor> heads;
  std::vector<Tensor> weights;
  heads.reserve(params.n_heads());
  for (std::size_t h = 0; h < params.n_heads(); ++h) {
    AttentionResult res = single_head_attention(matmul(q_in, params.w_q[h]),
                                                matmul(k_in, params.w_k[h]),
                                                matmul(v_in, params.w_v[h]));
    heads.push_back(res.output);
    weights.push_back(res.weights.detach());
  }
  Tensor concat = params.n_heads() == 1 ? heads[0] : concat_lastdim(heads);
  return {matmul(concat, params.w_o), std::move(weights)};
}

std::vector<const Tensor*> AttentionTrace::all() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : video_layers)
    for (const auto& t : layer) out.push_back(&t);
  for (const auto& layer : subtitle_layers)
    for (const auto& t : layer) out.push_back(&t);
  for (const auto& t : cmsa_heads) out.push_back(&t);
  return out;
}

namespace {

// Inverted dropout as a constant mask; no-op when p == 0 or rng is absent.
Tensor maybe_dropout(const Tensor& x, double p, std::mt19937_64* rng) {
  if (p <= 0.0 || rng == nullptr) return x;
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> mask(x.numel());
  const double scale_up = 1.0 / (1.0 - p);
  for (auto& m : mask) m = keep(*rng) ? scale_up : 0.0;
  return mul(x, Tensor::from(x.shape(), std::move(mask)));
}

}  // namespace

SelfAttentionStack::SelfAttentionStack(ParameterStore& store, const std::string& prefix,
                                       const EncoderConfig& config, std::mt19937_64& rng)
    : d_model_(config.d_model), dropout_(config.dropout) {
  config.validate();
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    const std::string lp = prefix + ".layer" + std::to_string(l);
    Layer layer;
    layer.attn = MultiHeadParams::create(store, lp + ".attn", config.d_model, config.n_heads, rng);
    layer.ln1_gain = store.add(lp + ".ln1.gain", Tensor::full({1, config.d_model}, 1.0));
    layer.ln1_bias = store.add(lp + ".ln1.bias", Tensor::zeros({1, config.d_model}));
    layer.ffn1 = Affine::create(store, lp + ".ffn1", config.d_model, config.ffn_dim, rng);
    layer.ffn2 = Affine::create(store, lp + ".ffn2", config.ffn_dim, config.d_model, rng);
    layer.ln2_gain = store.add(lp + ".ln2.gain", Tensor::full({1, config.d_model}, 1.0));
    layer.ln2_bias = store.add(lp + ".ln2.bias", Tensor::zeros({1, config.d_model}));
    layers_.push_back(std::move(layer));
  }
}

Tensor SelfAttentionStack::forward(const Tensor& x, std::vector<std::vector<Tensor>>* trace,
                                   std::mt19937_64* dropout_rng) const {
  if (x.rank() != 2 || x.shape()[1] != d_model_) {
    throw ShapeError("self_attention_stack: input " + shape_str(x.shape()) + " expects width " +
                     std::to_string(d_model_));
  }
  if (x.shape()[0] == 0) throw ShapeError("self_attention_stack: empty sequence");
  Tensor h = add(x, positional_encoding(x.shape()[0], d_model_));
  for (const auto& layer : layers_) {
    MultiHeadResult attn = multi_head_attention(h, h, h, layer.attn);
    if (trace) trace->push_back(attn.head_weights);
    Tensor a = maybe_dropout(attn.output, dropout_, dropout_rng);
    h = layer_norm(add(h, a), layer.ln1_gain, layer.ln1_bias);
    Tensor f = layer.ffn2(relu(layer.ffn1(h)));
    f = maybe_dropout(f, dropout_, dropout_rng);
    h = layer_norm(add(h, f), layer.ln2_gain, layer.ln2_bias);
  }
  return h;
}

CmsaFusion::CmsaFusion(ParameterStore& store, const std::string& prefix,
                       const EncoderConfig& config, std::mt19937_64& rng) {
  attn_ = MultiHeadParams::create(store, prefix + ".attn", config.d_model, config.n_heads, rng);
  ln_gain_ = store.add(prefix + ".ln.gain", Tensor::full({1, config.d_model}, 1.0));
  ln_bias_ = store.add(prefix + ".ln.bias", Tensor::zeros({1, config.d_model}));
}

Tensor CmsaFusion::fuse(const Tensor& video_ctx, const Tensor& sub_ctx,
                        std::vector<Tensor>* trace) const {
  if (!sub_ctx.defined() || sub_ctx.shape()[0] == 0) {
    throw ScenarioError("cmsa_fuse: called without subtitle context");
  }
  MultiHeadResult attn = multi_head_attention(video_ctx, sub_ctx, sub_ctx, attn_);
  if (trace) *trace = attn.head_weights;
  return layer_norm(add(video_ctx, attn.output), ln_gain_, ln_bias_);
}

SrcmsaEncoder::SrcmsaEncoder(ParameterStore& store, const std::string& prefix,
                             const EncoderConfig& config, const EncoderDims& dims,
                             std::mt19937_64& rng)
    : config_(config) {
  config.validate();
  if (config.use_sre) {
    w_proj_ = store.add(prefix + ".sre.W_proj",
                        xavier_init({dims.frame_dim, dims.embed_dim}, dims.frame_dim,
                                    dims.embed_dim, rng));
    video_input_ =
        Affine::create(store, prefix + ".video_input", dims.embed_dim, config.d_model, rng);
  } else {
    video_input_ =
        Affine::create(store, prefix + ".video_input", dims.frame_dim, config.d_model, rng);
  }
  video_stack_ = SelfAttentionStack(store, prefix + ".video", config, rng);
  if (config.use_subtitles) {
    subtitle_input_ =
        Affine::create(store, prefix + ".subtitle_input", dims.embed_dim, config.d_model, rng);
    subtitle_stack_ = SelfAttentionStack(store, prefix + ".subtitle", config, rng);
    fusion_ = CmsaFusion(store, prefix + ".cmsa", config, rng);
  }
}

EncoderOutput SrcmsaEncoder::encode(const MultimodalClip& clip, const EmbeddingTables& tables,
                                    std::mt19937_64* dropout_rng) const {
  EncoderOutput out;
  Tensor video_in;
  if (config_.use_sre) {
    video_in = video_input_(sre_fuse(clip.frames, pool_objects(clip, tables), w_proj_));
  } else {
    video_in = video_input_(clip.frames);
  }
  out.video_ctx = video_stack_.forward(video_in, &out.attn.video_layers, dropout_rng);
  if (config_.use_subtitles) {
    if (clip.subtitle.empty()) {
      throw ScenarioError("encode: clip '" + clip.clip_id +
                          "' has no subtitles but the configuration fuses them");
    }
    Tensor sub_in = subtitle_input_(embed_subtitles(clip, tables));
    out.sub_ctx = subtitle_stack_.forward(sub_in, &out.attn.subtitle_layers, dropout_rng);
    out.fused = fusion_.fuse(out.video_ctx, out.sub_ctx, &out.attn.cmsa_heads);
  } else {
    out.fused = out.video_ctx;
  }
  return out;
}

}  // namespace videoqg
