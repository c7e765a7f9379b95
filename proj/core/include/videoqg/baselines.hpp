#pragma once

#include "videoqg/model.hpp"

namespace videoqg {

// Stacked LSTM over a feature sequence, exposing per-step top-layer outputs
// and the final (h, c) of every layer.
class LstmEncoder {
 public:
  LstmEncoder() = default;
  LstmEncoder(ParameterStore& store, const std::string& prefix, std::size_t in_dim,
              std::size_t d_hidden, std::size_t n_layers, std::mt19937_64& rng);

  struct Output {
    Tensor outputs;  // [T x d_hidden]
    std::vector<std::pair<Tensor, Tensor>> final_state;
  };
  Output run(const Tensor& sequence) const;

  std::size_t n_layers() const { return cells_.size(); }
  std::size_t d_hidden() const { return d_hidden_; }

 private:
  std::vector<LstmCell> cells_;
  std::size_t d_hidden_ = 0;
};

struct BaselineConfig {
  enum class Kind { kS2vt, kImgd };
  Kind kind = Kind::kS2vt;
  std::size_t d_hidden = 128;  // shared by encoder and decoder stacks
  std::size_t n_layers = 2;
  std::size_t emb_dim = 64;
  std::size_t frame_dim = 2048;

  void validate() const;
};

// Frames-only recurrent encoder-decoder: projected frame features through a
// stacked LSTM, decoder seeded from the encoder's final state and attending
// over the encoder outputs.
class S2vtModel : public QgModel {
 public:
  S2vtModel(const BaselineConfig& config, const VocabSizes& vocabs, std::uint64_t seed);

  const std::string& kind() const override;
  ParameterStore& params() override { return store_; }
  const AttentiveLstmDecoder& decoder() const override { return decoder_; }
  Prepared prepare(const MultimodalClip& clip,
                   std::mt19937_64* dropout_rng = nullptr) const override;

 private:
  BaselineConfig config_;
  ParameterStore store_;
  Affine frame_input_;
  LstmEncoder encoder_;
  AttentiveLstmDecoder decoder_;
};

// Multimodal baseline: independent LSTM encoders per modality, decoder state
// initialized from a projection of both final hidden states, attention over
// the frame encoder outputs only.
class ImgdModel : public QgModel {
 public:
  ImgdModel(const BaselineConfig& config, const VocabSizes& vocabs, std::uint64_t seed);

  const std::string& kind() const override;
  ParameterStore& params() override { return store_; }
  const AttentiveLstmDecoder& decoder() const override { return decoder_; }
  Prepared prepare(const MultimodalClip& clip,
                   std::mt19937_64* dropout_rng = nullptr) const override;

 private:
  BaselineConfig config_;
  ParameterStore store_;
  Affine frame_input_;
  Tensor subtitle_embedding_;  // [V_sub x emb_dim]
  LstmEncoder frame_encoder_;
  LstmEncoder subtitle_encoder_;
  std::vector<Affine> init_h_, init_c_;  // from concatenated final hidden states
  AttentiveLstmDecoder decoder_;
};

}  // namespace videoqg
