#pragma once

#include <memory>
#include <string>

#include "videoqg/decoder.hpp"
#include "videoqg/encoder.hpp"
#include "videoqg/features.hpp"

namespace videoqg {

struct VocabSizes {
  std::size_t object_vocab = 0;
  std::size_t subtitle_vocab = 0;
  std::size_t question_vocab = 0;
};

// Common surface for SRCMSA and the baselines: encode a clip into an
// attention memory plus an initial decoder state, then decode with the shared
// attentive LSTM. Training, generation and checkpointing all go through this.
class QgModel {
 public:
  virtual ~QgModel() = default;

  struct Prepared {
    Tensor memory;  // [n x d_mem]
    DecoderState init;
  };

  virtual const std::string& kind() const = 0;
  virtual ParameterStore& params() = 0;
  const ParameterStore& params() const { return const_cast<QgModel*>(this)->params(); }
  virtual const AttentiveLstmDecoder& decoder() const = 0;
  virtual Prepared prepare(const MultimodalClip& clip,
                           std::mt19937_64* dropout_rng = nullptr) const = 0;

  std::size_t question_vocab_size() const { return decoder().vocab_size(); }
};

// Teacher-forced step logits for inputs [BOS, q_1..q_T]; row t predicts the
// t-th target of [q_1..q_T, EOS]. Returns [T+1 x V].
Tensor teacher_forced_logits(const QgModel& model, const MultimodalClip& clip,
                             std::mt19937_64* dropout_rng = nullptr);

std::vector<int> generate_greedy(const QgModel& model, const MultimodalClip& clip,
                                 std::size_t max_len);
BeamHypothesis generate_beam(const QgModel& model, const MultimodalClip& clip,
                             std::size_t beam_size, std::size_t max_len,
                             double length_norm_alpha = 0.0);
double rescore_tokens(const QgModel& model, const MultimodalClip& clip,
                      const std::vector<int>& tokens, bool include_eos);

struct SrcmsaModelConfig {
  EncoderConfig encoder;
  EncoderDims dims;
  DecoderConfig decoder;
};

class SrcmsaModel : public QgModel {
 public:
  SrcmsaModel(const SrcmsaModelConfig& config, const VocabSizes& vocabs, std::uint64_t seed);

  const std::string& kind() const override;
  ParameterStore& params() override { return store_; }
  const AttentiveLstmDecoder& decoder() const override { return decoder_; }
  Prepared prepare(const MultimodalClip& clip,
                   std::mt19937_64* dropout_rng = nullptr) const override;

  EncoderOutput encode(const MultimodalClip& clip, std::mt19937_64* dropout_rng = nullptr) const {
    return encoder_.encode(clip, tables_, dropout_rng);
  }
  const SrcmsaEncoder& encoder() const { return encoder_; }
  const EmbeddingTables& tables() const { return tables_; }
  const SrcmsaModelConfig& config() const { return config_; }

 private:
  SrcmsaModelConfig config_;
  ParameterStore store_;
  EmbeddingTables tables_;
  SrcmsaEncoder encoder_;
  AttentiveLstmDecoder decoder_;
};

}  // namespace videoqg
