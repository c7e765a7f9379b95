#include "videoqg/model.hpp"

namespace videoqg {

Tensor teacher_forced_logits(const QgModel& model, const MultimodalClip& clip,
                             std::mt19937_64* dropout_rng) {
  QgModel::Prepared prep = model.prepare(clip, dropout_rng);
  const AttentiveLstmDecoder& dec = model.decoder();
  std::vector<Tensor> rows;
  rows.reserve(clip.question.size() + 1);
  DecoderState state = prep.init;
  int prev = Vocabulary::kBos;
  for (std::size_t t = 0; t <= clip.question.size(); ++t) {
    StepResult res = dec.step(prep.memory, state, prev);
    rows.push_back(reshape(res.logits, {1, dec.vocab_size()}));
    state = std::move(res.state);
    if (t < clip.question.size()) prev = clip.question[t];
  }
  return concat_rows(rows);
}

std::vector<int> generate_greedy(const QgModel& model, const MultimodalClip& clip,
                                 std::size_t max_len) {
  NoGradGuard no_grad;
  QgModel::Prepared prep = model.prepare(clip);
  return greedy_decode(model.decoder(), prep.memory, prep.init, max_len);
}

BeamHypothesis generate_beam(const QgModel& model, const MultimodalClip& clip,
                             std::size_t beam_size, std::size_t max_len,
                             double length_norm_alpha) {
  NoGradGuard no_grad;
  QgModel::Prepared prep = model.prepare(clip);
  return beam_search(model.decoder(), prep.memory, prep.init, beam_size, max_len,
                     length_norm_alpha);
}

double rescore_tokens(const QgModel& model, const MultimodalClip& clip,
                      const std::vector<int>& tokens, bool include_eos) {
  NoGradGuard no_grad;
  QgModel::Prepared prep = model.prepare(clip);
  return teacher_forced_logprob(model.decoder(), prep.memory, prep.init, tokens, include_eos);
}

SrcmsaModel::SrcmsaModel(const SrcmsaModelConfig& config, const VocabSizes& vocabs,
                         std::uint64_t seed)
    : config_(config) {
  std::mt19937_64 rng(seed);
  tables_ = EmbeddingTables::create(store_, "embeddings", vocabs.object_vocab,
                                    vocabs.subtitle_vocab, config.dims.embed_dim, rng);
  encoder_ = SrcmsaEncoder(store_, "encoder", config.encoder, config.dims, rng);
  decoder_ = AttentiveLstmDecoder(store_, "decoder", config.decoder, config.encoder.d_model,
                                  vocabs.question_vocab, rng);
}

const std::string& SrcmsaModel::kind() const {
  static const std::string k = "srcmsa";
  return k;
}

QgModel::Prepared SrcmsaModel::prepare(const MultimodalClip& clip,
                                       std::mt19937_64* dropout_rng) const {
  EncoderOutput enc = encoder_.encode(clip, tables_, dropout_rng);
  Prepared prep;
  prep.memory = enc.fused;
  prep.init = decoder_.init_state(enc.fused);
  return prep;
}

}  // namespace videoqg
