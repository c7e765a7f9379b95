#include "videoqg/baselines.hpp"

namespace videoqg {

LstmEncoder::LstmEncoder(ParameterStore& store, const std::string& prefix, std::size_t in_dim,
                         std::size_t d_hidden, std::size_t n_layers, std::mt19937_64& rng)
    : d_hidden_(d_hidden) {
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = (l == 0) ? in_dim : d_hidden;
    cells_.push_back(
        LstmCell::create(store, prefix + ".lstm" + std::to_string(l), in, d_hidden, rng));
  }
}

LstmEncoder::Output LstmEncoder::run(const Tensor& sequence) const {
  if (sequence.rank() != 2 || sequence.shape()[0] == 0) {
    throw ShapeError("lstm_encoder: expected a nonempty [T x d] sequence, got " +
                     shape_str(sequence.shape()));
  }
  const std::size_t steps = sequence.shape()[0];
  Output out;
  for (std::size_t l = 0; l < cells_.size(); ++l) {
    out.final_state.emplace_back(Tensor::zeros({1, d_hidden_}), Tensor::zeros({1, d_hidden_}));
  }
  std::vector<Tensor> top_outputs;
  top_outputs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor x = slice_rows(sequence, t, 1);
    for (std::size_t l = 0; l < cells_.size(); ++l) {
      auto [h, c] = cells_[l].step(x, out.final_state[l].first, out.final_state[l].second);
      out.final_state[l] = {h, c};
      x = h;
    }
    top_outputs.push_back(x);
  }
  out.outputs = concat_rows(top_outputs);
  return out;
}

void BaselineConfig::validate() const {
  if (d_hidden == 0 || n_layers == 0 || emb_dim == 0 || frame_dim == 0) {
    throw ConfigError("baseline: d_hidden, n_layers, emb_dim and frame_dim must be > 0");
  }
}

S2vtModel::S2vtModel(const BaselineConfig& config, const VocabSizes& vocabs, std::uint64_t seed)
    : config_(config) {
  config.validate();
  std::mt19937_64 rng(seed);
  frame_input_ = Affine::create(store_, "frame_input", config.frame_dim, config.d_hidden, rng);
  encoder_ = LstmEncoder(store_, "encoder", config.d_hidden, config.d_hidden, config.n_layers,
                         rng);
  DecoderConfig dec;
  dec.d_dec = config.d_hidden;
  dec.n_layers = config.n_layers;
  dec.emb_dim = config.emb_dim;
  decoder_ = AttentiveLstmDecoder(store_, "decoder", dec, config.d_hidden,
                                  vocabs.question_vocab, rng);
}

const std::string& S2vtModel::kind() const {
  static const std::string k = "s2vt";
  return k;
}

QgModel::Prepared S2vtModel::prepare(const MultimodalClip& clip, std::mt19937_64*) const {
  LstmEncoder::Output enc = encoder_.run(frame_input_(clip.frames));
  Prepared prep;
  prep.memory = enc.outputs;
  prep.init.layers = enc.final_state;
  return prep;
}

ImgdModel::ImgdModel(const BaselineConfig& config, const VocabSizes& vocabs, std::uint64_t seed)
    : config_(config) {
  config.validate();
  std::mt19937_64 rng(seed);
  frame_input_ = Affine::create(store_, "frame_input", config.frame_dim, config.d_hidden, rng);
  subtitle_embedding_ = store_.add(
      "subtitle_embedding", normal_init({vocabs.subtitle_vocab, config.emb_dim}, 0.0, 0.1, rng));
  frame_encoder_ =
      LstmEncoder(store_, "frame_encoder", config.d_hidden, config.d_hidden, config.n_layers, rng);
  subtitle_encoder_ = LstmEncoder(store_, "subtitle_encoder", config.emb_dim, config.d_hidden,
                                  config.n_layers, rng);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    init_h_.push_back(Affine::create(store_, "init_h" + std::to_string(l), 2 * config.d_hidden,
                                     config.d_hidden, rng));
    init_c_.push_back(Affine::create(store_, "init_c" + std::to_string(l), 2 * config.d_hidden,
                                     config.d_hidden, rng));
  }
  DecoderConfig dec;
  dec.d_dec = config.d_hidden;
  dec.n_layers = config.n_layers;
  dec.emb_dim = config.emb_dim;
  decoder_ = AttentiveLstmDecoder(store_, "decoder", dec, config.d_hidden,
                                  vocabs.question_vocab, rng);
}

const std::string& ImgdModel::kind() const {
  static const std::string k = "imgd";
  return k;
}

QgModel::Prepared ImgdModel::prepare(const MultimodalClip& clip, std::mt19937_64*) const {
  if (clip.subtitle.empty()) {
    throw ScenarioError("imgd: clip '" + clip.clip_id + "' has no subtitles");
  }
  LstmEncoder::Output frames = frame_encoder_.run(frame_input_(clip.frames));
  LstmEncoder::Output subs =
      subtitle_encoder_.run(embedding_lookup(subtitle_embedding_, clip.subtitle));
  Tensor joint =
      concat_lastdim({frames.final_state.back().first, subs.final_state.back().first});
  Prepared prep;
  prep.memory = frames.outputs;
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    prep.init.layers.emplace_back(init_h_[l](joint), init_c_[l](joint));
  }
  return prep;
}

}  // namespace videoqg
