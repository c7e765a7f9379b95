#include "videoqg/decoder.hpp"

#include <algorithm>
#include <cmath>

namespace videoqg {

void DecoderConfig::validate() const {
  if (d_dec == 0 || n_layers == 0 || emb_dim == 0) {
    throw ConfigError("decoder: d_dec, n_layers and emb_dim must be > 0");
  }
}

LstmCell LstmCell::create(ParameterStore& store, const std::string& prefix, std::size_t in,
                          std::size_t d, std::mt19937_64& rng) {
  LstmCell c;
  auto mat = [&](const char* name, std::size_t r, std::size_t k) {
    return store.add(prefix + "." + name, xavier_init({r, k}, r, k, rng));
  };
  c.w_xi = mat("Wxi", in, d);
  c.w_xf = mat("Wxf", in, d);
  c.w_xg = mat("Wxg", in, d);
  c.w_xo = mat("Wxo", in, d);
  c.w_hi = mat("Whi", d, d);
  c.w_hf = mat("Whf", d, d);
  c.w_hg = mat("Whg", d, d);
  c.w_ho = mat("Who", d, d);
  c.b_i = store.add(prefix + ".bi", Tensor::zeros({1, d}));
  // forget gate bias starts at 1 so early training does not wipe the cell
  c.b_f = store.add(prefix + ".bf", Tensor::full({1, d}, 1.0));
  c.b_g = store.add(prefix + ".bg", Tensor::zeros({1, d}));
  c.b_o = store.add(prefix + ".bo", Tensor::zeros({1, d}));
  return c;
}

std::pair<Tensor, Tensor> LstmCell::step(const Tensor& x, const Tensor& h,
                                         const Tensor& c) const {
  Tensor i = sigmoid(add(add(matmul(x, w_xi), matmul(h, w_hi)), b_i));
  Tensor f = sigmoid(add(add(matmul(x, w_xf), matmul(h, w_hf)), b_f));
  Tensor g = tanh(add(add(matmul(x, w_xg), matmul(h, w_hg)), b_g));
  Tensor o = sigmoid(add(add(matmul(x, w_xo), matmul(h, w_ho)), b_o));
  Tensor c_next = add(mul(f, c), mul(i, g));
  Tensor h_next = mul(o, tanh(c_next));
  return {h_next, c_next};
}

AttentiveLstmDecoder::AttentiveLstmDecoder(ParameterStore& store, const std::string& prefix,
                                           const DecoderConfig& config, std::size_t memory_dim,
                                           std::size_t vocab_size, std::mt19937_64& rng)
    : config_(config), memory_dim_(memory_dim), vocab_size_(vocab_size) {
  config.validate();
  if (memory_dim == 0 || vocab_size <= Vocabulary::kUnk) {
    throw ConfigError("decoder: memory_dim and vocab_size must cover the reserved ids");
  }
  embedding_ =
      store.add(prefix + ".embedding", normal_init({vocab_size, config.emb_dim}, 0.0, 0.1, rng));
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    const std::size_t in = (l == 0) ? config.emb_dim : config.d_dec;
    cells_.push_back(LstmCell::create(store, prefix + ".lstm" + std::to_string(l), in,
                                      config.d_dec, rng));
    init_h_.push_back(Affine::create(store, prefix + ".init_h" + std::to_string(l), memory_dim,
                                     config.d_dec, rng));
    init_c_.push_back(Affine::create(store, prefix + ".init_c" + std::to_string(l), memory_dim,
                                     config.d_dec, rng));
  }
  w_attn_ = store.add(prefix + ".Wa", xavier_init({config.d_dec, memory_dim}, config.d_dec,
                                                  memory_dim, rng));
  output_ = Affine::create(store, prefix + ".output", config.d_dec + memory_dim, vocab_size, rng);
}

DecoderState AttentiveLstmDecoder::init_state(const Tensor& memory) const {
  if (memory.rank() != 2 || memory.shape()[1] != memory_dim_) {
    throw ShapeError("init_state: memory " + shape_str(memory.shape()) + " expects width " +
                     std::to_string(memory_dim_));
  }
  Tensor mean = reshape(mean_over_axis(memory, 0), {1, memory_dim_});
  DecoderState state;
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    state.layers.emplace_back(init_h_[l](mean), init_c_[l](mean));
  }
  return state;
}

DecoderState AttentiveLstmDecoder::zero_state() const {
  DecoderState state;
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    state.layers.emplace_back(Tensor::zeros({1, config_.d_dec}),
                              Tensor::zeros({1, config_.d_dec}));
  }
  return state;
}

StepResult AttentiveLstmDecoder::step(const Tensor& memory, const DecoderState& state,
                                      int prev_token) const {
  if (prev_token < 0 || static_cast<std::size_t>(prev_token) >= vocab_size_) {
    throw IndexError("decode_step: token id " + std::to_string(prev_token) +
                     " out of range [0, " + std::to_string(vocab_size_) + ")");
  }
  if (state.layers.size() != config_.n_layers) {
    throw ShapeError("decode_step: state has " + std::to_string(state.layers.size()) +
                     " layers, expected " + std::to_string(config_.n_layers));
  }
  Tensor x = embedding_lookup(embedding_, {prev_token});  // [1 x emb]
  StepResult out;
  out.state.layers.reserve(config_.n_layers);
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    auto [h, c] = cells_[l].step(x, state.layers[l].first, state.layers[l].second);
    out.state.layers.emplace_back(h, c);
    x = h;
  }
  const Tensor& top = out.state.layers.back().first;  // [1 x d_dec]
  Tensor scores = matmul(matmul(top, w_attn_), transpose(memory));  // [1 x n]
  Tensor attn = softmax_lastdim(scores);
  Tensor context = matmul(attn, memory);  // [1 x d_mem]
  Tensor logits = output_(concat_lastdim({top, context}));
  out.logits = reshape(logits, {vocab_size_});
  out.attn = reshape(attn, {memory.shape()[0]}).detach();
  return out;
}

double BeamHypothesis::score(double alpha) const {
  if (alpha == 0.0) return log_prob;
  const double len = static_cast<double>(std::max<std::size_t>(tokens.size(), 1));
  return log_prob / std::pow(len, alpha);
}

namespace {

std::vector<double> log_softmax_values(const Tensor& logits) {
  auto v = logits.values();
  double mx = v[0];
  for (double e : v) mx = std::max(mx, e);
  double sum = 0.0;
  for (double e : v) sum += std::exp(e - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - lse;
  return out;
}

bool selectable(int token) { return token != Vocabulary::kPad && token != Vocabulary::kBos; }

// true when a < b lexicographically
bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::vector<int> greedy_decode(const AttentiveLstmDecoder& decoder, const Tensor& memory,
                               const DecoderState& init, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("greedy_decode: max_len must be >= 1");
  NoGradGuard no_grad;
  std::vector<int> tokens;
  DecoderState state = init;
  int prev = Vocabulary::kBos;
  for (std::size_t t = 0; t < max_len; ++t) {
    StepResult res = decoder.step(memory, state, prev);
    auto v = res.logits.values();
    int best = -1;
    for (int id = 0; id < static_cast<int>(v.size()); ++id) {
      if (!selectable(id)) continue;
      if (best < 0 || v[static_cast<std::size_t>(id)] > v[static_cast<std::size_t>(best)]) {
        best = id;  // strict > keeps the lowest id on ties
      }
    }
    if (best == Vocabulary::kEos) break;
    tokens.push_back(best);
    state = std::move(res.state);
    prev = best;
  }
  return tokens;
}

BeamHypothesis beam_search(const AttentiveLstmDecoder& decoder, const Tensor& memory,
                           const DecoderState& init, std::size_t beam_size, std::size_t max_len,
                           double length_norm_alpha) {
  if (beam_size == 0) throw ConfigError("beam_search: beam_size must be >= 1");
  if (max_len == 0) throw ConfigError("beam_search: max_len must be >= 1");
  NoGradGuard no_grad;

  struct Active {
    std::vector<int> tokens;
    double log_prob;
    DecoderState state;
    int prev_token;
  };

  std::vector<Active> active;
  active.push_back({{}, 0.0, init, Vocabulary::kBos});
  std::vector<BeamHypothesis> finished;

  for (std::size_t t = 0; t < max_len && !active.empty(); ++t) {
    struct Candidate {
      std::size_t parent;
      int token;
      double log_prob;
    };
    std::vector<Candidate> candidates;
    std::vector<DecoderState> next_states(active.size());
    for (std::size_t p = 0; p < active.size(); ++p) {
      StepResult res = decoder.step(memory, active[p].state, active[p].prev_token);
      next_states[p] = std::move(res.state);
      std::vector<double> logp = log_softmax_values(res.logits);
      for (int id = 0; id < static_cast<int>(logp.size()); ++id) {
        if (!selectable(id)) continue;
        candidates.push_back({p, id, active[p].log_prob + logp[static_cast<std::size_t>(id)]});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      // tie: lexicographically smaller full token sequence wins
      const auto& ta = active[a.parent].tokens;
      const auto& tb = active[b.parent].tokens;
      std::vector<int> sa = ta, sb = tb;
      sa.push_back(a.token);
      sb.push_back(b.token);
      return lex_less(sa, sb);
    });

    std::vector<Active> next_active;
    const std::size_t take = std::min(beam_size, candidates.size());
    for (std::size_t i = 0; i < take; ++i) {
      const Candidate& cand = candidates[i];
      const Active& parent = active[cand.parent];
      if (cand.token == Vocabulary::kEos) {
        BeamHypothesis hyp;
        hyp.tokens = parent.tokens;
        hyp.log_prob = cand.log_prob;
        hyp.state = next_states[cand.parent];
        hyp.finished = true;
        hyp.ended_with_eos = true;
        finished.push_back(std::move(hyp));
      } else {
        Active a;
        a.tokens = parent.tokens;
        a.tokens.push_back(cand.token);
        a.log_prob = cand.log_prob;
        a.state = next_states[cand.parent];
        a.prev_token = cand.token;
        next_active.push_back(std::move(a));
      }
    }
    active = std::move(next_active);

    // With alpha = 0 scores only fall as tokens append, so once the best
    // finished hypothesis outranks every active prefix we can stop.
    if (length_norm_alpha == 0.0 && !finished.empty() && !active.empty()) {
      double best_finished = finished[0].log_prob;
      for (const auto& f : finished) best_finished = std::max(best_finished, f.log_prob);
      double best_active = active[0].log_prob;
      for (const auto& a : active) best_active = std::max(best_active, a.log_prob);
      if (best_finished >= best_active) break;
    }
  }

  for (auto& a : active) {
    BeamHypothesis hyp;
    hyp.tokens = std::move(a.tokens);
    hyp.log_prob = a.log_prob;
    hyp.state = std::move(a.state);
    hyp.finished = true;
    hyp.ended_with_eos = false;
    finished.push_back(std::move(hyp));
  }

  const BeamHypothesis* best = nullptr;
  for (const auto& hyp : finished) {
    if (!best) {
      best = &hyp;
      continue;
    }
    const double s = hyp.score(length_norm_alpha);
    const double bs = best->score(length_norm_alpha);
    if (s > bs || (s == bs && lex_less(hyp.tokens, best->tokens))) best = &hyp;
  }
  return *best;
}

double teacher_forced_logprob(const AttentiveLstmDecoder& decoder, const Tensor& memory,
                              const DecoderState& init, const std::vector<int>& tokens,
                              bool include_eos) {
  NoGradGuard no_grad;
  DecoderState state = init;
  int prev = Vocabulary::kBos;
  double total = 0.0;
  for (int tok : tokens) {
    StepResult res = decoder.step(memory, state, prev);
    total += log_softmax_values(res.logits)[static_cast<std::size_t>(tok)];
    state = std::move(res.state);
    prev = tok;
  }
  if (include_eos) {
    StepResult res = decoder.step(memory, state, prev);
    total += log_softmax_values(res.logits)[Vocabulary::kEos];
  }
  return total;
}

}  // namespace videoqg
