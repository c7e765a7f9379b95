#pragma once

#include <string>
#include <vector>

#include "videoqg/params.hpp"
#include "videoqg/tensor.hpp"

namespace videoqg {

// One training example: per-frame visual features, per-frame detected object
// ids, subtitle token ids, and the target question (training only).
struct MultimodalClip {
  std::string clip_id;
  Tensor frames;                           // [n_frame x d_F]
  std::vector<std::vector<int>> objects;   // object ids per frame, may be empty
  std::vector<int> subtitle;               // may be empty (video-only scenario)
  std::vector<int> question;

  std::size_t n_frames() const { return frames.defined() ? frames.shape()[0] : 0; }
  std::size_t frame_dim() const { return frames.defined() ? frames.shape()[1] : 0; }
  std::size_t n_subtitle_tokens() const { return subtitle.size(); }
};

// Throws on malformed clips (no frames, object list length mismatch, ids out
// of the given vocabulary sizes).
void validate_clip(const MultimodalClip& clip, std::size_t object_vocab,
                   std::size_t subtitle_vocab, std::size_t question_vocab);

// Learned object / subtitle-word embeddings. Object id 0 is the designated
// no-object row used for frames with an empty detection list.
struct EmbeddingTables {
  static constexpr int kNoObjectId = 0;

  Tensor object_table;    // [V_obj x d_e]
  Tensor subtitle_table;  // [V_sub x d_e]

  std::size_t embed_dim() const { return object_table.shape()[1]; }

  static EmbeddingTables create(ParameterStore& store, const std::string& prefix,
                                std::size_t object_vocab, std::size_t subtitle_vocab,
                                std::size_t embed_dim, std::mt19937_64& rng);
};

// Row i = mean of the embeddings of frame i's objects (ids pooled as a sorted
// multiset so the result is exactly permutation invariant). An empty frame
// yields the no-object row.
Tensor pool_objects(const MultimodalClip& clip, const EmbeddingTables& tables);

// Semantic-rich embedding: (frames W_proj) ⊙ object_embs, rowwise.
Tensor sre_fuse(const Tensor& frames, const Tensor& object_embs, const Tensor& w_proj);

// Row i = subtitle_table[token_i]; empty subtitle gives a [0 x d_e] tensor.
Tensor embed_subtitles(const MultimodalClip& clip, const EmbeddingTables& tables);

}  // namespace videoqg
