#include "videoqg/features.hpp"

#include <algorithm>

namespace videoqg {

void validate_clip(const MultimodalClip& clip, std::size_t object_vocab,
                   std::size_t subtitle_vocab, std::size_t question_vocab) {
  if (!clip.frames.defined() || clip.frames.rank() != 2 || clip.frames.shape()[0] == 0) {
    throw DataError("clip '" + clip.clip_id + "': needs at least one frame");
  }
  if (clip.objects.size() != clip.n_frames()) {
    throw DataError("clip '" + clip.clip_id + "': " + std::to_string(clip.objects.size()) +
                    " object lists for " + std::to_string(clip.n_frames()) + " frames");
  }
  auto check_ids = [&](const std::vector<int>& ids, std::size_t vocab, const char* what) {
    for (int id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
        throw IndexError("clip '" + clip.clip_id + "': " + what + " id " + std::to_string(id) +
                         " out of range [0, " + std::to_string(vocab) + ")");
      }
    }
  };
  for (const auto& frame_objects : clip.objects) check_ids(frame_objects, object_vocab, "object");
  check_ids(clip.subtitle, subtitle_vocab, "subtitle");
  check_ids(clip.question, question_vocab, "question");
}

EmbeddingTables EmbeddingTables::create(ParameterStore& store, const std::string& prefix,
                                        std::size_t object_vocab, std::size_t subtitle_vocab,
                                        std::size_t embed_dim, std::mt19937_64& rng) {
  EmbeddingTables t;
  t.object_table =
      store.add(prefix + ".object_table", normal_init({object_vocab, embed_dim}, 0.0, 0.1, rng));
  t.subtitle_table = store.add(prefix + ".subtitle_table",
                               normal_init({subtitle_vocab, embed_dim}, 0.0, 0.1, rng));
  return t;
}

Tensor pool_objects(const MultimodalClip& clip, const EmbeddingTables& tables) {
  const std::size_t d = tables.embed_dim();
  std::vector<Tensor> rows;
  rows.reserve(clip.n_frames());
  for (const auto& frame_objects : clip.objects) {
    std::vector<int> ids = frame_objects;
    if (ids.empty()) {
      ids.push_back(EmbeddingTables::kNoObjectId);
    } else {
      std::sort(ids.begin(), ids.end());
    }
    Tensor embs = embedding_lookup(tables.object_table, ids);
    rows.push_back(reshape(mean_over_axis(embs, 0), {1, d}));
  }
  return concat_rows(rows);
}

Tensor sre_fuse(const Tensor& frames, const Tensor& object_embs, const Tensor& w_proj) {
  if (frames.rank() != 2 || object_embs.rank() != 2 || w_proj.rank() != 2 ||
      frames.shape()[0] != object_embs.shape()[0] || frames.shape()[1] != w_proj.shape()[0] ||
      w_proj.shape()[1] != object_embs.shape()[1]) {
    throw ShapeError("sre_fuse: frames " + shape_str(frames.shape()) + ", objects " +
                     shape_str(object_embs.shape()) + ", projection " +
                     shape_str(w_proj.shape()) + " are inconsistent");
  }
  return mul(matmul(frames, w_proj), object_embs);
}

Tensor embed_subtitles(const MultimodalClip& clip, const EmbeddingTables& tables) {
  return embedding_lookup(tables.subtitle_table, clip.subtitle);
}

}  // namespace videoqg
