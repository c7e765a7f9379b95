#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "videoqg/config.hpp"
#include "videoqg/features.hpp"
#include "videoqg/vocab.hpp"

namespace videoqg {

// Synthetic stand-in for a multimodal QG corpus. Clips are built so the
// target question needs BOTH modalities: the action is carried by frames and
// object detections, the entity only by the subtitles.
struct SyntheticTaskSpec {
  std::size_t n_examples = 2500;
  std::size_t n_scenes = 6;  // scene prototypes
  std::size_t n_actions = 8;
  std::size_t n_entities = 12;
  std::size_t frame_dim = 64;
  std::size_t min_frames = 6;
  std::size_t max_frames = 12;
  std::size_t objects_per_frame_max = 4;
  std::size_t scene_objects = 3;   // object types tied to each scene
  std::size_t action_objects = 2;  // object types tied to each action
  std::size_t n_fillers = 30;      // subtitle filler vocabulary
  std::size_t min_subtitle = 4;
  std::size_t max_subtitle = 12;
  std::size_t n_templates = 3;  // question grammar size
  double noise_sigma = 0.05;
  double action_signal = 0.15;  // scale of the action component in frame features
  double train_frac = 0.8;
  double val_frac = 0.1;
  std::uint64_t rng_seed = 17;

  void validate() const;
};

// Deterministic naming for the task's symbol sets; all derive from built-in
// word lists and throw when the spec asks for more than the lists hold.
std::vector<std::string> scene_names(const SyntheticTaskSpec& spec);
std::vector<std::string> action_names(const SyntheticTaskSpec& spec);
std::vector<std::string> entity_names(const SyntheticTaskSpec& spec);
std::vector<std::string> object_names(const SyntheticTaskSpec& spec);  // [0] = "<noobj>"
std::vector<std::string> filler_words(const SyntheticTaskSpec& spec);
// Templates with <entity> / <action> slots, e.g. "what is <entity> doing while <action>".
std::vector<std::vector<std::string>> question_templates(const SyntheticTaskSpec& spec);

struct Dataset {
  std::vector<MultimodalClip> clips;
  std::vector<std::string> splits;  // parallel to clips: train / val / test
  Vocabulary subtitle_vocab;
  Vocabulary question_vocab;
  std::vector<std::string> object_vocab;  // id 0 = "<noobj>"
  SyntheticTaskSpec task;
  bool has_task = false;

  std::vector<std::size_t> split_indices(const std::string& split) const;
  bool operator==(const Dataset& other) const;
};

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index);

Dataset generate_synthetic(const SyntheticTaskSpec& spec);

// Drops clips with fewer than min_frames frames (spec-level ingestion filter;
// a no-op at 0).
void filter_short_clips(Dataset& dataset, std::size_t min_frames);

// On-disk layout under `dir`: manifest.tsv (line-delimited records),
// frames.bin (binary tensor records with per-record CRC32), three vocabulary
// files, and task.ini when the dataset carries a synthetic task spec.
void write_dataset(const Dataset& dataset, const std::string& dir);
Dataset read_dataset(const std::string& dir);

// Tokens with count >= min_count get ids in descending frequency order (ties
// lexicographic) after the reserved ids; everything else maps to UNK.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences, long min_count);

SyntheticTaskSpec task_spec_from_ini(const IniFile& ini);
IniFile task_spec_to_ini(const SyntheticTaskSpec& spec);

// Modality separation probes. `frames_*` uses a nearest-prototype classifier
// over mean-pooled frame features; `subtitle_*` predicts from subtitle tokens
// (entity by membership, action by train-split majority).
struct ModalityAudit {
  double frames_action_acc = 0.0;
  double frames_entity_acc = 0.0;
  double subtitle_entity_acc = 0.0;
  double subtitle_action_acc = 0.0;
};
ModalityAudit modality_audit(const Dataset& dataset);

// Ground-truth slot tokens recovered from a reference question (question-vocab
// ids of the entity / action tokens; -1 when absent).
struct SlotTruth {
  int entity_token = -1;
  int action_token = -1;
};
SlotTruth slot_truth(const Dataset& dataset, const MultimodalClip& clip);

}  // namespace videoqg
