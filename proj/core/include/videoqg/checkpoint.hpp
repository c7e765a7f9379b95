#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "videoqg/baselines.hpp"
#include "videoqg/model.hpp"
#include "videoqg/train.hpp"
#include "videoqg/vocab.hpp"

namespace videoqg {

// Everything needed to rebuild a model: architecture kind, its configuration
// and the vocabulary sizes it was constructed against.
struct ModelSpec {
  std::string kind = "srcmsa";  // srcmsa | s2vt | imgd
  SrcmsaModelConfig srcmsa;
  BaselineConfig baseline;
  VocabSizes vocabs;
  std::uint64_t init_seed = 1;
};

std::unique_ptr<QgModel> build_model(const ModelSpec& spec);

// Self-contained training snapshot. Saving the same state twice produces
// byte-identical files; parameters round-trip bit-exactly (raw doubles).
struct Checkpoint {
  ModelSpec spec;
  std::vector<std::string> subtitle_vocab_lines;
  std::vector<std::string> question_vocab_lines;
  std::vector<std::string> object_vocab_lines;
  std::size_t step = 0;
  std::string rng_state;
  std::string optimizer_kind = "adam";
  double optimizer_lr = 1e-3;
  double optimizer_clip = 5.0;
  std::size_t optimizer_t = 0;
  std::map<std::string, std::vector<double>> params;  // name-ordered
  std::map<std::string, Optimizer::AdamSlot> adam_slots;
};

Checkpoint make_checkpoint(const QgModel& model, const ModelSpec& spec,
                           const Optimizer& optimizer, std::size_t step,
                           const std::string& rng_state, const Dataset& dataset);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Builds the model described by the checkpoint and copies the stored
// parameters into it.
std::unique_ptr<QgModel> model_from_checkpoint(const Checkpoint& checkpoint);
Optimizer optimizer_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace videoqg
