#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "videoqg/data.hpp"
#include "videoqg/model.hpp"

namespace videoqg {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind optimizer_kind_from_string(const std::string& name);
const char* optimizer_kind_name(OptimizerKind kind);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double lr = 1e-3;
  std::size_t batch_size = 16;
  std::size_t max_steps = 2000;
  double grad_clip_norm = 5.0;
  std::size_t eval_every = 100;
  std::size_t patience = 0;  // evals without val improvement before stopping; 0 = off
  std::uint64_t seed = 0;

  void validate() const;
};

// Mean negative log-likelihood over unmasked positions; an empty mask means
// every position counts. Throws when no position survives the mask.
Tensor cross_entropy_loss(const Tensor& logits, const std::vector<int>& targets,
                          const std::vector<std::uint8_t>& pad_mask = {});

// Summed NLL over all positions (batch aggregation building block).
Tensor sequence_nll_sum(const Tensor& logits, const std::vector<int>& targets);

// SGD or bias-corrected Adam (beta1 0.9, beta2 0.999, eps 1e-8) with global
// gradient-norm clipping applied first. NaN/Inf gradients abort with the
// offending parameter named.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double clip_norm);

  void step(ParameterStore& params);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  double clip_norm() const { return clip_norm_; }
  std::size_t step_count() const { return t_; }

  struct AdamSlot {
    std::vector<double> m, v;
  };
  const std::map<std::string, AdamSlot>& slots() const { return slots_; }
  void restore(std::map<std::string, AdamSlot> slots, std::size_t t);

 private:
  OptimizerKind kind_;
  double lr_;
  double clip_norm_;
  std::size_t t_ = 0;
  std::map<std::string, AdamSlot> slots_;
};

struct TraceRow {
  std::size_t step = 0;
  double train_loss = 0.0;
  bool has_val = false;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  std::size_t steps_run = 0;
  double best_val = 0.0;
  std::size_t best_step = 0;
  bool early_stopped = false;
  double final_train_loss = 0.0;
};

// Teacher-forced training over the dataset's train split with seeded epoch
// shuffling, periodic validation, best-parameter retention and optional early
// stopping. Single-threaded and deterministic for a fixed seed. When
// `metrics_log` is given, emits one "step train_loss val_loss" line per step
// (val_loss is "-" between evaluations).
TrainResult train(QgModel& model, const Dataset& dataset, const TrainConfig& config,
                  Optimizer& optimizer, std::ostream* metrics_log = nullptr);

// Mean teacher-forced NLL of the given clips under frozen parameters.
double evaluate_nll(const QgModel& model, const Dataset& dataset,
                    const std::vector<std::size_t>& indices);

}  // namespace videoqg
