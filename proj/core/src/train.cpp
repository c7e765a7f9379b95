#include "videoqg/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace videoqg {

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

const char* optimizer_kind_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ConfigError("train: lr must be > 0");
  if (batch_size == 0) throw ConfigError("train: batch_size must be > 0");
  if (max_steps == 0) throw ConfigError("train: max_steps must be > 0");
  if (grad_clip_norm < 0.0) throw ConfigError("train: grad_clip_norm must be >= 0");
  if (eval_every == 0) throw ConfigError("train: eval_every must be > 0");
}

Tensor cross_entropy_loss(const Tensor& logits, const std::vector<int>& targets,
                          const std::vector<std::uint8_t>& pad_mask) {
  if (logits.rank() != 2 || logits.shape()[0] != targets.size()) {
    throw ShapeError("cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                     std::to_string(targets.size()) + " targets");
  }
  if (!pad_mask.empty() && pad_mask.size() != targets.size()) {
    throw ShapeError("cross_entropy: mask length " + std::to_string(pad_mask.size()) +
                     " does not match targets");
  }
  std::size_t count = targets.size();
  std::vector<double> mask_values(targets.size(), 1.0);
  if (!pad_mask.empty()) {
    count = 0;
    for (std::size_t i = 0; i < pad_mask.size(); ++i) {
      mask_values[i] = pad_mask[i] ? 1.0 : 0.0;
      if (pad_mask[i]) ++count;
    }
  }
  if (count == 0) throw DataError("cross_entropy: all target positions are padding");
  Tensor picked = pick_per_row(log_softmax_lastdim(logits), targets);
  Tensor masked = mul(picked, Tensor::from({targets.size()}, std::move(mask_values)));
  return scale(sum_all(masked), -1.0 / static_cast<double>(count));
}

Tensor sequence_nll_sum(const Tensor& logits, const std::vector<int>& targets) {
  Tensor picked = pick_per_row(log_softmax_lastdim(logits), targets);
  return scale(sum_all(picked), -1.0);
}

Optimizer::Optimizer(OptimizerKind kind, double lr, double clip_norm)
    : kind_(kind), lr_(lr), clip_norm_(clip_norm) {
  if (lr <= 0.0) throw ConfigError("optimizer: lr must be > 0");
  if (clip_norm < 0.0) throw ConfigError("optimizer: clip_norm must be >= 0");
}

void Optimizer::restore(std::map<std::string, AdamSlot> slots, std::size_t t) {
  slots_ = std::move(slots);
  t_ = t;
}

void Optimizer::step(ParameterStore& params) {
  double sq_norm = 0.0;
  for (const auto& [name, tensor] : params.items()) {
    for (double g : tensor.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in parameter '" + name + "'");
      }
      sq_norm += g * g;
    }
  }
  double factor = 1.0;
  const double norm = std::sqrt(sq_norm);
  if (clip_norm_ > 0.0 && norm > clip_norm_) factor = clip_norm_ / norm;

  if (kind_ == OptimizerKind::kSgd) {
    for (const auto& [name, tensor] : params.items()) {
      Tensor handle = tensor;  // shared node, safe to mutate through a copy
      auto values = handle.mutable_values();
      auto grads = handle.mutable_grad();
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (factor != 1.0) grads[i] *= factor;
        values[i] -= lr_ * grads[i];
      }
    }
    ++t_;
    return;
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (const auto& [name, tensor] : params.items()) {
    Tensor handle = tensor;
    auto values = handle.mutable_values();
    auto grads = handle.mutable_grad();
    AdamSlot& slot = slots_[name];
    if (slot.m.size() != values.size()) {
      slot.m.assign(values.size(), 0.0);
      slot.v.assign(values.size(), 0.0);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (factor != 1.0) grads[i] *= factor;
      const double g = grads[i];
      slot.m[i] = kBeta1 * slot.m[i] + (1.0 - kBeta1) * g;
      slot.v[i] = kBeta2 * slot.v[i] + (1.0 - kBeta2) * g * g;
      const double m_hat = slot.m[i] / bc1;
      const double v_hat = slot.v[i] / bc2;
      values[i] -= lr_ * m_hat / (std::sqrt(v_hat) + kEps);
    }
  }
}

namespace {

// Summed NLL and token count for one clip under teacher forcing.
std::pair<Tensor, std::size_t> clip_nll(const QgModel& model, const MultimodalClip& clip,
                                        std::mt19937_64* dropout_rng) {
  std::vector<int> targets = clip.question;
  targets.push_back(Vocabulary::kEos);
  Tensor logits = teacher_forced_logits(model, clip, dropout_rng);
  return {sequence_nll_sum(logits, targets), targets.size()};
}

struct ParamSnapshot {
  std::map<std::string, std::vector<double>> values;

  static ParamSnapshot capture(const ParameterStore& params) {
    ParamSnapshot snap;
    for (const auto& [name, tensor] : params.items()) {
      auto v = tensor.values();
      snap.values.emplace(name, std::vector<double>(v.begin(), v.end()));
    }
    return snap;
  }
  void restore(ParameterStore& params) const {
    for (const auto& [name, tensor] : params.items()) {
      Tensor handle = tensor;
      const auto& stored = values.at(name);
      auto dst = handle.mutable_values();
      std::copy(stored.begin(), stored.end(), dst.begin());
    }
  }
};

}  // namespace

double evaluate_nll(const QgModel& model, const Dataset& dataset,
                    const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw DataError("evaluate_nll: no clips");
  NoGradGuard no_grad;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i : indices) {
    auto [nll, n] = clip_nll(model, dataset.clips[i], nullptr);
    total += nll.item();
    count += n;
  }
  return total / static_cast<double>(count);
}

TrainResult train(QgModel& model, const Dataset& dataset, const TrainConfig& config,
                  Optimizer& optimizer, std::ostream* metrics_log) {
  config.validate();
  const auto train_idx = dataset.split_indices("train");
  const auto val_idx = dataset.split_indices("val");
  if (train_idx.empty()) throw DataError("train: dataset has no train split");

  std::mt19937_64 shuffle_rng(derive_seed(config.seed, 101, 0));
  std::mt19937_64 dropout_rng(derive_seed(config.seed, 102, 0));

  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  std::optional<ParamSnapshot> best_params;
  std::size_t evals_since_best = 0;

  std::vector<std::size_t> order = train_idx;
  std::size_t cursor = order.size();  // force an initial shuffle
  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    model.params().zero_grads();
    Tensor batch_nll;
    std::size_t batch_tokens = 0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      if (cursor >= order.size()) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      const MultimodalClip& clip = dataset.clips[order[cursor++]];
      auto [nll, n] = clip_nll(model, clip, &dropout_rng);
      batch_nll = batch_nll.defined() ? add(batch_nll, nll) : nll;
      batch_tokens += n;
    }
    Tensor loss = scale(batch_nll, 1.0 / static_cast<double>(batch_tokens));
    loss.backward();
    optimizer.step(model.params());

    TraceRow row;
    row.step = step;
    row.train_loss = loss.item();
    result.final_train_loss = row.train_loss;

    const bool eval_now = !val_idx.empty() && (step % config.eval_every == 0 ||
                                               step == config.max_steps);
    if (eval_now) {
      row.has_val = true;
      row.val_loss = evaluate_nll(model, dataset, val_idx);
      if (row.val_loss < result.best_val) {
        result.best_val = row.val_loss;
        result.best_step = step;
        best_params = ParamSnapshot::capture(model.params());
        evals_since_best = 0;
      } else {
        ++evals_since_best;
      }
    }
    result.trace.push_back(row);
    if (metrics_log) {
      (*metrics_log) << row.step << ' ' << row.train_loss << ' ';
      if (row.has_val) {
        (*metrics_log) << row.val_loss;
      } else {
        (*metrics_log) << '-';
      }
      (*metrics_log) << '\n';
    }
    result.steps_run = step;
    if (config.patience > 0 && evals_since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }

  if (best_params) best_params->restore(model.params());
  return result;
}

}  // namespace videoqg
