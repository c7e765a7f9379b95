#pragma once

#include <iosfwd>

#include "videoqg/checkpoint.hpp"
#include "videoqg/diversity.hpp"
#include "videoqg/metrics.hpp"
#include "videoqg/train.hpp"

namespace videoqg {

// The five comparison rows: the two baselines plus the incremental
// configurations of the main model.
struct AblationSettings {
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  TrainConfig train;
  SrcmsaModelConfig srcmsa;    // flags overridden per variant
  BaselineConfig baseline;
  std::size_t max_len = 30;
  std::vector<double> percents = {0.1, 1.0, 10.0};
  std::vector<std::string> variants = {"S2VT", "IMGD", "SA", "SA+SRE", "SA+SRE+CMSA"};
};

struct SeedRun {
  std::uint64_t seed = 0;
  MetricReport metrics;
  double entity_acc = 0.0;
  double action_acc = 0.0;
  double final_train_loss = 0.0;
  std::size_t steps = 0;
};

struct VariantResult {
  std::string name;
  std::vector<SeedRun> runs;
  MetricReport mean_metrics;
  double mean_entity_acc = 0.0;
  double mean_action_acc = 0.0;
  DiversityGrid diversity;  // over the generated questions pooled across seeds
};

struct AblationReport {
  std::vector<std::string> variant_order;
  std::vector<VariantResult> variants;
  std::vector<double> percents;

  const VariantResult& variant(const std::string& name) const;
};

// Trains every variant with an identical budget on each seed, decodes the
// test split greedily and scores correctness, slot accuracy and diversity.
AblationReport run_ablation(const Dataset& dataset, const AblationSettings& settings,
                            std::ostream* progress = nullptr);

// Accuracy of reproducing the reference question's entity / action token in
// the generated question.
struct SlotAccuracy {
  double entity = 0.0;
  double action = 0.0;
};
SlotAccuracy slot_accuracy(const Dataset& dataset, const std::vector<std::size_t>& indices,
                           const std::vector<std::vector<int>>& generated);

std::string render_ablation_table(const AblationReport& report);
void write_ablation_jsonl(const AblationReport& report, const std::string& path);
AblationReport read_ablation_jsonl(const std::string& path);

}  // namespace videoqg
