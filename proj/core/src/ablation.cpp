#include "videoqg/ablation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace videoqg {

using nlohmann::json;

const VariantResult& AblationReport::variant(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  throw DataError("ablation report has no variant '" + name + "'");
}

namespace {

ModelSpec variant_spec(const std::string& name, const AblationSettings& settings,
                       const Dataset& dataset, std::uint64_t seed) {
  ModelSpec spec;
  spec.init_seed = seed;
  spec.vocabs.object_vocab = dataset.object_vocab.size();
  spec.vocabs.subtitle_vocab = static_cast<std::size_t>(dataset.subtitle_vocab.size());
  spec.vocabs.question_vocab = static_cast<std::size_t>(dataset.question_vocab.size());
  const std::size_t frame_dim = dataset.clips.empty() ? settings.baseline.frame_dim
                                                      : dataset.clips.front().frame_dim();
  spec.srcmsa = settings.srcmsa;
  spec.srcmsa.dims.frame_dim = frame_dim;
  spec.baseline = settings.baseline;
  spec.baseline.frame_dim = frame_dim;

  if (name == "S2VT") {
    spec.kind = "s2vt";
  } else if (name == "IMGD") {
    spec.kind = "imgd";
  } else if (name == "SA") {
    spec.kind = "srcmsa";
    spec.srcmsa.encoder.use_sre = false;
    spec.srcmsa.encoder.use_subtitles = false;
  } else if (name == "SA+SRE") {
    spec.kind = "srcmsa";
    spec.srcmsa.encoder.use_sre = true;
    spec.srcmsa.encoder.use_subtitles = false;
  } else if (name == "SA+SRE+CMSA") {
    spec.kind = "srcmsa";
    spec.srcmsa.encoder.use_sre = true;
    spec.srcmsa.encoder.use_subtitles = true;
  } else {
    throw ConfigError("unknown ablation variant '" + name + "'");
  }
  return spec;
}

std::vector<std::string> to_tokens(const Vocabulary& vocab, const std::vector<int>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab.token(id));
  return out;
}

// Corpus metrics with the generation-time convention that an empty hypothesis
// scores 0 on the pairwise metrics.
MetricReport evaluate_generated(const std::vector<EvalPair>& corpus) {
  MetricReport report;
  report.bleu1 = bleu(corpus, 1);
  report.bleu4 = bleu(corpus, 4);
  report.cider = cider(corpus);
  double rouge_sum = 0.0, meteor_sum = 0.0;
  for (const auto& pair : corpus) {
    if (pair.hypothesis.empty()) continue;
    rouge_sum += rouge_l(pair);
    meteor_sum += meteor_lite(pair);
  }
  report.rouge_l = rouge_sum / static_cast<double>(corpus.size());
  report.meteor = meteor_sum / static_cast<double>(corpus.size());
  return report;
}

}  // namespace

SlotAccuracy slot_accuracy(const Dataset& dataset, const std::vector<std::size_t>& indices,
                           const std::vector<std::vector<int>>& generated) {
  if (indices.size() != generated.size()) {
    throw DataError("slot_accuracy: generated count does not match clip count");
  }
  SlotAccuracy acc;
  std::size_t entity_total = 0, action_total = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const SlotTruth truth = slot_truth(dataset, dataset.clips[indices[i]]);
    const auto& hyp = generated[i];
    if (truth.entity_token >= 0) {
      ++entity_total;
      if (std::find(hyp.begin(), hyp.end(), truth.entity_token) != hyp.end()) {
        acc.entity += 1.0;
      }
    }
    if (truth.action_token >= 0) {
      ++action_total;
      if (std::find(hyp.begin(), hyp.end(), truth.action_token) != hyp.end()) {
        acc.action += 1.0;
      }
    }
  }
  if (entity_total) acc.entity /= static_cast<double>(entity_total);
  if (action_total) acc.action /= static_cast<double>(action_total);
  return acc;
}

AblationReport run_ablation(const Dataset& dataset, const AblationSettings& settings,
                            std::ostream* progress) {
  if (settings.seeds.empty()) throw ConfigError("ablation: needs at least one seed");
  const auto test_idx = dataset.split_indices("test");
  if (test_idx.empty()) throw DataError("ablation: dataset has no test split");

  AblationReport report;
  report.variant_order = settings.variants;
  report.percents = settings.percents;

  for (const auto& variant_name : settings.variants) {
    VariantResult result;
    result.name = variant_name;
    std::vector<std::vector<std::string>> generated_corpus;  // pooled across seeds

    for (std::uint64_t seed : settings.seeds) {
      if (progress) {
        (*progress) << "[ablate] " << variant_name << " seed " << seed << ": training..."
                    << std::endl;
      }
      const ModelSpec spec = variant_spec(variant_name, settings, dataset, seed);
      std::unique_ptr<QgModel> model = build_model(spec);
      TrainConfig train_config = settings.train;
      train_config.seed = seed;
      Optimizer optimizer(train_config.optimizer, train_config.lr, train_config.grad_clip_norm);
      TrainResult trained = train(*model, dataset, train_config, optimizer);

      std::vector<std::vector<int>> generated;
      std::vector<EvalPair> corpus;
      generated.reserve(test_idx.size());
      for (std::size_t i : test_idx) {
        std::vector<int> hyp = generate_greedy(*model, dataset.clips[i], settings.max_len);
        EvalPair pair;
        pair.hypothesis = to_tokens(dataset.question_vocab, hyp);
        pair.references.push_back(to_tokens(dataset.question_vocab, dataset.clips[i].question));
        corpus.push_back(std::move(pair));
        generated_corpus.push_back(to_tokens(dataset.question_vocab, hyp));
        generated.push_back(std::move(hyp));
      }

      SeedRun run;
      run.seed = seed;
      run.metrics = evaluate_generated(corpus);
      const SlotAccuracy acc = slot_accuracy(dataset, test_idx, generated);
      run.entity_acc = acc.entity;
      run.action_acc = acc.action;
      run.final_train_loss = trained.final_train_loss;
      run.steps = trained.steps_run;
      if (progress) {
        (*progress) << "[ablate] " << variant_name << " seed " << seed << ": bleu4="
                    << run.metrics.bleu4 << " entity=" << run.entity_acc
                    << " action=" << run.action_acc << std::endl;
      }
      result.runs.push_back(std::move(run));
    }

    const double n = static_cast<double>(result.runs.size());
    for (const auto& run : result.runs) {
      result.mean_metrics.bleu1 += run.metrics.bleu1 / n;
      result.mean_metrics.bleu4 += run.metrics.bleu4 / n;
      result.mean_metrics.rouge_l += run.metrics.rouge_l / n;
      result.mean_metrics.cider += run.metrics.cider / n;
      result.mean_metrics.meteor += run.metrics.meteor / n;
      result.mean_entity_acc += run.entity_acc / n;
      result.mean_action_acc += run.action_acc / n;
    }
    // degenerate corner: a variant that only emits empty questions
    bool any_tokens = false;
    for (const auto& sentence : generated_corpus) {
      if (!sentence.empty()) any_tokens = true;
    }
    if (any_tokens) {
      result.diversity = coverage_grid(build_stats(generated_corpus), settings.percents);
    } else {
      result.diversity.percents = settings.percents;
      for (auto& v : result.diversity.values) {
        v.assign(settings.percents.size(), std::numeric_limits<double>::quiet_NaN());
      }
    }
    report.variants.push_back(std::move(result));
  }
  return report;
}

namespace {

std::string format_cell(double value, double scale) {
  if (std::isnan(value)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << value * scale;
  return os.str();
}

void pad_to(std::string& s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
}

}  // namespace

std::string render_ablation_table(const AblationReport& report) {
  std::ostringstream out;
  out << "correctness (BLEU/ROUGE/METEOR x100, CIDEr x10; slot accuracies x100)\n";
  const std::vector<std::string> headers = {"model",  "BLEU",   "BLEU-4", "ROUGE",
                                            "CIDEr",  "METEOR", "entity", "action"};
  std::vector<std::vector<std::string>> rows;
  rows.push_back(headers);
  for (const auto& v : report.variants) {
    rows.push_back({v.name, format_cell(v.mean_metrics.bleu1, 100.0),
                    format_cell(v.mean_metrics.bleu4, 100.0),
                    format_cell(v.mean_metrics.rouge_l, 100.0),
                    format_cell(v.mean_metrics.cider, 10.0),
                    format_cell(v.mean_metrics.meteor, 100.0),
                    format_cell(v.mean_entity_acc, 100.0),
                    format_cell(v.mean_action_acc, 100.0)});
  }
  std::vector<std::size_t> widths(headers.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      pad_to(cell, widths[c] + 2);
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }

  out << "\nfrequent word coverage (x100, lower is more diverse)\n";
  std::vector<std::vector<std::string>> div_rows;
  {
    std::vector<std::string> header = {"model"};
    for (std::size_t c = 0; c < 4; ++c) {
      for (double p : report.percents) {
        std::ostringstream h;
        h << category_name(static_cast<DiversityCategory>(c)) << '@' << p << '%';
        header.push_back(h.str());
      }
    }
    div_rows.push_back(std::move(header));
  }
  for (const auto& v : report.variants) {
    std::vector<std::string> row = {v.name};
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t pi = 0; pi < report.percents.size(); ++pi) {
        row.push_back(format_cell(v.diversity.values[c][pi], 100.0));
      }
    }
    div_rows.push_back(std::move(row));
  }
  std::vector<std::size_t> div_widths(div_rows[0].size(), 0);
  for (const auto& row : div_rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      div_widths[c] = std::max(div_widths[c], row[c].size());
    }
  }
  for (const auto& row : div_rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      pad_to(cell, div_widths[c] + 2);
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

namespace {

json metrics_to_json(const MetricReport& m) {
  return {{"bleu1", m.bleu1}, {"bleu4", m.bleu4},   {"rouge_l", m.rouge_l},
          {"cider", m.cider}, {"meteor", m.meteor}};
}

MetricReport metrics_from_json(const json& j) {
  MetricReport m;
  m.bleu1 = j.at("bleu1").get<double>();
  m.bleu4 = j.at("bleu4").get<double>();
  m.rouge_l = j.at("rouge_l").get<double>();
  m.cider = j.at("cider").get<double>();
  m.meteor = j.at("meteor").get<double>();
  return m;
}

json grid_to_json(const DiversityGrid& grid) {
  json j;
  for (std::size_t c = 0; c < 4; ++c) {
    json values = json::array();
    for (double v : grid.values[c]) {
      if (std::isnan(v)) {
        values.push_back(nullptr);
      } else {
        values.push_back(v);
      }
    }
    j[category_name(static_cast<DiversityCategory>(c))] = values;
  }
  return j;
}

DiversityGrid grid_from_json(const json& j, const std::vector<double>& percents) {
  DiversityGrid grid;
  grid.percents = percents;
  for (std::size_t c = 0; c < 4; ++c) {
    for (const auto& v : j.at(category_name(static_cast<DiversityCategory>(c)))) {
      grid.values[c].push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                           : v.get<double>());
    }
  }
  return grid;
}

}  // namespace

void write_ablation_jsonl(const AblationReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write report '" + path + "'");
  json meta = {{"type", "meta"},
               {"variants", report.variant_order},
               {"percents", report.percents}};
  out << meta.dump() << '\n';
  for (const auto& v : report.variants) {
    for (const auto& run : v.runs) {
      json j = {{"type", "run"},
                {"variant", v.name},
                {"seed", run.seed},
                {"metrics", metrics_to_json(run.metrics)},
                {"entity_acc", run.entity_acc},
                {"action_acc", run.action_acc},
                {"final_train_loss", run.final_train_loss},
                {"steps", run.steps}};
      out << j.dump() << '\n';
    }
    json j = {{"type", "variant"},
              {"variant", v.name},
              {"metrics", metrics_to_json(v.mean_metrics)},
              {"entity_acc", v.mean_entity_acc},
              {"action_acc", v.mean_action_acc},
              {"diversity", grid_to_json(v.diversity)}};
    out << j.dump() << '\n';
  }
}

AblationReport read_ablation_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read report '" + path + "'");
  AblationReport report;
  std::string line;
  std::map<std::string, VariantResult> variants;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(std::string("report: bad JSON line: ") + e.what());
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "meta") {
      report.variant_order = j.at("variants").get<std::vector<std::string>>();
      report.percents = j.at("percents").get<std::vector<double>>();
    } else if (type == "run") {
      SeedRun run;
      run.seed = j.at("seed").get<std::uint64_t>();
      run.metrics = metrics_from_json(j.at("metrics"));
      run.entity_acc = j.at("entity_acc").get<double>();
      run.action_acc = j.at("action_acc").get<double>();
      run.final_train_loss = j.at("final_train_loss").get<double>();
      run.steps = j.at("steps").get<std::size_t>();
      variants[j.at("variant").get<std::string>()].runs.push_back(run);
    } else if (type == "variant") {
      const std::string name = j.at("variant").get<std::string>();
      VariantResult& v = variants[name];
      v.name = name;
      v.mean_metrics = metrics_from_json(j.at("metrics"));
      v.mean_entity_acc = j.at("entity_acc").get<double>();
      v.mean_action_acc = j.at("action_acc").get<double>();
      v.diversity = grid_from_json(j.at("diversity"), report.percents);
    } else {
      throw DataError("report: unknown record type '" + type + "'");
    }
  }
  for (const auto& name : report.variant_order) {
    auto it = variants.find(name);
    if (it == variants.end()) throw DataError("report: missing variant '" + name + "'");
    report.variants.push_back(it->second);
  }
  return report;
}

}  // namespace videoqg
