#include "videoqg/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace videoqg {

CorpusStats build_stats(const std::vector<std::vector<std::string>>& corpus,
                        const Tagger& tagger) {
  if (corpus.empty()) throw DataError("build_stats: empty corpus");
  CorpusStats stats;
  auto bump = [&stats](DiversityCategory c, const std::string& key) {
    ++stats.counts[static_cast<std::size_t>(c)][key];
    ++stats.totals[static_cast<std::size_t>(c)];
  };
  for (const auto& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      bump(DiversityCategory::kUnigram, sentence[i]);
      if (i + 1 < sentence.size()) {
        bump(DiversityCategory::kBigram, sentence[i] + ' ' + sentence[i + 1]);
      }
      switch (tagger(sentence[i])) {
        case PosTag::kNoun: bump(DiversityCategory::kNoun, sentence[i]); break;
        case PosTag::kVerb: bump(DiversityCategory::kVerb, sentence[i]); break;
        case PosTag::kOther: break;
      }
    }
  }
  return stats;
}

double frequent_word_coverage(const CorpusStats& stats, DiversityCategory category,
                              double percent) {
  if (percent <= 0.0 || percent > 100.0) {
    throw ConfigError("frequent_word_coverage: percent must be in (0, 100]");
  }
  const auto& table = stats.table(category);
  if (table.empty()) {
    throw DataError(std::string("frequent_word_coverage: no ") + category_name(category) +
                    " occurrences, metric undefined");
  }
  std::vector<std::pair<std::string, long>> ranked(table.begin(), table.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const auto n_types = static_cast<double>(ranked.size());
  std::size_t k = static_cast<std::size_t>(std::ceil(percent / 100.0 * n_types));
  k = std::clamp<std::size_t>(k, 1, ranked.size());
  long covered = 0;
  for (std::size_t i = 0; i < k; ++i) covered += ranked[i].second;
  return static_cast<double>(covered) / static_cast<double>(stats.total(category));
}

DiversityGrid coverage_grid(const CorpusStats& stats, const std::vector<double>& percents) {
  DiversityGrid grid;
  grid.percents = percents;
  for (std::size_t c = 0; c < 4; ++c) {
    for (double p : percents) {
      double value = std::numeric_limits<double>::quiet_NaN();
      if (!stats.counts[c].empty()) {
        value = frequent_word_coverage(stats, static_cast<DiversityCategory>(c), p);
      }
      grid.values[c].push_back(value);
    }
  }
  return grid;
}

}  // namespace videoqg
