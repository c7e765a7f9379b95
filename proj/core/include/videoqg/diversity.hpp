#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "videoqg/errors.hpp"

namespace videoqg {

enum class PosTag { kNoun, kVerb, kOther };

// Deterministic tagger: bundled lexicon lookup, then suffix heuristics
// (-ing/-ed verbs, -tion/-ness nouns), else kOther.
PosTag lexicon_tagger(const std::string& token);

enum class DiversityCategory : std::size_t { kUnigram = 0, kBigram = 1, kNoun = 2, kVerb = 3 };

inline const char* category_name(DiversityCategory c) {
  switch (c) {
    case DiversityCategory::kUnigram: return "unigram";
    case DiversityCategory::kBigram: return "bigram";
    case DiversityCategory::kNoun: return "noun";
    case DiversityCategory::kVerb: return "verb";
  }
  return "?";
}

using Tagger = std::function<PosTag(const std::string&)>;

struct CorpusStats {
  std::array<std::map<std::string, long>, 4> counts;  // indexed by DiversityCategory
  std::array<long, 4> totals = {0, 0, 0, 0};

  const std::map<std::string, long>& table(DiversityCategory c) const {
    return counts[static_cast<std::size_t>(c)];
  }
  long total(DiversityCategory c) const { return totals[static_cast<std::size_t>(c)]; }
};

// Unigrams over all tokens, bigrams over adjacent pairs within a sentence,
// noun/verb tables restricted by the tagger.
CorpusStats build_stats(const std::vector<std::vector<std::string>>& corpus,
                        const Tagger& tagger = lexicon_tagger);

// Fraction of token occurrences covered by the top p% most frequent types of
// the category (k = ceil(p/100 * types), at least 1; ranking by count then
// lexicographic type). Lower means a more diverse corpus.
double frequent_word_coverage(const CorpusStats& stats, DiversityCategory category,
                              double percent);

struct DiversityGrid {
  std::vector<double> percents;
  // values[category][percent index]; NaN where the category table is empty
  std::array<std::vector<double>, 4> values;
};

DiversityGrid coverage_grid(const CorpusStats& stats, const std::vector<double>& percents);

}  // namespace videoqg
