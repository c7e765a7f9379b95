#pragma once

#include <string>
#include <vector>

#include "videoqg/errors.hpp"

namespace videoqg {

// Hypothesis with one or more references, already tokenized.
struct EvalPair {
  std::vector<std::string> hypothesis;
  std::vector<std::vector<std::string>> references;
};

// Lowercases, detaches punctuation into separate tokens, splits on
// whitespace. Fixed here so metric outputs are reproducible.
std::vector<std::string> tokenize(const std::string& line);

// Suffix-stripping stemmer used by the meteor alignment: removes the first
// matching suffix of {ing, ed, es, s} when at least three characters remain.
std::string stem(const std::string& token);

// Corpus-level BLEU with modified n-gram precision over orders 1..max_n,
// geometric mean and brevity penalty. Orders with no hypothesis n-grams
// anywhere in the corpus are skipped; a zero match count on a present order
// is replaced by epsilon = 1e-9.
double bleu(const std::vector<EvalPair>& corpus, int max_n);

// LCS-based F-measure with beta = 1.2 (recall-weighted); max over references.
double rouge_l(const EvalPair& pair);
double rouge_l_corpus(const std::vector<EvalPair>& corpus);

// tf-idf n-gram cosine consensus (n = 1..4, idf from the reference corpus,
// document frequency floored at 1), averaged over n and references, x10.
double cider(const std::vector<EvalPair>& corpus);

// Unigram-alignment score without external resources: exact matches first,
// then stem matches, both paired left-to-right in order; F = 10PR/(R+9P),
// fragmentation penalty 0.5 * (chunks/matches)^3; max over references.
double meteor_lite(const EvalPair& pair);
double meteor_lite_corpus(const std::vector<EvalPair>& corpus);

struct MetricReport {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;
  double meteor = 0.0;
};

MetricReport evaluate_corpus(const std::vector<EvalPair>& corpus);

// One hypothesis per line; the reference file may carry several
// tab-separated references per line. Line counts must agree.
std::vector<EvalPair> read_eval_corpus(const std::string& hyp_path, const std::string& ref_path);

}  // namespace videoqg
