#pragma once

// Brute-force reference implementations of the evaluation metrics. These
// deliberately avoid the production code paths: n-grams are materialized as
// token-vector lists and matched by scanning, the LCS uses a full quadratic
// table, tf-idf vectors are explicit sorted lists, and the meteor alignment
// walks both sentences with used-flag arrays.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "videoqg/metrics.hpp"

namespace videoqg::oracle {

using Tokens = std::vector<std::string>;
using Ngram = std::vector<std::string>;

inline std::vector<Ngram> list_ngrams(const Tokens& tokens, std::size_t n) {
  std::vector<Ngram> out;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace_back(tokens.begin() + static_cast<long>(i),
                     tokens.begin() + static_cast<long>(i + n));
  }
  return out;
}

inline long count_in(const std::vector<Ngram>& haystack, const Ngram& needle) {
  long c = 0;
  for (const auto& g : haystack) {
    if (g == needle) ++c;
  }
  return c;
}

struct BleuCounts {
  std::vector<long> matches;  // per order
  std::vector<long> totals;
  long hyp_len = 0;
  long ref_len = 0;
};

inline BleuCounts bleu_counts(const std::vector<EvalPair>& corpus, int max_n) {
  BleuCounts out;
  out.matches.assign(static_cast<std::size_t>(max_n), 0);
  out.totals.assign(static_cast<std::size_t>(max_n), 0);
  for (const auto& pair : corpus) {
    out.hyp_len += static_cast<long>(pair.hypothesis.size());
    long closest = static_cast<long>(pair.references.front().size());
    for (const auto& ref : pair.references) {
      const long len = static_cast<long>(ref.size());
      const long hl = static_cast<long>(pair.hypothesis.size());
      const long best_gap = std::llabs(closest - hl);
      const long gap = std::llabs(len - hl);
      if (gap < best_gap || (gap == best_gap && len < closest)) closest = len;
    }
    out.ref_len += closest;
    for (int n = 1; n <= max_n; ++n) {
      const auto hyp_grams = list_ngrams(pair.hypothesis, static_cast<std::size_t>(n));
      out.totals[static_cast<std::size_t>(n - 1)] += static_cast<long>(hyp_grams.size());
      // distinct hypothesis n-grams, clipped by the best reference count
      std::vector<Ngram> seen;
      for (const auto& gram : hyp_grams) {
        bool done = false;
        for (const auto& s : seen) {
          if (s == gram) done = true;
        }
        if (done) continue;
        seen.push_back(gram);
        long best_ref = 0;
        for (const auto& ref : pair.references) {
          best_ref = std::max(best_ref,
                              count_in(list_ngrams(ref, static_cast<std::size_t>(n)), gram));
        }
        out.matches[static_cast<std::size_t>(n - 1)] +=
            std::min(count_in(hyp_grams, gram), best_ref);
      }
    }
  }
  return out;
}

inline double bleu(const std::vector<EvalPair>& corpus, int max_n) {
  const BleuCounts counts = bleu_counts(corpus, max_n);
  if (counts.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  int used = 0;
  for (int n = 1; n <= max_n; ++n) {
    const long total = counts.totals[static_cast<std::size_t>(n - 1)];
    if (total == 0) continue;
    const long match = counts.matches[static_cast<std::size_t>(n - 1)];
    const double p =
        match > 0 ? static_cast<double>(match) / total : 1e-9 / static_cast<double>(total);
    log_sum += std::log(p);
    ++used;
  }
  if (used == 0) return 0.0;
  const double bp = counts.hyp_len >= counts.ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(counts.ref_len) /
                                             static_cast<double>(counts.hyp_len));
  return bp * std::exp(log_sum / used);
}

inline double rouge_l(const EvalPair& pair) {
  double best = 0.0;
  for (const auto& ref : pair.references) {
    const std::size_t n = pair.hypothesis.size(), m = ref.size();
    std::vector<std::vector<long>> table(n + 1, std::vector<long>(m + 1, 0));
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= m; ++j) {
        table[i][j] = pair.hypothesis[i - 1] == ref[j - 1]
                          ? table[i - 1][j - 1] + 1
                          : std::max(table[i - 1][j], table[i][j - 1]);
      }
    }
    const long lcs = table[n][m];
    if (lcs == 0) continue;
    const double p = static_cast<double>(lcs) / static_cast<double>(n);
    const double r = static_cast<double>(lcs) / static_cast<double>(m);
    const double b2 = 1.2 * 1.2;
    best = std::max(best, (1.0 + b2) * p * r / (r + b2 * p));
  }
  return best;
}

// explicit sorted tf-idf vector for one order
using SparseVec = std::vector<std::pair<Ngram, double>>;

inline SparseVec tfidf_vec(const Tokens& tokens, std::size_t n,
                           const std::map<Ngram, long>& doc_freq, double corpus_size) {
  std::map<Ngram, long> counts;
  for (const auto& gram : list_ngrams(tokens, n)) ++counts[gram];
  SparseVec vec;
  for (const auto& [gram, count] : counts) {
    auto it = doc_freq.find(gram);
    const double df = it == doc_freq.end() ? 1.0 : std::max<double>(1.0, it->second);
    vec.emplace_back(gram, count * std::log(corpus_size / df));
  }
  return vec;
}

inline double cosine(const SparseVec& a, const SparseVec& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [gram, w] : a) {
    na += w * w;
    for (const auto& [gram2, w2] : b) {
      if (gram == gram2) dot += w * w2;
    }
  }
  for (const auto& [gram, w] : b) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cider(const std::vector<EvalPair>& corpus) {
  std::map<Ngram, long> doc_freq;
  for (const auto& pair : corpus) {
    std::vector<Ngram> seen;
    for (const auto& ref : pair.references) {
      for (std::size_t n = 1; n <= 4; ++n) {
        for (const auto& gram : list_ngrams(ref, n)) {
          bool dup = false;
          for (const auto& s : seen) {
            if (s == gram) dup = true;
          }
          if (!dup) seen.push_back(gram);
        }
      }
    }
    for (const auto& gram : seen) ++doc_freq[gram];
  }
  const double size = static_cast<double>(corpus.size());
  double total = 0.0;
  for (const auto& pair : corpus) {
    double item = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
      const SparseVec hyp = tfidf_vec(pair.hypothesis, n, doc_freq, size);
      double order_sum = 0.0;
      for (const auto& ref : pair.references) {
        order_sum += cosine(hyp, tfidf_vec(ref, n, doc_freq, size));
      }
      item += order_sum / static_cast<double>(pair.references.size());
    }
    total += 10.0 * item / 4.0;
  }
  return total / size;
}

inline double meteor_lite(const EvalPair& pair) {
  double best = 0.0;
  for (const auto& ref : pair.references) {
    const std::size_t hn = pair.hypothesis.size(), rn = ref.size();
    std::vector<int> match_of(hn, -1);
    std::vector<bool> used(rn, false);
    // stage 1: exact, leftmost in order
    for (std::size_t i = 0; i < hn; ++i) {
      for (std::size_t j = 0; j < rn; ++j) {
        if (!used[j] && ref[j] == pair.hypothesis[i]) {
          match_of[i] = static_cast<int>(j);
          used[j] = true;
          break;
        }
      }
    }
    // stage 2: stems, leftmost in order
    for (std::size_t i = 0; i < hn; ++i) {
      if (match_of[i] >= 0) continue;
      const std::string hs = stem(pair.hypothesis[i]);
      for (std::size_t j = 0; j < rn; ++j) {
        if (!used[j] && stem(ref[j]) == hs) {
          match_of[i] = static_cast<int>(j);
          used[j] = true;
          break;
        }
      }
    }
    long m = 0, chunks = 0;
    int prev = -5;
    bool in_chunk = false;
    for (std::size_t i = 0; i < hn; ++i) {
      if (match_of[i] < 0) {
        in_chunk = false;
        continue;
      }
      ++m;
      if (!(in_chunk && match_of[i] == prev + 1)) ++chunks;
      prev = match_of[i];
      in_chunk = true;
    }
    if (m == 0) continue;
    const double md = static_cast<double>(m);
    const double p = md / static_cast<double>(hn);
    const double r = md / static_cast<double>(rn);
    const double f = 10.0 * p * r / (r + 9.0 * p);
    const double penalty = 0.5 * std::pow(static_cast<double>(chunks) / md, 3.0);
    best = std::max(best, f * (1.0 - penalty));
  }
  return best;
}

}  // namespace videoqg::oracle
