#include "videoqg/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

namespace videoqg {

std::vector<std::string> tokenize(const std::string& line) {
  std::string spaced;
  spaced.reserve(line.size() * 2);
  for (unsigned char c : line) {
    if (std::ispunct(c)) {
      spaced += ' ';
      spaced += static_cast<char>(c);
      spaced += ' ';
    } else {
      spaced += static_cast<char>(std::tolower(c));
    }
  }
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : spaced) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string stem(const std::string& token) {
  static const char* kSuffixes[] = {"ing", "ed", "es", "s"};
  for (const char* suffix : kSuffixes) {
    const std::size_t n = std::char_traits<char>::length(suffix);
    if (token.size() >= n + 3 && token.compare(token.size() - n, n, suffix) == 0) {
      return token.substr(0, token.size() - n);
    }
  }
  return token;
}

namespace {

using NgramCounts = std::unordered_map<std::string, long>;

std::string join_ngram(const std::vector<std::string>& tokens, std::size_t start, std::size_t n) {
  std::string key = tokens[start];
  for (std::size_t i = 1; i < n; ++i) {
    key += '\x1f';
    key += tokens[start + i];
  }
  return key;
}

NgramCounts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() >= n && n >= 1) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[join_ngram(tokens, i, n)];
  }
  return counts;
}

}  // namespace

double bleu(const std::vector<EvalPair>& corpus, int max_n) {
  if (corpus.empty()) throw DataError("bleu: empty corpus");
  if (max_n < 1 || max_n > 4) throw ConfigError("bleu: max_n must be in 1..4");
  for (const auto& pair : corpus) {
    if (pair.references.empty()) throw DataError("bleu: hypothesis without references");
  }
  constexpr double kEps = 1e-9;
  std::vector<long> matches(static_cast<std::size_t>(max_n), 0);
  std::vector<long> totals(static_cast<std::size_t>(max_n), 0);
  long hyp_len = 0, ref_len = 0;
  for (const auto& pair : corpus) {
    hyp_len += static_cast<long>(pair.hypothesis.size());
    // closest reference length; ties resolved toward the shorter reference
    long closest = static_cast<long>(pair.references[0].size());
    for (const auto& ref : pair.references) {
      const long len = static_cast<long>(ref.size());
      const long hl = static_cast<long>(pair.hypothesis.size());
      if (std::llabs(len - hl) < std::llabs(closest - hl) ||
          (std::llabs(len - hl) == std::llabs(closest - hl) && len < closest)) {
        closest = len;
      }
    }
    ref_len += closest;
    for (int n = 1; n <= max_n; ++n) {
      NgramCounts hyp_counts = ngram_counts(pair.hypothesis, static_cast<std::size_t>(n));
      NgramCounts max_ref;
      for (const auto& ref : pair.references) {
        for (const auto& [gram, count] : ngram_counts(ref, static_cast<std::size_t>(n))) {
          max_ref[gram] = std::max(max_ref[gram], count);
        }
      }
      for (const auto& [gram, count] : hyp_counts) {
        totals[static_cast<std::size_t>(n - 1)] += count;
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) {
          matches[static_cast<std::size_t>(n - 1)] += std::min(count, it->second);
        }
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  int used = 0;
  for (int n = 1; n <= max_n; ++n) {
    const long total = totals[static_cast<std::size_t>(n - 1)];
    if (total == 0) continue;  // order absent from the whole corpus
    const long match = matches[static_cast<std::size_t>(n - 1)];
    const double p = match > 0 ? static_cast<double>(match) / static_cast<double>(total)
                               : kEps / static_cast<double>(total);
    log_sum += std::log(p);
    ++used;
  }
  if (used == 0) return 0.0;
  const double geo_mean = std::exp(log_sum / used);
  const double bp =
      hyp_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return bp * geo_mean;
}

namespace {

long lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<long> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double rouge_l(const EvalPair& pair) {
  if (pair.hypothesis.empty()) throw DataError("rouge_l: empty hypothesis");
  if (pair.references.empty()) throw DataError("rouge_l: no references");
  constexpr double kBeta = 1.2;
  double best = 0.0;
  for (const auto& ref : pair.references) {
    if (ref.empty()) throw DataError("rouge_l: empty reference");
    const long lcs = lcs_length(pair.hypothesis, ref);
    if (lcs == 0) continue;
    const double p = static_cast<double>(lcs) / static_cast<double>(pair.hypothesis.size());
    const double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
    const double b2 = kBeta * kBeta;
    best = std::max(best, (1.0 + b2) * p * r / (r + b2 * p));
  }
  return best;
}

double rouge_l_corpus(const std::vector<EvalPair>& corpus) {
  if (corpus.empty()) throw DataError("rouge_l: empty corpus");
  double sum = 0.0;
  for (const auto& pair : corpus) sum += rouge_l(pair);
  return sum / static_cast<double>(corpus.size());
}

namespace {

// Per-order tf-idf vectors for one token sequence.
struct TfIdfVecs {
  std::array<std::unordered_map<std::string, double>, 4> vec;
  std::array<double, 4> norm = {0.0, 0.0, 0.0, 0.0};
};

TfIdfVecs tfidf_vectors(const std::vector<std::string>& tokens,
                        const std::unordered_map<std::string, long>& doc_freq,
                        double corpus_size) {
  TfIdfVecs out;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (const auto& [gram, count] : ngram_counts(tokens, n)) {
      auto it = doc_freq.find(gram);
      const double df = it == doc_freq.end() ? 1.0 : std::max<double>(1.0, it->second);
      const double w = static_cast<double>(count) * std::log(corpus_size / df);
      out.vec[n - 1][gram] = w;
      out.norm[n - 1] += w * w;
    }
    out.norm[n - 1] = std::sqrt(out.norm[n - 1]);
  }
  return out;
}

double cosine(const std::unordered_map<std::string, double>& a, double na,
              const std::unordered_map<std::string, double>& b, double nb) {
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  for (const auto& [gram, w] : a) {
    auto it = b.find(gram);
    if (it != b.end()) dot += w * it->second;
  }
  return dot / (na * nb);
}

}  // namespace

double cider(const std::vector<EvalPair>& corpus) {
  if (corpus.size() < 2) {
    throw DataError("cider: needs at least 2 corpus items for document frequencies");
  }
  // document frequency: number of items whose reference set contains the n-gram
  std::unordered_map<std::string, long> doc_freq;
  for (const auto& pair : corpus) {
    if (pair.references.empty()) throw DataError("cider: hypothesis without references");
    std::unordered_map<std::string, bool> seen;
    for (const auto& ref : pair.references) {
      for (std::size_t n = 1; n <= 4; ++n) {
        for (const auto& [gram, count] : ngram_counts(ref, n)) seen[gram] = true;
      }
    }
    for (const auto& [gram, flag] : seen) ++doc_freq[gram];
  }
  const double corpus_size = static_cast<double>(corpus.size());
  double total = 0.0;
  for (const auto& pair : corpus) {
    TfIdfVecs hyp = tfidf_vectors(pair.hypothesis, doc_freq, corpus_size);
    std::array<double, 4> per_order = {0.0, 0.0, 0.0, 0.0};
    for (const auto& ref : pair.references) {
      TfIdfVecs rv = tfidf_vectors(ref, doc_freq, corpus_size);
      for (std::size_t n = 0; n < 4; ++n) {
        per_order[n] += cosine(hyp.vec[n], hyp.norm[n], rv.vec[n], rv.norm[n]);
      }
    }
    double item = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
      item += per_order[n] / static_cast<double>(pair.references.size());
    }
    total += 10.0 * item / 4.0;
  }
  return total / corpus_size;
}

namespace {

struct Alignment {
  long matches = 0;
  long chunks = 0;
};

// Two-stage leftmost in-order alignment: exact token matches first, then stem
// matches on the leftovers. Chunks count maximal runs that are contiguous in
// both sequences.
Alignment align_meteor(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  const std::size_t h = hyp.size(), r = ref.size();
  std::vector<int> hyp_to_ref(h, -1);
  std::vector<bool> ref_used(r, false);

  auto pair_stage = [&](auto key_of) {
    std::map<std::string, std::vector<std::size_t>> ref_slots;
    for (std::size_t j = 0; j < r; ++j) {
      if (!ref_used[j]) ref_slots[key_of(ref[j])].push_back(j);
    }
    std::map<std::string, std::size_t> cursor;
    for (std::size_t i = 0; i < h; ++i) {
      if (hyp_to_ref[i] >= 0) continue;
      const std::string key = key_of(hyp[i]);
      auto it = ref_slots.find(key);
      if (it == ref_slots.end()) continue;
      std::size_t& next = cursor[key];
      if (next < it->second.size()) {
        const std::size_t j = it->second[next++];
        hyp_to_ref[i] = static_cast<int>(j);
        ref_used[j] = true;
      }
    }
  };
  pair_stage([](const std::string& t) { return t; });
  pair_stage([](const std::string& t) { return stem(t); });

  Alignment out;
  int prev_ref = -2;
  bool prev_matched = false;
  for (std::size_t i = 0; i < h; ++i) {
    if (hyp_to_ref[i] < 0) {
      prev_matched = false;
      continue;
    }
    ++out.matches;
    if (!(prev_matched && hyp_to_ref[i] == prev_ref + 1)) ++out.chunks;
    prev_ref = hyp_to_ref[i];
    prev_matched = true;
  }
  return out;
}

double meteor_against(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  Alignment a = align_meteor(hyp, ref);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(hyp.size());
  const double r = m / static_cast<double>(ref.size());
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  const double penalty = 0.5 * frag * frag * frag;
  return f_mean * (1.0 - penalty);
}

}  // namespace

double meteor_lite(const EvalPair& pair) {
  if (pair.hypothesis.empty()) throw DataError("meteor: empty hypothesis");
  if (pair.references.empty()) throw DataError("meteor: no references");
  double best = 0.0;
  for (const auto& ref : pair.references) {
    if (ref.empty()) throw DataError("meteor: empty reference");
    best = std::max(best, meteor_against(pair.hypothesis, ref));
  }
  return best;
}

double meteor_lite_corpus(const std::vector<EvalPair>& corpus) {
  if (corpus.empty()) throw DataError("meteor: empty corpus");
  double sum = 0.0;
  for (const auto& pair : corpus) sum += meteor_lite(pair);
  return sum / static_cast<double>(corpus.size());
}

MetricReport evaluate_corpus(const std::vector<EvalPair>& corpus) {
  MetricReport report;
  report.bleu1 = bleu(corpus, 1);
  report.bleu4 = bleu(corpus, 4);
  report.rouge_l = rouge_l_corpus(corpus);
  report.cider = cider(corpus);
  report.meteor = meteor_lite_corpus(corpus);
  return report;
}

std::vector<EvalPair> read_eval_corpus(const std::string& hyp_path, const std::string& ref_path) {
  std::ifstream hyp_file(hyp_path);
  if (!hyp_file) throw DataError("cannot open hypothesis file '" + hyp_path + "'");
  std::ifstream ref_file(ref_path);
  if (!ref_file) throw DataError("cannot open reference file '" + ref_path + "'");
  std::vector<EvalPair> corpus;
  std::string hyp_line, ref_line;
  while (std::getline(hyp_file, hyp_line)) {
    if (!std::getline(ref_file, ref_line)) {
      throw DataError("reference file '" + ref_path + "' has fewer lines than '" + hyp_path + "'");
    }
    EvalPair pair;
    pair.hypothesis = tokenize(hyp_line);
    std::size_t start = 0;
    while (start <= ref_line.size()) {
      const std::size_t tab = ref_line.find('\t', start);
      const std::string piece = ref_line.substr(
          start, tab == std::string::npos ? std::string::npos : tab - start);
      pair.references.push_back(tokenize(piece));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    corpus.push_back(std::move(pair));
  }
  if (std::getline(ref_file, ref_line)) {
    throw DataError("reference file '" + ref_path + "' has more lines than '" + hyp_path + "'");
  }
  if (corpus.empty()) throw DataError("empty evaluation corpus");
  return corpus;
}

}  // namespace videoqg
