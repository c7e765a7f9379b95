#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support/metric_oracles.hpp"
#include "videoqg/metrics.hpp"

using namespace videoqg;

namespace {

EvalPair pair_of(const std::string& hyp, const std::vector<std::string>& refs) {
  EvalPair p;
  p.hypothesis = tokenize(hyp);
  for (const auto& r : refs) p.references.push_back(tokenize(r));
  return p;
}

// Random corpora over stem-stable tokens (no ing/ed/es/s suffixes), so stem
// matching coincides with exact matching and relabeling stays meaningful.
std::vector<EvalPair> random_corpus(std::mt19937_64& rng, bool with_suffixes = false) {
  static const std::vector<std::string> base = {"rock",  "cloud", "lamp",  "truth", "bird",
                                                "metal", "north", "pearl", "vivid", "ochre",
                                                "delta", "quartz"};
  static const std::vector<std::string> suffixed = {"rocks", "clouded", "lamps", "birds",
                                                    "vividly", "rocking"};
  std::uniform_int_distribution<std::size_t> n_items(2, 6), len(1, 8);
  std::uniform_int_distribution<std::size_t> n_refs(1, 3);
  std::uniform_int_distribution<std::size_t> pick(0, base.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_suffixed(0, suffixed.size() - 1);
  std::bernoulli_distribution use_suffix(0.2);
  auto sentence = [&] {
    std::vector<std::string> s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (with_suffixes && use_suffix(rng)) {
        s.push_back(suffixed[pick_suffixed(rng)]);
      } else {
        s.push_back(base[pick(rng)]);
      }
    }
    return s;
  };
  std::vector<EvalPair> corpus;
  const std::size_t items = n_items(rng);
  for (std::size_t i = 0; i < items; ++i) {
    EvalPair p;
    p.hypothesis = sentence();
    const std::size_t refs = n_refs(rng);
    for (std::size_t r = 0; r < refs; ++r) p.references.push_back(sentence());
    corpus.push_back(std::move(p));
  }
  return corpus;
}

}  // namespace

TEST_CASE("tokenizer lowercases and detaches punctuation") {
  CHECK(tokenize("Don't STOP!") ==
        std::vector<std::string>{"don", "'", "t", "stop", "!"});
  CHECK(tokenize("  spaced   out  ") == std::vector<std::string>{"spaced", "out"});
  CHECK(tokenize("") == std::vector<std::string>{});
}

TEST_CASE("stemmer strips one listed suffix with three characters left") {
  CHECK(stem("running") == "runn");
  CHECK(stem("jumped") == "jump");
  CHECK(stem("boxes") == "box");
  CHECK(stem("cats") == "cat");
  CHECK(stem("es") == "es");      // too short to strip
  CHECK(stem("sing") == "sing");  // would leave fewer than 3 chars
  CHECK(stem("table") == "table");
}

TEST_CASE("bleu worked examples") {
  SUBCASE("identity scores 1 for any max_n") {
    auto corpus = {pair_of("the cat sat down today", {"the cat sat down today"})};
    for (int n = 1; n <= 4; ++n) {
      CHECK(bleu({corpus}, n) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("no shared unigrams scores roughly zero") {
    auto corpus = {pair_of("alpha beta gamma", {"delta epsilon zeta"})};
    CHECK(bleu({corpus}, 1) < 1e-6);
  }
  SUBCASE("brevity penalty on a short hypothesis") {
    auto corpus = {pair_of("the cat sat", {"the cat sat down"})};
    CHECK(bleu({corpus}, 1) == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-12));
  }
  SUBCASE("empty corpus is rejected") { CHECK_THROWS_AS(bleu({}, 4), DataError); }
  SUBCASE("max_n outside 1..4 is rejected") {
    auto corpus = {pair_of("a b", {"a b"})};
    CHECK_THROWS_AS(bleu({corpus}, 0), ConfigError);
    CHECK_THROWS_AS(bleu({corpus}, 5), ConfigError);
  }
}

TEST_CASE("appending a reference to the hypothesis never drops unigram matches") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    auto corpus = random_corpus(rng);
    auto& pair = corpus.front();
    const long before = oracle::bleu_counts({pair}, 1).matches[0];
    EvalPair extended = pair;
    extended.hypothesis.insert(extended.hypothesis.end(), pair.references[0].begin(),
                               pair.references[0].end());
    const long after = oracle::bleu_counts({extended}, 1).matches[0];
    CHECK(after >= before);
  }
}

TEST_CASE("rouge_l worked examples") {
  CHECK(rouge_l(pair_of("same words here", {"same words here"})) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rouge_l(pair_of("aa bb cc", {"dd ee"})) == doctest::Approx(0.0));
  // hyp "a b c", ref "a c": LCS 2, P = 2/3, R = 1
  const double b2 = 1.2 * 1.2;
  const double p = 2.0 / 3.0, r = 1.0;
  CHECK(rouge_l(pair_of("a b c", {"a c"})) ==
        doctest::Approx((1.0 + b2) * p * r / (r + b2 * p)).epsilon(1e-12));
  CHECK_THROWS_AS(rouge_l(pair_of("", {"a"})), DataError);
  CHECK_THROWS_AS(rouge_l(pair_of("a", {""})), DataError);
}

TEST_CASE("cider worked examples") {
  SUBCASE("identical pair inside a 10-item corpus scores 10 for that item") {
    std::vector<EvalPair> corpus;
    corpus.push_back(pair_of("blue heron over quiet water", {"blue heron over quiet water"}));
    const char* others[] = {"one red fox", "two grey owls", "three tall pines",
                            "four old boats", "five worn maps", "six thin wires",
                            "seven flat stones", "eight dark caves", "nine long roads"};
    for (const char* o : others) corpus.push_back(pair_of(o, {o}));
    // every item is identical to its reference, so the corpus mean is 10
    CHECK(cider(corpus) == doctest::Approx(10.0).epsilon(1e-9));
  }
  SUBCASE("fully distinct n-grams score 0") {
    std::vector<EvalPair> corpus = {pair_of("aa bb cc", {"dd ee ff"}),
                                    pair_of("gg hh", {"ii jj"})};
    CHECK(cider(corpus) == doctest::Approx(0.0));
  }
  SUBCASE("three-item toy corpus matches the brute-force oracle") {
    std::vector<EvalPair> corpus = {
        pair_of("a man rides a horse", {"a man rides a brown horse", "a person on a horse"}),
        pair_of("a dog runs", {"a dog runs fast"}),
        pair_of("the horse rests", {"a horse rests", "the horse is resting"})};
    CHECK(cider(corpus) == doctest::Approx(oracle::cider(corpus)).epsilon(1e-12));
  }
  SUBCASE("tiny corpora are rejected") {
    CHECK_THROWS_AS(cider({pair_of("a", {"a"})}), DataError);
  }
}

TEST_CASE("meteor worked examples") {
  SUBCASE("identical sequences: one chunk") {
    const std::string text = "what is the bird doing";
    const double m = 5.0;
    CHECK(meteor_lite(pair_of(text, {text})) ==
          doctest::Approx(1.0 - 0.5 / (m * m * m)).epsilon(1e-12));
  }
  SUBCASE("zero matches scores zero") {
    CHECK(meteor_lite(pair_of("aa bb", {"cc dd"})) == doctest::Approx(0.0));
  }
  SUBCASE("hand-built two-chunk alignment") {
    EvalPair p = pair_of("the president spoke to the audience",
                         {"the president then spoke to the audience"});
    const double expected = (60.0 / 69.0) * (53.0 / 54.0);
    CHECK(meteor_lite(p) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("stem matches rescue inflected tokens") {
    // "walked" vs "walks" only match through the stem stage
    CHECK(meteor_lite(pair_of("he walked", {"he walks"})) > 0.5);
  }
  SUBCASE("empty inputs are rejected") {
    CHECK_THROWS_AS(meteor_lite(pair_of("", {"a"})), DataError);
  }
}

TEST_CASE("metrics match their oracles on 50 randomized corpora") {
  std::mt19937_64 rng(20240809);
  for (int trial = 0; trial < 50; ++trial) {
    const bool suffixes = trial % 2 == 1;
    auto corpus = random_corpus(rng, suffixes);
    CHECK(bleu(corpus, 1) == doctest::Approx(oracle::bleu(corpus, 1)).epsilon(1e-9));
    CHECK(bleu(corpus, 4) == doctest::Approx(oracle::bleu(corpus, 4)).epsilon(1e-9));
    CHECK(cider(corpus) == doctest::Approx(oracle::cider(corpus)).epsilon(1e-9));
    for (const auto& pair : corpus) {
      if (pair.hypothesis.empty()) continue;
      CHECK(rouge_l(pair) == doctest::Approx(oracle::rouge_l(pair)).epsilon(1e-9));
      CHECK(meteor_lite(pair) == doctest::Approx(oracle::meteor_lite(pair)).epsilon(1e-9));
    }
  }
}

TEST_CASE("scores stay in range and are invariant under token relabeling") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = random_corpus(rng);
    const double b1 = bleu(corpus, 1), b4 = bleu(corpus, 4);
    CHECK(b1 >= 0.0);
    CHECK(b1 <= 1.0);
    CHECK(b4 >= 0.0);
    CHECK(b4 <= 1.0);
    CHECK(cider(corpus) >= 0.0);
    auto relabel = [](std::vector<std::string> tokens) {
      for (auto& t : tokens) t = "q" + t;  // stays free of stemmable suffixes
      return tokens;
    };
    std::vector<EvalPair> renamed;
    for (const auto& pair : corpus) {
      EvalPair r;
      r.hypothesis = relabel(pair.hypothesis);
      for (const auto& ref : pair.references) r.references.push_back(relabel(ref));
      renamed.push_back(std::move(r));
    }
    CHECK(bleu(renamed, 4) == doctest::Approx(b4).epsilon(1e-12));
    CHECK(cider(renamed) == doctest::Approx(cider(corpus)).epsilon(1e-12));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].hypothesis.empty()) continue;
      CHECK(rouge_l(renamed[i]) == doctest::Approx(rouge_l(corpus[i])).epsilon(1e-12));
      CHECK(meteor_lite(renamed[i]) ==
            doctest::Approx(meteor_lite(corpus[i])).epsilon(1e-12));
      const double rl = rouge_l(corpus[i]);
      const double mt = meteor_lite(corpus[i]);
      CHECK(rl >= 0.0);
      CHECK(rl <= 1.0);
      CHECK(mt >= 0.0);
      CHECK(mt <= 1.0);
    }
  }
}

TEST_CASE("evaluate_corpus bundles all five metrics") {
  std::vector<EvalPair> corpus = {pair_of("a small bird sings", {"a small bird sings"}),
                                  pair_of("the cat sat", {"the cat sat down"})};
  MetricReport report = evaluate_corpus(corpus);
  CHECK(report.bleu1 > 0.0);
  CHECK(report.bleu4 > 0.0);
  CHECK(report.rouge_l > 0.0);
  CHECK(report.cider > 0.0);
  CHECK(report.meteor > 0.0);
}
