#include <doctest.h>

#include <cmath>

#include "divkit/metrics.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace divkit;

namespace {

struct Case {
  std::vector<std::string> hyp;
  std::vector<std::vector<std::string>> refs;
};

Case random_case(std::mt19937_64& rng, int max_len = 8) {
  Case c;
  const auto& vocab = testing::small_vocab();
  c.hyp = testing::words(testing::random_caption(rng, vocab, 1, max_len));
  const int k = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < k; ++i) c.refs.push_back(testing::words(testing::random_caption(rng, vocab, 1, max_len)));
  return c;
}

TokenSequence ts(const std::vector<std::string>& w) { return {w, std::nullopt}; }

std::vector<TokenSequence> ts(const std::vector<std::vector<std::string>>& w) {
  std::vector<TokenSequence> out;
  for (const auto& x : w) out.push_back(ts(x));
  return out;
}

}  // namespace

TEST_CASE("sentence BLEU matches the oracle for every order and smoothing") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_case(rng);
    const auto refs = ts(c.refs);
    for (int n = 1; n <= 4; ++n) {
      CHECK(sentence_bleu(ts(c.hyp), refs, n) == doctest::Approx(oracle::sentence_bleu(c.hyp, c.refs, n, false)).epsilon(1e-12));
      CHECK(sentence_bleu(ts(c.hyp), refs, n, BleuSmoothing::add_one_counts) ==
            doctest::Approx(oracle::sentence_bleu(c.hyp, c.refs, n, true)).epsilon(1e-12));
    }
  }
}

TEST_CASE("BLEU hand examples") {
  const auto refs = ts(std::vector<std::vector<std::string>>{testing::words("a man is walking")});
  CHECK(sentence_bleu(ts(testing::words("a man is walking")), refs, 4) == doctest::Approx(1.0));
  CHECK(sentence_bleu(ts(testing::words("dog")), refs, 1) == 0.0);
  // brevity penalty: 2 of 4 tokens, all matching
  CHECK(sentence_bleu(ts(testing::words("a man")), refs, 1) == doctest::Approx(std::exp(1 - 2.0)));
  CHECK(sentence_bleu(TokenSequence{}, refs, 1) == 0.0);
  // tie between lengths 3 and 5 for a 4-token hypothesis goes to 3 (no penalty either way)
  const std::vector<std::uint32_t> lengths = {5, 3};
  CHECK(closest_ref_length(lengths, 4) == 3);
}

TEST_CASE("corpus BLEU pools counts") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    std::vector<EvalPair> pairs;
    std::vector<std::pair<oracle::Tokens, std::vector<oracle::Tokens>>> raw;
    for (int k = 0; k < 5; ++k) {
      const auto c = random_case(rng);
      pairs.push_back({ts(c.hyp), ts(c.refs)});
      raw.emplace_back(c.hyp, c.refs);
    }
    for (int n = 1; n <= 4; ++n) CHECK(corpus_bleu(pairs, n) == doctest::Approx(oracle::corpus_bleu(raw, n)).epsilon(1e-12));
  }
}

TEST_CASE("ROUGE-L matches the oracle and takes the best reference") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_case(rng);
    CHECK(rouge_l(ts(c.hyp), ts(c.refs)) == doctest::Approx(oracle::rouge_l(c.hyp, c.refs, 1.2)).epsilon(1e-12));
    CHECK(rouge_l(ts(c.hyp), ts(c.refs), 2.0) == doctest::Approx(oracle::rouge_l(c.hyp, c.refs, 2.0)).epsilon(1e-12));
  }
  const auto one = ts(std::vector<std::vector<std::string>>{testing::words("x y"), testing::words("a b c")});
  CHECK(rouge_l(ts(testing::words("a b c")), one) == doctest::Approx(1.0));
}

TEST_CASE("CIDEr matches the oracle") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 60; ++i) {
    std::vector<EvalPair> pairs;
    std::vector<std::pair<oracle::Tokens, std::vector<oracle::Tokens>>> raw;
    const int sets = 2 + static_cast<int>(rng() % 5);
    for (int k = 0; k < sets; ++k) {
      const auto c = random_case(rng);
      pairs.push_back({ts(c.hyp), ts(c.refs)});
      raw.emplace_back(c.hyp, c.refs);
    }
    for (int n : {1, 4}) {
      const auto got = cider(pairs, n);
      const auto want = oracle::cider(raw, n);
      REQUIRE(got.size() == want.size());
      for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("meteor-lite matches exhaustive alignment") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto c = random_case(rng, 6);
    CHECK(meteor_lite(ts(c.hyp), ts(c.refs)) == doctest::Approx(oracle::meteor(c.hyp, c.refs)).epsilon(1e-12));
  }
  CHECK(suffix_stem("running") == "runn");
  CHECK(suffix_stem("dogs") == "dog");
  CHECK(suffix_stem("glass") == "glass");
  CHECK(suffix_stem("jumped") == "jump");
}

TEST_CASE("metric dispatch and parameter checks") {
  MetricParams p;
  p.metric = Metric::cider;
  const auto refs = ts(std::vector<std::vector<std::string>>{testing::words("a b")});
  CHECK_THROWS_AS(sentence_score(p, ts(testing::words("a b")), refs), Error);
  p.metric = Metric::rouge_l;
  p.rouge_beta = 0;
  CHECK_THROWS_AS(p.check(), InputError);
  p.rouge_beta = 1.2;
  p.cider_max_n = 5;
  CHECK_THROWS_AS(p.check(), InputError);
  CHECK(parse_metric(to_string(Metric::meteor_lite)) == Metric::meteor_lite);
  CHECK_THROWS_AS(parse_metric("bleu9"), InputError);
}

TEST_CASE("corpus_score aggregates as the caption toolkit does") {
  std::vector<EvalPair> pairs = {{testing::seq("a b c d"), {testing::seq("a b c d")}},
                                 {testing::seq("x y"), {testing::seq("a b c")}}};
  MetricParams p;
  p.metric = Metric::rouge_l;
  CHECK(corpus_score(p, pairs) == doctest::Approx(0.5));
  p.metric = Metric::bleu1;
  CHECK(corpus_score(p, pairs) == doctest::Approx(corpus_bleu(pairs, 1)));
}
