#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "divkit/score_matrix.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace divkit;

namespace {

struct Problem {
  std::vector<std::string> hyps;
  std::vector<Sample> samples;
};

Problem random_problem(std::uint64_t seed, std::size_t hyps = 12, std::size_t samples = 9) {
  std::mt19937_64 rng(seed);
  Problem p;
  for (std::size_t i = 0; i < hyps; ++i) p.hyps.push_back(testing::random_caption(rng, testing::small_vocab(), 2, 7));
  p.samples = testing::dataset(testing::random_samples(rng, samples, 1, 4, testing::small_vocab())).samples;
  return p;
}

}  // namespace

TEST_CASE("cells equal the direct sentence metric rounded to float") {
  const auto p = random_problem(1);
  for (Metric m : {Metric::bleu4, Metric::bleu2, Metric::rouge_l, Metric::meteor_lite}) {
    const auto params = default_matrix_params(m);
    const auto mat = build_score_matrix(p.hyps, p.samples, params, "");
    const auto hyps = dedupe_hypotheses(p.hyps);
    REQUIRE(mat.rows() == hyps.size());
    for (std::size_t r = 0; r < mat.rows(); ++r)
      for (std::size_t c = 0; c < mat.cols(); ++c) {
        std::vector<TokenSequence> refs;
        for (const auto& ref : p.samples[c].references) refs.push_back(tokenize(ref));
        CHECK(mat.at(r, c) == static_cast<float>(sentence_score(params, tokenize(hyps[r]), refs)));
      }
  }
}

TEST_CASE("BLEU cells agree with the oracle") {
  const auto p = random_problem(2);
  const auto mat = build_score_matrix(p.hyps, p.samples, default_matrix_params(), "");
  const auto hyps = dedupe_hypotheses(p.hyps);
  for (std::size_t r = 0; r < mat.rows(); ++r)
    for (std::size_t c = 0; c < mat.cols(); ++c) {
      std::vector<oracle::Tokens> refs;
      for (const auto& ref : p.samples[c].references) refs.push_back(tokenize(ref).tokens);
      CHECK(mat.at(r, c) == doctest::Approx(oracle::sentence_bleu(tokenize(hyps[r]).tokens, refs, 4, true)).epsilon(1e-6));
    }
}

TEST_CASE("parallel fill equals the serial reference bit for bit") {
  const auto p = random_problem(3, 40, 30);
  const MatrixKernel k(dedupe_hypotheses(p.hyps), p.samples, default_matrix_params());
  std::vector<float> a(k.rows() * k.cols()), b(a.size());
  k.fill(a, Execution::serial);
  k.fill(b, Execution::parallel);
  CHECK(a == b);
}

TEST_CASE("hypotheses are deduplicated in first-occurrence order") {
  const std::vector<std::string> h = {"b", "a", "b", "c", "a"};
  CHECK(dedupe_hypotheses(h) == std::vector<std::string>{"b", "a", "c"});
}

TEST_CASE("cache hit, identity and corruption recovery") {
  const auto p = random_problem(4);
  const auto dir = testing::temp_dir("matrix_cache");
  const auto params = default_matrix_params();
  MatrixBuildInfo first, second, third;
  const auto a = build_score_matrix(p.hyps, p.samples, params, dir, &first);
  CHECK(!first.cache_hit);
  CHECK(std::filesystem::exists(first.manifest_path));
  const auto b = build_score_matrix(p.hyps, p.samples, params, dir, &second);
  CHECK(second.cache_hit);
  CHECK(a.values == b.values);

  auto other = params;
  other.metric = Metric::bleu3;
  CHECK(matrix_identity(p.hyps, p.samples, other) != a.identity);

  auto bin = first.manifest_path;
  bin.replace(bin.size() - 5, 5, ".bin");
  REQUIRE(std::filesystem::exists(bin));
  {
    std::fstream f(bin, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(3);
    f.put('\x7f');
  }
  const auto c = build_score_matrix(p.hyps, p.samples, params, dir, &third);
  CHECK(third.recovered_from_corruption);
  CHECK(!third.cache_hit);
  CHECK(c.values == a.values);
  MatrixBuildInfo fourth;
  build_score_matrix(p.hyps, p.samples, params, dir, &fourth);
  CHECK(fourth.cache_hit);
}

TEST_CASE("empty hypothesis list is an input error") {
  const auto p = random_problem(5);
  CHECK_THROWS_AS(build_score_matrix({}, p.samples, default_matrix_params(), ""), InputError);
}
