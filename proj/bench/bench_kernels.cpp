// Serial reference vs OpenMP kernel for each parallel hot spot. Arg(0) runs
// the serial path, Arg(1) the parallel one.

#include <benchmark/benchmark.h>

#include "divkit/concepts.hpp"
#include "divkit/diversity.hpp"
#include "divkit/loo.hpp"
#include "divkit/score_matrix.hpp"
#include "divkit/semantic.hpp"
#include "helpers.hpp"

using namespace divkit;

namespace {

const std::vector<std::string>& vocab() {
  static const auto v = [] {
    std::vector<std::string> out;
    for (int i = 0; i < 400; ++i) out.push_back("w" + std::to_string(i));
    return out;
  }();
  return v;
}

const CaptionDataset& dataset() {
  static const auto d = [] {
    std::mt19937_64 rng(1);
    return testing::dataset(testing::random_samples(rng, 1000, 5, 20, vocab(), 5, 12));
  }();
  return d;
}

const TokenCorpus& corpus() {
  static const auto c = tokenize_dataset(dataset());
  return c;
}

Execution exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Execution::serial : Execution::parallel; }

void BM_MatrixFill(benchmark::State& state) {
  std::vector<std::string> hyps;
  for (std::size_t i = 0; i < 200; ++i) hyps.push_back(dataset().samples[i].references[0]);
  const std::span<const Sample> samples(dataset().samples.data() + 200, 300);
  const MatrixKernel kernel(hyps, samples, default_matrix_params());
  std::vector<float> out(kernel.rows() * kernel.cols());
  for (auto _ : state) {
    kernel.fill(out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_Loo(benchmark::State& state) {
  LooConfig cfg;
  cfg.iterations = 50;
  for (auto _ : state) benchmark::DoNotOptimize(loo_estimate(corpus(), cfg, exec_of(state)));
}

void BM_LooCider(benchmark::State& state) {
  LooConfig cfg;
  cfg.metrics[0].metric = Metric::cider;
  cfg.iterations = 20;
  for (auto _ : state) benchmark::DoNotOptimize(loo_estimate(corpus(), cfg, exec_of(state)));
}

void BM_Semantic(benchmark::State& state) {
  static const auto store = builtin_embeddings(dataset());
  for (auto _ : state) benchmark::DoNotOptimize(analyze_samples(dataset(), store, exec_of(state)));
}

void BM_NGramModel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_ngram_model(corpus(), 4, exec_of(state)));
}

void BM_ConceptEval(benchmark::State& state) {
  const std::span<const Sample> train(dataset().samples.data(), 500);
  const std::span<const Sample> test(dataset().samples.data() + 500, 100);
  const auto pools = build_concept_pools(train, make_label_set("x", {"w1", "w2", "w3"}));
  for (auto _ : state) benchmark::DoNotOptimize(concept_coreset_eval(test, pools, default_matrix_params(), exec_of(state)));
}

}  // namespace

BENCHMARK(BM_MatrixFill)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Loo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LooCider)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Semantic)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NGramModel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConceptEval)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
