#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "divkit/corpus.hpp"
#include "divkit/metrics.hpp"
#include "divkit/textproc.hpp"
#include "divkit/util.hpp"

namespace divkit {

struct LooConfig {
  std::vector<MetricParams> metrics{MetricParams{}};
  int iterations = 750;
  std::uint64_t seed = 0;
  MaskingPolicy mask;
  std::optional<int> refs_per_sample;
  std::optional<int> variance_bins;
  bool keep_iteration_scores = false;

  /// Throws InputError on iterations < 1, refs_per_sample < 1, bins < 2.
  void check() const;
};

struct MetricSummary {
  Metric metric = Metric::bleu4;
  double mean = 0;
  double std = 0;  // population standard deviation over iterations
  double min = 0;
  double max = 0;
  std::vector<double> iterations;  // only when keep_iteration_scores
};

struct LooResult {
  std::vector<MetricSummary> metrics;  // aligned with LooConfig::metrics
  std::size_t samples_used = 0;
  std::size_t samples_dropped = 0;

  const MetricSummary& at(Metric m) const;
};

/// Per-iteration hypothesis draw. Iteration t seeds its own engine with
/// seed ^ t, then draws one reference index per eligible sample in corpus order.
std::vector<std::size_t> draw_hypotheses(const TokenCorpus& corpus, std::uint64_t seed, int iteration);

/// Leave-one-out ground-truth estimate: corpus-level score of one held-out
/// reference per sample against the rest, averaged over iterations.
LooResult loo_estimate(const TokenCorpus& corpus, const LooConfig& config,
                       Execution exec = Execution::parallel);

/// Serial reference: rebuilds every iteration's pairs and calls the public
/// corpus metrics directly.
LooResult loo_estimate_reference(const TokenCorpus& corpus, const LooConfig& config);

/// Same sampling stream as loo_estimate; nouns, proper nouns and verbs of every
/// reference (and therefore every hypothesis) replaced by unique mask tokens.
LooResult masked_loo(const TokenCorpus& tagged, const LooConfig& config,
                     Execution exec = Execution::parallel);

struct VocabMaskedLoo {
  LooResult plain;
  LooResult masked;
  std::vector<double> relative_drop;  // (plain - masked) / plain per metric
};

VocabMaskedLoo vocab_masked_loo(const TokenCorpus& corpus, const LooConfig& config,
                                Execution exec = Execution::parallel);

struct RefcountPoint {
  int r = 0;
  LooResult result;
};

/// Remaining references are cut to min(r, |R_i|) by a subsample stream that is
/// independent of the hypothesis stream; subsamples are nested in r.
std::vector<RefcountPoint> refcount_sweep(const TokenCorpus& corpus, const LooConfig& config,
                                          const std::vector<int>& r_values,
                                          Execution exec = Execution::parallel);

struct VarianceBin {
  std::string name;
  double min_variance = 0;
  double max_variance = 0;
  std::vector<std::string> sample_ids;
  std::optional<LooResult> result;  // empty when no sample has two references
};

struct VarianceBinnedLoo {
  std::vector<VarianceBin> bins;
  std::size_t degenerate_samples = 0;  // fewer than two unique captions
};

/// Quantile bins of within-sample embedding-distance variance. Samples with
/// fewer than two unique captions go to a separate "degenerate" bin; empty
/// bins are omitted.
VarianceBinnedLoo variance_binned_loo(const CaptionDataset& dataset, const TokenCorpus& corpus,
                                      const EmbeddingStore& embeddings, const LooConfig& config,
                                      Execution exec = Execution::parallel);

}  // namespace divkit
