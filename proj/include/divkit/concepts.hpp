#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divkit/corpus.hpp"
#include "divkit/metrics.hpp"
#include "divkit/util.hpp"

namespace divkit {

struct LabelSet {
  std::string name;
  std::vector<std::string> labels;  // lowercase, deduplicated, non-empty
};

/// Lowercases and deduplicates (first occurrence wins). Throws InputError when
/// no labels remain.
LabelSet make_label_set(std::string name, const std::vector<std::string>& labels);
LabelSet load_label_set(const std::string& path);

enum class MatchMode { exact, fuzzy };

/// Normalized Levenshtein partial ratio in [0, 100]: the best ratio of the
/// shorter string against every equal-length window of the longer one.
int partial_ratio(std::string_view a, std::string_view b);

bool label_matches(std::string_view lowered_caption, std::string_view label, MatchMode mode,
                   int fuzzy_threshold);

/// Percentage of samples with at least one reference matching some label.
double overlap(const CaptionDataset& dataset, const LabelSet& labels, MatchMode mode,
               int fuzzy_threshold = 90);

struct ConceptPools {
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> pools;  // aligned with labels; unique captions
};

/// Exact-substring pools over the given (training) samples.
ConceptPools build_concept_pools(std::span<const Sample> train, const LabelSet& labels);

struct ConceptEvalResult {
  double mean = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_no_concepts = 0;
  std::size_t skipped_no_hypotheses = 0;
  std::vector<std::optional<double>> per_sample;
};

/// Mean over test samples of the best sentence score among the union of the
/// pools its own references hit, minus its own reference strings. Throws
/// InputError when every sample is skipped.
ConceptEvalResult concept_coreset_eval(std::span<const Sample> test, const ConceptPools& pools,
                                       const MetricParams& params, Execution exec = Execution::parallel);

}  // namespace divkit
