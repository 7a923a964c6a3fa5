#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "divkit/corpus.hpp"
#include "divkit/util.hpp"

namespace divkit {

/// 1 - cosine similarity; a zero vector has similarity 0 with everything.
double cosine_distance(const float* a, const float* b, std::size_t dim);
double cosine_distance(const std::vector<double>& a, const float* b);

/// Indices of the first occurrence of each distinct caption, compared after
/// lowercasing.
std::vector<std::size_t> unique_caption_indices(const Sample& sample);

struct SampleSemantics {
  std::string sample_id;
  std::size_t unique_caption_count = 0;
  std::vector<double> min_pairwise_distances;  // H_ij per unique caption
  std::optional<double> variance;
  std::optional<double> mean_delta_pct;
  double novelty_pct = 0;
};

/// Per-sample analysis; the serial path is the reference for the OpenMP one.
std::vector<SampleSemantics> analyze_samples(const CaptionDataset& dataset, const EmbeddingStore& embeddings,
                                             Execution exec = Execution::parallel);

inline constexpr double kHistogramWidth = 0.05;
inline constexpr std::size_t kHistogramBuckets = 40;  // covers [0, 2]

struct RedundancyResult {
  std::vector<std::vector<double>> per_sample;  // empty for excluded samples
  std::array<std::size_t, kHistogramBuckets> histogram{};
  std::size_t excluded = 0;
};

RedundancyResult redundancy(const CaptionDataset& dataset, const EmbeddingStore& embeddings);

struct PerSampleValues {
  std::vector<std::optional<double>> per_sample;
  std::size_t excluded = 0;
  double mean = 0;  // over non-excluded samples
};

PerSampleValues mean_delta(const CaptionDataset& dataset, const EmbeddingStore& embeddings);
PerSampleValues sample_variance(const CaptionDataset& dataset, const EmbeddingStore& embeddings);

struct NoveltyResult {
  std::vector<double> per_sample;
  double mean = 0;
};

/// Percentage of each sample's references whose lowercased string occurs exactly once in
/// that sample.
NoveltyResult novelty(const CaptionDataset& dataset);

std::size_t histogram_bucket(double distance);

}  // namespace divkit
