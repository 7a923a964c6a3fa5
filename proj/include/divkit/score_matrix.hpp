#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "divkit/corpus.hpp"
#include "divkit/metrics.hpp"
#include "divkit/util.hpp"

namespace divkit {

/// Hypotheses x samples metric scores, stored as 32-bit floats (the cache
/// format's precision).
struct ScoreMatrix {
  std::vector<std::string> hypothesis_keys;
  std::vector<std::string> sample_ids;
  std::vector<float> values;  // row-major, rows = hypotheses
  std::string identity;
  MetricParams params;

  std::size_t rows() const { return hypothesis_keys.size(); }
  std::size_t cols() const { return sample_ids.size(); }
  float at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
};

struct MatrixBuildInfo {
  bool cache_hit = false;
  bool recovered_from_corruption = false;
  std::string corruption_reason;
  std::string manifest_path;
};

/// Matrix parameters used by the core-set and concept analyses: sentence BLEU
/// with add-one smoothing for orders >= 2.
MetricParams default_matrix_params(Metric metric = Metric::bleu4);

/// Precomputed per-caption profiles for one (hypotheses, samples) problem.
/// `cell` is the single source of truth for a matrix entry; the fill kernels
/// only differ in how they schedule cells.
class MatrixKernel {
 public:
  MatrixKernel(std::span<const std::string> hypotheses, std::span<const Sample> samples,
               const MetricParams& params);
  ~MatrixKernel();
  MatrixKernel(MatrixKernel&&) noexcept;
  MatrixKernel& operator=(MatrixKernel&&) noexcept;

  std::size_t rows() const;
  std::size_t cols() const;
  double cell(std::size_t r, std::size_t c) const;

  /// `out` must hold rows() * cols() values.
  void fill(std::span<float> out, Execution exec) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Deduplicated hypothesis strings in first-occurrence order.
std::vector<std::string> dedupe_hypotheses(std::span<const std::string> hypotheses);

/// Builds (or reads from `cache_dir`) the score matrix. An empty `cache_dir`
/// disables caching. A corrupt cache entry is recomputed and reported through
/// `info`.
ScoreMatrix build_score_matrix(std::span<const std::string> hypotheses, std::span<const Sample> samples,
                               const MetricParams& params, const std::string& cache_dir,
                               MatrixBuildInfo* info = nullptr, Execution exec = Execution::parallel);

std::string matrix_identity(std::span<const std::string> hypotheses, std::span<const Sample> samples,
                            const MetricParams& params);

}  // namespace divkit
