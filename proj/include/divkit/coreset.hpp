#pragma once

#include <span>
#include <string>
#include <vector>

#include "divkit/score_matrix.hpp"
#include "divkit/util.hpp"

namespace divkit {

struct CoverResult {
  double threshold = 0;
  std::vector<std::size_t> selected;  // hypothesis rows in pick order
  std::vector<std::string> selected_captions;
  std::size_t covered = 0;
  std::vector<std::string> uncoverable;
  double mean_best_score = 0;  // over covered samples, best selected score
};

/// Greedy set cover: repeatedly take the hypothesis covering the most
/// uncovered samples (score >= threshold), ties to the lower row.
CoverResult greedy_cover(const ScoreMatrix& matrix, double threshold,
                         Execution exec = Execution::parallel);

struct CurvePoint {
  double threshold = 0;
  std::size_t count = 0;
  double coverage_pct = 0;
  CoverResult cover;
};

/// Throws InputError unless thresholds are sorted ascending.
std::vector<CurvePoint> coverage_curve(const ScoreMatrix& matrix, std::span<const double> thresholds,
                                       Execution exec = Execution::parallel);

}  // namespace divkit
