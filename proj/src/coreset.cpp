#include "divkit/coreset.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

namespace divkit {

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t overlap_count(const Bits& a, const Bits& b) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < a.size(); ++w) n += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
  return n;
}

struct Pick {
  std::size_t gain = 0;
  std::size_t row = 0;
};

// Larger gain wins; equal gains go to the lower row, which makes the parallel
// reduction independent of how rows were split among workers.
bool better(const Pick& a, const Pick& b) { return a.gain > b.gain || (a.gain == b.gain && a.row < b.row); }

}  // namespace

CoverResult greedy_cover(const ScoreMatrix& matrix, double threshold, Execution exec) {
  const std::size_t rows = matrix.rows();
  const std::size_t cols = matrix.cols();
  if (rows == 0 || cols == 0) throw InputError("core-set needs a non-empty score matrix");
  const std::size_t words = (cols + 63) / 64;

  std::vector<Bits> covers(rows, Bits(words, 0));
  Bits uncovered(words, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (static_cast<double>(matrix.at(r, c)) >= threshold) {
        covers[r][c / 64] |= std::uint64_t{1} << (c % 64);
        uncovered[c / 64] |= std::uint64_t{1} << (c % 64);
      }

  CoverResult out;
  out.threshold = threshold;
  for (std::size_t c = 0; c < cols; ++c)
    if (!(uncovered[c / 64] >> (c % 64) & 1)) out.uncoverable.push_back(matrix.sample_ids[c]);

  const auto remaining = [&] { return std::any_of(uncovered.begin(), uncovered.end(), [](std::uint64_t w) { return w != 0; }); };
  while (remaining()) {
    Pick best;
    if (exec == Execution::serial) {
      for (std::size_t r = 0; r < rows; ++r) {
        const Pick p{overlap_count(covers[r], uncovered), r};
        if (better(p, best)) best = p;
      }
    } else {
#pragma omp parallel
      {
        Pick local;
#pragma omp for schedule(static)
        for (std::size_t r = 0; r < rows; ++r) {
          const Pick p{overlap_count(covers[r], uncovered), r};
          if (better(p, local)) local = p;
        }
#pragma omp critical
        if (better(local, best)) best = local;
      }
    }
    out.selected.push_back(best.row);
    out.selected_captions.push_back(matrix.hypothesis_keys[best.row]);
    for (std::size_t w = 0; w < words; ++w) uncovered[w] &= ~covers[best.row][w];
  }

  out.covered = cols - out.uncoverable.size();
  double sum = 0;
  for (std::size_t c = 0; c < cols && !out.selected.empty(); ++c) {
    double top = -1;
    for (std::size_t r : out.selected) top = std::max(top, static_cast<double>(matrix.at(r, c)));
    if (top >= threshold) sum += top;
  }
  out.mean_best_score = out.covered == 0 ? 0.0 : sum / static_cast<double>(out.covered);
  return out;
}

std::vector<CurvePoint> coverage_curve(const ScoreMatrix& matrix, std::span<const double> thresholds, Execution exec) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw InputError("thresholds must be sorted ascending");
  std::vector<CurvePoint> out;
  for (double t : thresholds) {
    CurvePoint p;
    p.threshold = t;
    p.cover = greedy_cover(matrix, t, exec);
    p.count = p.cover.selected.size();
    p.coverage_pct = 100.0 * static_cast<double>(p.cover.covered) / static_cast<double>(matrix.cols());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace divkit
