#pragma once

#include <array>
#include <span>
#include <unordered_map>
#include <string>
#include <vector>

#include "divkit/ngram.hpp"
#include "divkit/textproc.hpp"

namespace divkit {

enum class Metric { bleu1, bleu2, bleu3, bleu4, rouge_l, cider, meteor_lite };
enum class BleuSmoothing { none, add_one_counts };

const char* to_string(Metric m);
Metric parse_metric(const std::string& s);
inline bool is_bleu(Metric m) { return m <= Metric::bleu4; }
inline int bleu_order(Metric m) { return static_cast<int>(m) + 1; }

struct MetricParams {
  Metric metric = Metric::bleu4;
  BleuSmoothing bleu_smoothing = BleuSmoothing::none;
  double rouge_beta = 1.2;
  int cider_max_n = 4;

  /// Throws InputError on rouge_beta <= 0 or cider_max_n outside [1,4].
  void check() const;
  /// Stable textual form used in cache identities and reports.
  std::string canonical() const;
};

struct EvalPair {
  TokenSequence hyp;
  std::vector<TokenSequence> refs;
};

/// Clipped modified n-gram precision with closest-reference brevity penalty.
/// With add_one_counts, orders >= 2 get +1 on numerator and denominator.
double sentence_bleu(const TokenSequence& hyp, std::span<const TokenSequence> refs, int n,
                     BleuSmoothing smoothing = BleuSmoothing::none);

/// Counts pooled over all pairs before the geometric mean; no smoothing.
double corpus_bleu(std::span<const EvalPair> pairs, int n);

/// BLEU@n from accumulated statistics. Zero hypothesis length gives 0.
double bleu_from_stats(const BleuStats& stats, int n, BleuSmoothing smoothing);

double rouge_l(const TokenSequence& hyp, std::span<const TokenSequence> refs, double beta = 1.2);
double rouge_l_ids(std::span<const TokenId> hyp, std::span<const TokenId> ref, double beta);
std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b);

/// CIDEr with document frequencies taken over the reference sets of exactly
/// the given pairs.
std::vector<double> cider(std::span<const EvalPair> pairs, int max_n = 4);

/// Exact plus suffix-stem unigram alignment, maximizing matches and then
/// minimizing chunks.
double meteor_lite(const TokenSequence& hyp, std::span<const TokenSequence> refs);

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

/// Best alignment between two sequences where `a[i]` may align to `b[j]` when
/// the tokens or their stems are equal.
Alignment meteor_align(std::span<const TokenId> hyp, std::span<const TokenId> hyp_stems,
                       std::span<const TokenId> ref, std::span<const TokenId> ref_stems);
double meteor_score(const Alignment& a, std::size_t hyp_len, std::size_t ref_len);

/// Crude suffix stripper used by meteor_lite (see docs/metrics.md).
std::string suffix_stem(std::string_view word);

/// Dispatches a sentence-level score for one (hypothesis, references) pair.
/// CIDEr is not sentence-level and is rejected here.
double sentence_score(const MetricParams& params, const TokenSequence& hyp,
                      std::span<const TokenSequence> refs);

/// Corpus-level aggregate as the standard caption toolkit reports it: pooled
/// counts for BLEU, mean of per-pair scores for the others.
double corpus_score(const MetricParams& params, std::span<const EvalPair> pairs);

}  // namespace divkit

namespace divkit {

/// TF-IDF model over a fixed collection of reference sets. Document frequency
/// of an n-gram is the number of sets in which any reference contains it.
class CiderModel {
 public:
  struct Vector {
    std::array<std::vector<std::pair<GramKey, double>>, kMaxOrder> weights;
    std::array<double, kMaxOrder> norms{};
  };

  CiderModel(const std::vector<std::vector<const HypProfile*>>& ref_sets, int max_n = 4);

  Vector vectorize(const HypProfile& caption) const;
  /// CIDEr of a vectorized hypothesis against reference set `set`.
  double score(const Vector& hyp, std::size_t set) const;
  std::size_t set_count() const { return ref_vectors_.size(); }

 private:
  int max_n_;
  double log_sets_;
  std::array<std::unordered_map<GramKey, std::uint32_t, GramKeyHash>, kMaxOrder> df_;
  std::vector<std::vector<Vector>> ref_vectors_;
};

}  // namespace divkit
