#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divkit/ngram.hpp"
#include "divkit/textproc.hpp"
#include "divkit/util.hpp"

namespace divkit {

inline constexpr double kHeadFraction = 0.9;

struct VocabStats {
  std::size_t unique = 0;
  double ws_unique = 0;  // percent
  double bs_unique = 0;  // percent
  std::size_t head = 0;
  std::size_t tokens = 0;
};

/// Token statistics over every reference in `corpus`. Samples with no tokens
/// are left out of the per-sample percentage means.
VocabStats vocab_stats(const TokenCorpus& corpus);

struct PosStats {
  double wsnu = 0, bsnu = 0, wsvu = 0, bsvu = 0;  // percent
  std::size_t nc = 0, vc = 0, nh = 0, vh = 0;
  double npc = 0, vpc = 0, tpc = 0;
};

/// Requires tags on every sequence. Nouns are NOUN and PROPN; verbs are VERB.
PosStats pos_stats(const TokenCorpus& tagged);

inline const std::string kBos = "[BOS]";
inline const std::string kEos = "[EOS]";

/// Successor counts for every (N-1)-token context of the captions padded with
/// one [BOS] and one [EOS].
class NGramModel {
 public:
  struct ContextHash {
    std::size_t operator()(const TokenIds& ids) const;
  };
  using Successors = std::unordered_map<TokenId, std::size_t>;
  using Table = std::unordered_map<TokenIds, Successors, ContextHash>;

  NGramModel(int order, Interner interner, Table table);

  int order() const { return order_; }
  std::size_t context_count() const { return table_.size(); }
  const Table& table() const { return table_; }
  const Interner& interner() const { return interner_; }

  /// Decoded successor counts of a context; empty if unseen.
  std::map<std::string, std::size_t> successors(const std::vector<std::string>& context) const;
  /// Every context decoded, for inspection and tests.
  std::map<std::vector<std::string>, std::map<std::string, std::size_t>> decoded() const;

 private:
  int order_;
  Interner interner_;
  Table table_;
};

/// Throws InputError when order < 2.
NGramModel build_ngram_model(const TokenCorpus& corpus, int order, Execution exec = Execution::parallel);

/// Fraction of distinct contexts with two or more distinct successors.
double evs(const NGramModel& model);
/// Fraction of transitions whose context has two or more distinct successors.
double evs_occurrence_weighted(const NGramModel& model);

/// Context order used for position i (1-based) of the ED@N sum: 2, 3, then 4.
int ed_schedule_order(int position);

/// 1 + sum over positions 1..N-1 of EVS@K(position).
double ed_at_n(const TokenCorpus& corpus, int n);
/// Same from precomputed EVS values keyed by model order.
double ed_at_n(const std::map<int, double>& evs_by_order, int n);

struct DiversityReport {
  std::map<int, double> evs;
  std::map<int, double> evs_weighted;
  std::map<int, double> ed_at;
  VocabStats vocab;
  std::optional<PosStats> pos;
};

}  // namespace divkit
