#include "divkit/loo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "divkit/ngram.hpp"
#include "divkit/semantic.hpp"

namespace divkit {

void LooConfig::check() const {
  if (iterations < 1) throw InputError("iterations must be at least 1");
  if (refs_per_sample && *refs_per_sample < 1) throw InputError("refs_per_sample must be at least 1");
  if (variance_bins && *variance_bins < 2) throw InputError("variance_bins must be at least 2");
  if (metrics.empty()) throw InputError("no metrics requested");
  for (const auto& m : metrics) m.check();
}

const MetricSummary& LooResult::at(Metric m) const {
  for (const auto& s : metrics)
    if (s.metric == m) return s;
  throw Error(std::string("metric not in result: ") + to_string(m));
}

namespace {

std::vector<std::size_t> eligible_samples(const TokenCorpus& corpus) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i)
    if (corpus.samples[i].size() >= 2) out.push_back(i);
  return out;
}

MetricSummary summarize(Metric metric, std::vector<double> scores, bool keep) {
  MetricSummary s;
  s.metric = metric;
  const double n = static_cast<double>(scores.size());
  double sum = 0;
  for (double x : scores) sum += x;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  s.min = *lo;
  s.max = *hi;
  // summation rounding must not push a constant series outside its own range
  s.mean = std::clamp(sum / n, s.min, s.max);
  double sq = 0;
  for (double x : scores) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / n);
  if (keep) s.iterations = std::move(scores);
  return s;
}

// Everything about a corpus that does not depend on which reference is held
// out: token profiles, and for the max-over-references metrics the full
// pairwise table, so an iteration reduces to lookups and sums.
class LooEngine {
 public:
  LooEngine(const TokenCorpus& corpus, const std::vector<MetricParams>& metrics, Execution exec)
      : corpus_(corpus), metrics_(metrics), eligible_(eligible_samples(corpus)) {
    const std::size_t ns = eligible_.size();
    std::vector<std::vector<TokenIds>> ids(ns);
    Interner interner;
    for (std::size_t s = 0; s < ns; ++s)
      for (const auto& ref : refs(s)) ids[s].push_back(interner.intern(ref));

    profiles_.resize(ns);
    bleu_loo_.resize(ns);
    pairwise_.assign(metrics_.size(), std::vector<std::vector<double>>(ns));
    const bool want_bleu = std::any_of(metrics_.begin(), metrics_.end(), [](const MetricParams& p) { return is_bleu(p.metric); });

    if (std::any_of(metrics_.begin(), metrics_.end(), [](const MetricParams& p) { return p.metric == Metric::cider; }))
      index_grams();

    auto prepare = [&](std::size_t s) {
      const auto& r = refs(s);
      const std::size_t k_count = r.size();
      for (const auto& t : ids[s]) profiles_[s].push_back(profile_caption(t));
      if (want_bleu) {
        for (std::size_t k = 0; k < k_count; ++k) {
          std::vector<const HypProfile*> rest;
          for (std::size_t j = 0; j < k_count; ++j)
            if (j != k) rest.push_back(&profiles_[s][j]);
          bleu_loo_[s].push_back(bleu_stats(profiles_[s][k], profile_references(rest)));
        }
      }
      for (std::size_t m = 0; m < metrics_.size(); ++m) {
        const auto metric = metrics_[m].metric;
        if (metric != Metric::rouge_l && metric != Metric::meteor_lite) continue;
        auto& table = pairwise_[m][s];
        table.assign(k_count * k_count, 0.0);
        for (std::size_t k = 0; k < k_count; ++k)
          for (std::size_t j = 0; j < k_count; ++j)
            if (j != k) table[k * k_count + j] = sentence_score(metrics_[m], r[k], std::span(&r[j], 1));
      }
    };

    if (exec == Execution::serial) {
      for (std::size_t s = 0; s < ns; ++s) prepare(s);
    } else {
#pragma omp parallel for schedule(dynamic, 4)
      for (std::size_t s = 0; s < ns; ++s) prepare(s);
    }
  }

  std::size_t eligible_count() const { return eligible_.size(); }

  // hyps[s] is the held-out reference of eligible sample s; subsets, when
  // given, restrict the remaining references (sorted reference indices).
  double score(std::size_t m, const std::vector<std::size_t>& hyps,
               const std::vector<std::vector<std::size_t>>* subsets) const {
    const auto& params = metrics_[m];
    const std::size_t ns = eligible_.size();
    auto rest_of = [&](std::size_t s) {
      if (subsets) return (*subsets)[s];
      std::vector<std::size_t> rest;
      for (std::size_t j = 0; j < refs(s).size(); ++j)
        if (j != hyps[s]) rest.push_back(j);
      return rest;
    };

    if (is_bleu(params.metric)) {
      BleuStats total;
      for (std::size_t s = 0; s < ns; ++s) {
        if (!subsets) {
          total += bleu_loo_[s][hyps[s]];
          continue;
        }
        std::vector<const HypProfile*> rest;
        for (std::size_t j : (*subsets)[s]) rest.push_back(&profiles_[s][j]);
        total += bleu_stats(profiles_[s][hyps[s]], profile_references(rest));
      }
      return bleu_from_stats(total, bleu_order(params.metric), BleuSmoothing::none);
    }

    if (params.metric == Metric::cider) {
      std::vector<std::vector<std::size_t>> rest(ns);
      for (std::size_t s = 0; s < ns; ++s) rest[s] = rest_of(s);
      return cider_score(params.cider_max_n, hyps, rest);
    }

    double sum = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      const std::size_t k_count = refs(s).size();
      const auto& table = pairwise_[m][s];
      double best = 0;
      for (std::size_t j : rest_of(s)) best = std::max(best, table[hyps[s] * k_count + j]);
      sum += best;
    }
    return sum / static_cast<double>(ns);
  }

 private:
  const std::vector<TokenSequence>& refs(std::size_t s) const { return corpus_.samples[eligible_[s]]; }

  using DenseGrams = std::vector<std::pair<std::uint32_t, std::uint32_t>>;  // (rank, count)

  // Ranks every n-gram of the corpus in GramKey order. Document frequencies
  // then live in flat arrays, and a rank-ordered merge visits n-grams in the
  // same order CiderModel does, so the sums round identically.
  void index_grams() {
    const std::size_t ns = eligible_.size();
    std::vector<std::vector<HypProfile>> prof(ns);
    Interner interner;
    for (std::size_t s = 0; s < ns; ++s)
      for (const auto& ref : refs(s)) prof[s].push_back(profile_caption(interner.intern(ref)));
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
      auto& keys = gram_keys_[n];
      for (const auto& sample : prof)
        for (const auto& p : sample)
          for (const auto& [key, c] : p.grams[n]) keys.push_back(key);
      std::sort(keys.begin(), keys.end());
      keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    }
    dense_.resize(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      dense_[s].resize(prof[s].size());
      for (std::size_t k = 0; k < prof[s].size(); ++k)
        for (std::size_t n = 0; n < kMaxOrder; ++n) {
          const auto& keys = gram_keys_[n];
          auto& out = dense_[s][k][n];
          for (const auto& [key, c] : prof[s][k].grams[n])
            out.emplace_back(static_cast<std::uint32_t>(std::lower_bound(keys.begin(), keys.end(), key) - keys.begin()), c);
        }
    }
    log_count_.resize(ns + 1);
    for (std::size_t d = 0; d <= ns; ++d) log_count_[d] = std::log(std::max(1.0, static_cast<double>(d)));
  }

  double cider_score(int max_n, const std::vector<std::size_t>& hyps, const std::vector<std::vector<std::size_t>>& rest) const {
    const std::size_t ns = eligible_.size();
    const auto orders = static_cast<std::size_t>(max_n);
    const double log_sets = std::log(static_cast<double>(std::max<std::size_t>(1, ns)));

    std::array<std::vector<std::uint32_t>, kMaxOrder> df, stamp;
    for (std::size_t n = 0; n < orders; ++n) {
      df[n].assign(gram_keys_[n].size(), 0);
      stamp[n].assign(gram_keys_[n].size(), 0);
    }
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t j : rest[s])
        for (std::size_t n = 0; n < orders; ++n)
          for (const auto& [g, c] : dense_[s][j][n])
            if (stamp[n][g] != s + 1) {
              stamp[n][g] = static_cast<std::uint32_t>(s + 1);
              ++df[n][g];
            }

    struct Weighted {
      std::array<std::vector<std::pair<std::uint32_t, double>>, kMaxOrder> w;
      std::array<double, kMaxOrder> norm{};
    };
    auto weigh = [&](const std::array<DenseGrams, kMaxOrder>& grams, Weighted& out) {
      for (std::size_t n = 0; n < orders; ++n) {
        out.w[n].clear();
        double sq = 0;
        for (const auto& [g, c] : grams[n]) {
          const double weight = static_cast<double>(c) * (log_sets - log_count_[df[n][g]]);
          out.w[n].emplace_back(g, weight);
          sq += weight * weight;
        }
        out.norm[n] = std::sqrt(sq);
      }
    };

    Weighted hyp, ref;
    double sum = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (rest[s].empty()) continue;
      weigh(dense_[s][hyps[s]], hyp);
      double total = 0;
      for (std::size_t j : rest[s]) {
        weigh(dense_[s][j], ref);
        for (std::size_t n = 0; n < orders; ++n) {
          if (hyp.norm[n] == 0 || ref.norm[n] == 0) continue;
          const auto& a = hyp.w[n];
          const auto& b = ref.w[n];
          double dot = 0;
          std::size_t i = 0;
          for (const auto& [g, w] : a) {
            while (i < b.size() && b[i].first < g) ++i;
            if (i < b.size() && b[i].first == g) dot += w * b[i].second;
          }
          total += dot / (hyp.norm[n] * ref.norm[n]);
        }
      }
      sum += 10.0 * total / (static_cast<double>(max_n) * static_cast<double>(rest[s].size()));
    }
    return sum / static_cast<double>(ns);
  }

  const TokenCorpus& corpus_;
  const std::vector<MetricParams>& metrics_;
  std::vector<std::size_t> eligible_;
  std::vector<std::vector<HypProfile>> profiles_;
  std::vector<std::vector<BleuStats>> bleu_loo_;               // [sample][held-out k]
  std::vector<std::vector<std::vector<double>>> pairwise_;     // [metric][sample][k * K + j]
  std::array<std::vector<GramKey>, kMaxOrder> gram_keys_;
  std::vector<std::vector<std::array<DenseGrams, kMaxOrder>>> dense_;  // [sample][ref][order]
  std::vector<double> log_count_;
};

LooResult finish(const LooConfig& config, const TokenCorpus& corpus, std::size_t used,
                 std::vector<std::vector<double>> scores) {
  LooResult out;
  out.samples_used = used;
  out.samples_dropped = corpus.samples.size() - used;
  for (std::size_t m = 0; m < config.metrics.size(); ++m)
    out.metrics.push_back(summarize(config.metrics[m].metric, std::move(scores[m]), config.keep_iteration_scores));
  return out;
}

void require_eligible(std::size_t n) {
  if (n == 0) throw InputError("leave-one-out needs at least one sample with two or more references");
}

}  // namespace

std::vector<std::size_t> draw_hypotheses(const TokenCorpus& corpus, std::uint64_t seed, int iteration) {
  std::mt19937_64 eng(seed ^ static_cast<std::uint64_t>(iteration));
  std::vector<std::size_t> out;
  for (const auto& refs : corpus.samples)
    if (refs.size() >= 2) out.push_back(static_cast<std::size_t>(uniform_below(eng, refs.size())));
  return out;
}

LooResult loo_estimate(const TokenCorpus& corpus, const LooConfig& config, Execution exec) {
  config.check();
  const LooEngine engine(corpus, config.metrics, exec);
  require_eligible(engine.eligible_count());

  const std::size_t iters = static_cast<std::size_t>(config.iterations);
  std::vector<std::vector<double>> scores(config.metrics.size(), std::vector<double>(iters));
  auto run = [&](std::size_t t) {
    const auto hyps = draw_hypotheses(corpus, config.seed, static_cast<int>(t));
    for (std::size_t m = 0; m < config.metrics.size(); ++m) scores[m][t] = engine.score(m, hyps, nullptr);
  };
  if (exec == Execution::serial) {
    for (std::size_t t = 0; t < iters; ++t) run(t);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t t = 0; t < iters; ++t) run(t);
  }
  return finish(config, corpus, engine.eligible_count(), std::move(scores));
}

LooResult loo_estimate_reference(const TokenCorpus& corpus, const LooConfig& config) {
  config.check();
  const auto eligible = eligible_samples(corpus);
  require_eligible(eligible.size());
  std::vector<std::vector<double>> scores(config.metrics.size());
  for (int t = 0; t < config.iterations; ++t) {
    const auto hyps = draw_hypotheses(corpus, config.seed, t);
    std::vector<EvalPair> pairs;
    for (std::size_t s = 0; s < eligible.size(); ++s) {
      const auto& refs = corpus.samples[eligible[s]];
      EvalPair p;
      p.hyp = refs[hyps[s]];
      for (std::size_t j = 0; j < refs.size(); ++j)
        if (j != hyps[s]) p.refs.push_back(refs[j]);
      pairs.push_back(std::move(p));
    }
    for (std::size_t m = 0; m < config.metrics.size(); ++m) scores[m].push_back(corpus_score(config.metrics[m], pairs));
  }
  return finish(config, corpus, eligible.size(), std::move(scores));
}

LooResult masked_loo(const TokenCorpus& tagged, const LooConfig& config, Execution exec) {
  MaskCounter counter;
  return loo_estimate(semantic_mask(tagged, counter), config, exec);
}

VocabMaskedLoo vocab_masked_loo(const TokenCorpus& corpus, const LooConfig& config, Execution exec) {
  const double f = config.mask.head_fraction;
  if (!(f > 0 && f <= 1)) throw InputError("head_fraction must be in (0, 1]");
  VocabMaskedLoo out;
  out.plain = loo_estimate(corpus, config, exec);
  out.masked = loo_estimate(vocab_tail_mask(corpus, f), config, exec);
  for (std::size_t m = 0; m < out.plain.metrics.size(); ++m) {
    const double p = out.plain.metrics[m].mean;
    out.relative_drop.push_back(p == 0 ? 0.0 : (p - out.masked.metrics[m].mean) / p);
  }
  return out;
}

std::vector<RefcountPoint> refcount_sweep(const TokenCorpus& corpus, const LooConfig& config,
                                          const std::vector<int>& r_values, Execution exec) {
  config.check();
  if (r_values.empty()) throw InputError("reference-count sweep needs at least one r");
  for (int r : r_values)
    if (r < 1) throw InputError("reference count r must be at least 1");
  const LooEngine engine(corpus, config.metrics, exec);
  require_eligible(engine.eligible_count());
  const auto eligible = eligible_samples(corpus);

  const std::size_t iters = static_cast<std::size_t>(config.iterations);
  const std::size_t nm = config.metrics.size();
  // scores[r index][metric][iteration]
  std::vector<std::vector<std::vector<double>>> scores(
      r_values.size(), std::vector<std::vector<double>>(nm, std::vector<double>(iters)));

  auto run = [&](std::size_t t) {
    const auto hyps = draw_hypotheses(corpus, config.seed, static_cast<int>(t));
    // Separate stream so the hypothesis draw is the same as plain leave-one-out.
    std::mt19937_64 sub(splitmix64(config.seed ^ static_cast<std::uint64_t>(t)));
    std::vector<std::vector<std::size_t>> orders(eligible.size());
    for (std::size_t s = 0; s < eligible.size(); ++s) {
      auto& order = orders[s];
      for (std::size_t j = 0; j < corpus.samples[eligible[s]].size(); ++j)
        if (j != hyps[s]) order.push_back(j);
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(sub, i)]);
    }
    for (std::size_t ri = 0; ri < r_values.size(); ++ri) {
      std::vector<std::vector<std::size_t>> subsets(eligible.size());
      for (std::size_t s = 0; s < eligible.size(); ++s) {
        const std::size_t keep = std::min(orders[s].size(), static_cast<std::size_t>(r_values[ri]));
        subsets[s].assign(orders[s].begin(), orders[s].begin() + static_cast<std::ptrdiff_t>(keep));
        std::sort(subsets[s].begin(), subsets[s].end());
      }
      for (std::size_t m = 0; m < nm; ++m) scores[ri][m][t] = engine.score(m, hyps, &subsets);
    }
  };
  if (exec == Execution::serial) {
    for (std::size_t t = 0; t < iters; ++t) run(t);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t t = 0; t < iters; ++t) run(t);
  }

  std::vector<RefcountPoint> out;
  for (std::size_t ri = 0; ri < r_values.size(); ++ri)
    out.push_back({r_values[ri], finish(config, corpus, engine.eligible_count(), std::move(scores[ri]))});
  return out;
}

VarianceBinnedLoo variance_binned_loo(const CaptionDataset& dataset, const TokenCorpus& corpus,
                                      const EmbeddingStore& embeddings, const LooConfig& config, Execution exec) {
  config.check();
  if (!config.variance_bins) throw InputError("variance_bins is required for variance-binned leave-one-out");
  if (corpus.samples.size() != dataset.samples.size()) throw Error("token corpus does not match dataset");
  const auto variances = sample_variance(dataset, embeddings);

  std::vector<std::size_t> ranked;
  std::vector<double> values;
  std::vector<std::size_t> degenerate;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    if (variances.per_sample[i]) {
      ranked.push_back(i);
      values.push_back(*variances.per_sample[i]);
    } else {
      degenerate.push_back(i);
    }
  }
  const auto nbins = static_cast<std::size_t>(*config.variance_bins);
  std::vector<std::vector<std::size_t>> members(nbins);
  const auto bin_of = quantile_bins(values, nbins);
  for (std::size_t r = 0; r < ranked.size(); ++r) members[bin_of[r]].push_back(ranked[r]);

  auto make_bin = [&](std::string name, const std::vector<std::size_t>& idx) {
    VarianceBin bin;
    bin.name = std::move(name);
    TokenCorpus sub;
    bool first = true;
    for (std::size_t i : idx) {
      const double v = variances.per_sample[i].value_or(0.0);
      bin.min_variance = first ? v : std::min(bin.min_variance, v);
      bin.max_variance = first ? v : std::max(bin.max_variance, v);
      first = false;
      bin.sample_ids.push_back(dataset.samples[i].id);
      sub.samples.push_back(corpus.samples[i]);
    }
    if (!eligible_samples(sub).empty()) bin.result = loo_estimate(sub, config, exec);
    return bin;
  };

  VarianceBinnedLoo out;
  out.degenerate_samples = degenerate.size();
  for (std::size_t b = 0; b < nbins; ++b)
    if (!members[b].empty()) out.bins.push_back(make_bin("q" + std::to_string(b + 1), members[b]));
  if (!degenerate.empty()) out.bins.push_back(make_bin("degenerate", degenerate));
  return out;
}

}  // namespace divkit
