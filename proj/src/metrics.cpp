#include "divkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "divkit/util.hpp"

namespace divkit {

// ---------------------------------------------------------------------------
// Interning and n-gram profiles

TokenId Interner::intern(std::string_view token) {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  const auto id = static_cast<TokenId>(strings_.size());
  strings_.emplace_back(token);
  ids_.emplace(strings_.back(), id);
  return id;
}

TokenIds Interner::intern(const TokenSequence& seq) {
  TokenIds ids;
  ids.reserve(seq.tokens.size());
  for (const auto& t : seq.tokens) ids.push_back(intern(t));
  return ids;
}

std::optional<TokenId> Interner::find(std::string_view token) const {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  return std::nullopt;
}

GramKey make_key(std::span<const TokenId> window) {
  std::uint64_t parts[4] = {0xffffffffULL, 0xffffffffULL, 0xffffffffULL, 0xffffffffULL};
  for (std::size_t i = 0; i < window.size() && i < 4; ++i) parts[i] = window[i];
  return {(parts[0] << 32) | parts[1], (parts[2] << 32) | parts[3]};
}

HypProfile profile_caption(std::span<const TokenId> ids, int max_order) {
  HypProfile p;
  p.length = static_cast<std::uint32_t>(ids.size());
  std::vector<GramKey> keys;
  for (int n = 1; n <= max_order; ++n) {
    keys.clear();
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= ids.size(); ++i)
      keys.push_back(make_key(ids.subspan(i, static_cast<std::size_t>(n))));
    std::sort(keys.begin(), keys.end());
    auto& out = p.grams[static_cast<std::size_t>(n - 1)];
    for (std::size_t i = 0; i < keys.size();) {
      std::size_t j = i;
      while (j < keys.size() && keys[j] == keys[i]) ++j;
      out.emplace_back(keys[i], static_cast<std::uint32_t>(j - i));
      i = j;
    }
  }
  return p;
}

namespace {

GramCounts merge_max(const std::vector<const GramCounts*>& lists) {
  GramCounts all;
  for (const auto* l : lists) all.insert(all.end(), l->begin(), l->end());
  std::sort(all.begin(), all.end());
  GramCounts out;
  for (const auto& [k, c] : all) {
    if (!out.empty() && out.back().first == k) {
      out.back().second = std::max(out.back().second, c);
    } else {
      out.emplace_back(k, c);
    }
  }
  return out;
}

}  // namespace

RefProfile profile_references(std::span<const HypProfile* const> refs) {
  RefProfile r;
  for (const auto* p : refs) r.lengths.push_back(p->length);
  for (int n = 0; n < kMaxOrder; ++n) {
    std::vector<const GramCounts*> lists;
    lists.reserve(refs.size());
    for (const auto* p : refs) lists.push_back(&p->grams[static_cast<std::size_t>(n)]);
    r.max_counts[static_cast<std::size_t>(n)] = merge_max(lists);
  }
  return r;
}

RefProfile profile_references(std::span<const HypProfile> refs) {
  std::vector<const HypProfile*> ptrs;
  for (const auto& p : refs) ptrs.push_back(&p);
  return profile_references(std::span<const HypProfile* const>(ptrs));
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (int n = 0; n < kMaxOrder; ++n) {
    matches[static_cast<std::size_t>(n)] += o.matches[static_cast<std::size_t>(n)];
    totals[static_cast<std::size_t>(n)] += o.totals[static_cast<std::size_t>(n)];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

std::uint32_t closest_ref_length(std::span<const std::uint32_t> lengths, std::uint32_t hyp_len) {
  std::uint32_t best = 0;
  long long best_diff = -1;
  for (std::uint32_t len : lengths) {
    const long long diff = std::llabs(static_cast<long long>(len) - static_cast<long long>(hyp_len));
    if (best_diff < 0 || diff < best_diff || (diff == best_diff && len < best)) {
      best = len;
      best_diff = diff;
    }
  }
  return best;
}

BleuStats bleu_stats(const HypProfile& hyp, const RefProfile& refs) {
  BleuStats s;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    const auto& h = hyp.grams[n];
    const auto& r = refs.max_counts[n];
    double total = 0, matched = 0;
    std::size_t j = 0;
    for (const auto& [key, count] : h) {
      total += count;
      while (j < r.size() && r[j].first < key) ++j;
      if (j < r.size() && r[j].first == key) matched += std::min(count, r[j].second);
    }
    s.totals[n] = total;
    s.matches[n] = matched;
  }
  s.hyp_len = hyp.length;
  s.ref_len = closest_ref_length(refs.lengths, hyp.length);
  return s;
}

// ---------------------------------------------------------------------------
// Parameters

const char* to_string(Metric m) {
  switch (m) {
    case Metric::bleu1: return "bleu1";
    case Metric::bleu2: return "bleu2";
    case Metric::bleu3: return "bleu3";
    case Metric::bleu4: return "bleu4";
    case Metric::rouge_l: return "rouge_l";
    case Metric::cider: return "cider";
    case Metric::meteor_lite: return "meteor_lite";
  }
  return "?";
}

Metric parse_metric(const std::string& s) {
  for (Metric m : {Metric::bleu1, Metric::bleu2, Metric::bleu3, Metric::bleu4, Metric::rouge_l, Metric::cider,
                   Metric::meteor_lite})
    if (s == to_string(m)) return m;
  throw InputError("unknown metric '" + s + "'");
}

void MetricParams::check() const {
  if (!(rouge_beta > 0)) throw InputError("rouge_beta must be positive");
  if (cider_max_n < 1 || cider_max_n > 4) throw InputError("cider_max_n must be in [1, 4]");
}

std::string MetricParams::canonical() const {
  std::ostringstream os;
  os << "metric=" << to_string(metric) << ";smoothing=" << (bleu_smoothing == BleuSmoothing::none ? "none" : "add_one_counts")
     << ";rouge_beta=" << rouge_beta << ";cider_max_n=" << cider_max_n;
  return os.str();
}

// ---------------------------------------------------------------------------
// BLEU

double bleu_from_stats(const BleuStats& stats, int n, BleuSmoothing smoothing) {
  if (n < 1 || n > kMaxOrder) throw InputError("BLEU order must be in [1, 4]");
  if (stats.hyp_len <= 0) return 0.0;
  double log_sum = 0;
  for (int k = 0; k < n; ++k) {
    double num = stats.matches[static_cast<std::size_t>(k)];
    double den = stats.totals[static_cast<std::size_t>(k)];
    if (smoothing == BleuSmoothing::add_one_counts && k >= 1) {
      num += 1;
      den += 1;
    }
    if (num <= 0 || den <= 0) return 0.0;
    log_sum += std::log(num / den);
  }
  const double bp = stats.hyp_len < stats.ref_len ? std::exp(1.0 - stats.ref_len / stats.hyp_len) : 1.0;
  return bp * std::exp(log_sum / n);
}

double sentence_bleu(const TokenSequence& hyp, std::span<const TokenSequence> refs, int n, BleuSmoothing smoothing) {
  if (refs.empty()) throw InputError("sentence_bleu needs at least one reference");
  if (n < 1 || n > kMaxOrder) throw InputError("BLEU order must be in [1, 4]");
  Interner interner;
  const auto hp = profile_caption(interner.intern(hyp));
  std::vector<HypProfile> rp;
  rp.reserve(refs.size());
  for (const auto& r : refs) rp.push_back(profile_caption(interner.intern(r)));
  return bleu_from_stats(bleu_stats(hp, profile_references(rp)), n, smoothing);
}

double corpus_bleu(std::span<const EvalPair> pairs, int n) {
  if (pairs.empty()) throw InputError("corpus_bleu needs at least one pair");
  Interner interner;
  BleuStats total;
  for (const auto& p : pairs) {
    if (p.refs.empty()) throw InputError("corpus_bleu: pair without references");
    const auto hp = profile_caption(interner.intern(p.hyp));
    std::vector<HypProfile> rp;
    for (const auto& r : p.refs) rp.push_back(profile_caption(interner.intern(r)));
    total += bleu_stats(hp, profile_references(rp));
  }
  return bleu_from_stats(total, n, BleuSmoothing::none);
}

// ---------------------------------------------------------------------------
// ROUGE-L

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_ids(std::span<const TokenId> hyp, std::span<const TokenId> ref, double beta) {
  const std::size_t l = lcs_length(hyp, ref);
  if (l == 0) return 0.0;
  const double p = static_cast<double>(l) / static_cast<double>(hyp.size());
  const double r = static_cast<double>(l) / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  return (1 + b2) * p * r / (r + b2 * p);
}

double rouge_l(const TokenSequence& hyp, std::span<const TokenSequence> refs, double beta) {
  if (refs.empty()) throw InputError("rouge_l needs at least one reference");
  if (!(beta > 0)) throw InputError("rouge_beta must be positive");
  Interner interner;
  const auto h = interner.intern(hyp);
  double best = 0;
  for (const auto& r : refs) best = std::max(best, rouge_l_ids(h, interner.intern(r), beta));
  return best;
}

// ---------------------------------------------------------------------------
// CIDEr

CiderModel::CiderModel(const std::vector<std::vector<const HypProfile*>>& ref_sets, int max_n)
    : max_n_(max_n), log_sets_(std::log(static_cast<double>(std::max<std::size_t>(1, ref_sets.size())))) {
  if (max_n < 1 || max_n > kMaxOrder) throw InputError("cider_max_n must be in [1, 4]");
  for (const auto& set : ref_sets) {
    for (int n = 0; n < max_n_; ++n) {
      std::vector<const GramCounts*> lists;
      for (const auto* p : set) lists.push_back(&p->grams[static_cast<std::size_t>(n)]);
      for (const auto& [key, _] : merge_max(lists)) ++df_[static_cast<std::size_t>(n)][key];
    }
  }
  ref_vectors_.reserve(ref_sets.size());
  for (const auto& set : ref_sets) {
    auto& vecs = ref_vectors_.emplace_back();
    vecs.reserve(set.size());
    for (const auto* p : set) vecs.push_back(vectorize(*p));
  }
}

CiderModel::Vector CiderModel::vectorize(const HypProfile& caption) const {
  Vector v;
  for (int n = 0; n < max_n_; ++n) {
    const auto idx = static_cast<std::size_t>(n);
    const auto& df = df_[idx];
    auto& w = v.weights[idx];
    w.reserve(caption.grams[idx].size());
    double sq = 0;
    for (const auto& [key, count] : caption.grams[idx]) {
      const auto it = df.find(key);
      const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
      const double weight = static_cast<double>(count) * (log_sets_ - std::log(std::max(1.0, d)));
      w.emplace_back(key, weight);
      sq += weight * weight;
    }
    v.norms[idx] = std::sqrt(sq);
  }
  return v;
}

double CiderModel::score(const Vector& hyp, std::size_t set) const {
  const auto& refs = ref_vectors_.at(set);
  if (refs.empty()) return 0.0;
  double total = 0;
  for (const auto& ref : refs) {
    for (int n = 0; n < max_n_; ++n) {
      const auto idx = static_cast<std::size_t>(n);
      if (hyp.norms[idx] == 0 || ref.norms[idx] == 0) continue;
      const auto& a = hyp.weights[idx];
      const auto& b = ref.weights[idx];
      double dot = 0;
      std::size_t j = 0;
      for (const auto& [key, w] : a) {
        while (j < b.size() && b[j].first < key) ++j;
        if (j < b.size() && b[j].first == key) dot += w * b[j].second;
      }
      total += dot / (hyp.norms[idx] * ref.norms[idx]);
    }
  }
  return 10.0 * total / (static_cast<double>(max_n_) * static_cast<double>(refs.size()));
}

std::vector<double> cider(std::span<const EvalPair> pairs, int max_n) {
  if (pairs.empty()) throw InputError("cider needs at least one pair");
  Interner interner;
  std::vector<HypProfile> hyps;
  std::vector<std::vector<HypProfile>> refs(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    hyps.push_back(profile_caption(interner.intern(pairs[i].hyp)));
    for (const auto& r : pairs[i].refs) refs[i].push_back(profile_caption(interner.intern(r)));
  }
  std::vector<std::vector<const HypProfile*>> sets(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (const auto& r : refs[i]) sets[i].push_back(&r);
  const CiderModel model(sets, max_n);
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back(model.score(model.vectorize(hyps[i]), i));
  return out;
}

// ---------------------------------------------------------------------------
// meteor-lite

std::string suffix_stem(std::string_view word) {
  auto ends = [&](std::string_view s) { return word.size() >= s.size() && word.substr(word.size() - s.size()) == s; };
  if (word.size() > 5 && ends("ing")) return std::string(word.substr(0, word.size() - 3));
  if (word.size() > 4 && (ends("ed") || ends("es"))) return std::string(word.substr(0, word.size() - 2));
  if (word.size() > 3 && ends("s") && !ends("ss")) return std::string(word.substr(0, word.size() - 1));
  return std::string(word);
}

namespace {

// Kuhn's augmenting-path maximum bipartite matching.
std::size_t max_matching(const std::vector<std::vector<std::size_t>>& cand, std::size_t right) {
  std::vector<long long> match_right(right, -1);
  std::size_t result = 0;
  std::vector<char> visited;
  std::function<bool(std::size_t)> augment = [&](std::size_t u) {
    for (std::size_t v : cand[u]) {
      if (visited[v]) continue;
      visited[v] = 1;
      if (match_right[v] < 0 || augment(static_cast<std::size_t>(match_right[v]))) {
        match_right[v] = static_cast<long long>(u);
        return true;
      }
    }
    return false;
  };
  for (std::size_t u = 0; u < cand.size(); ++u) {
    visited.assign(right, 0);
    if (augment(u)) ++result;
  }
  return result;
}

constexpr std::size_t kAlignNodeBudget = 2'000'000;

struct AlignSearch {
  const std::vector<std::vector<std::size_t>>& cand;
  std::vector<std::size_t> has_cand_suffix;  // hyp positions >= i with candidates
  std::size_t target;
  std::vector<char> used;
  std::size_t best = static_cast<std::size_t>(-1);
  std::size_t nodes = 0;

  void dfs(std::size_t i, long long prev, std::size_t matches, std::size_t chunks) {
    if (best == 1 || ++nodes > kAlignNodeBudget) return;
    if (chunks >= best) return;
    if (matches + has_cand_suffix[i] < target) return;
    if (i == cand.size()) {
      if (matches == target) best = chunks;
      return;
    }
    // continuing the current chunk first finds low-chunk alignments early
    if (prev >= 0) {
      const auto next = static_cast<std::size_t>(prev + 1);
      if (next < used.size() && !used[next] && std::binary_search(cand[i].begin(), cand[i].end(), next)) {
        used[next] = 1;
        dfs(i + 1, static_cast<long long>(next), matches + 1, chunks);
        used[next] = 0;
      }
    }
    for (std::size_t j : cand[i]) {
      if (used[j] || (prev >= 0 && j == static_cast<std::size_t>(prev + 1))) continue;
      used[j] = 1;
      dfs(i + 1, static_cast<long long>(j), matches + 1, chunks + 1);
      used[j] = 0;
    }
    dfs(i + 1, -1, matches, chunks);
  }
};

}  // namespace

Alignment meteor_align(std::span<const TokenId> hyp, std::span<const TokenId> hyp_stems, std::span<const TokenId> ref,
                       std::span<const TokenId> ref_stems) {
  std::vector<std::vector<std::size_t>> cand(hyp.size());
  for (std::size_t i = 0; i < hyp.size(); ++i)
    for (std::size_t j = 0; j < ref.size(); ++j)
      if (hyp[i] == ref[j] || hyp_stems[i] == ref_stems[j]) cand[i].push_back(j);
  const std::size_t m = max_matching(cand, ref.size());
  if (m == 0) return {};
  AlignSearch search{cand, std::vector<std::size_t>(hyp.size() + 1, 0), m, std::vector<char>(ref.size(), 0)};
  for (std::size_t i = hyp.size(); i-- > 0;) search.has_cand_suffix[i] = search.has_cand_suffix[i + 1] + (cand[i].empty() ? 0 : 1);
  search.dfs(0, -1, 0, 0);
  return {m, std::min(search.best, m)};  // budget exhausted: m chunks is always achievable
}

double meteor_score(const Alignment& a, std::size_t hyp_len, std::size_t ref_len) {
  if (a.matches == 0 || hyp_len == 0 || ref_len == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(hyp_len);
  const double r = m / static_cast<double>(ref_len);
  const double fmean = 10 * p * r / (r + 9 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  return fmean * (1 - 0.5 * frag * frag * frag);
}

double meteor_lite(const TokenSequence& hyp, std::span<const TokenSequence> refs) {
  if (refs.empty()) throw InputError("meteor_lite needs at least one reference");
  Interner interner;
  auto stems = [&](const TokenSequence& s) {
    TokenIds out;
    for (const auto& t : s.tokens) out.push_back(interner.intern(suffix_stem(t)));
    return out;
  };
  const auto h = interner.intern(hyp);
  const auto hs = stems(hyp);
  double best = 0;
  for (const auto& r : refs) {
    const auto rid = interner.intern(r);
    const auto rs = stems(r);
    best = std::max(best, meteor_score(meteor_align(h, hs, rid, rs), h.size(), rid.size()));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Dispatch

double sentence_score(const MetricParams& params, const TokenSequence& hyp, std::span<const TokenSequence> refs) {
  switch (params.metric) {
    case Metric::rouge_l: return rouge_l(hyp, refs, params.rouge_beta);
    case Metric::meteor_lite: return meteor_lite(hyp, refs);
    case Metric::cider: throw Error("CIDEr is corpus dependent; use cider() or a score matrix");
    default: return sentence_bleu(hyp, refs, bleu_order(params.metric), params.bleu_smoothing);
  }
}

double corpus_score(const MetricParams& params, std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw InputError("corpus score needs at least one pair");
  if (is_bleu(params.metric)) return corpus_bleu(pairs, bleu_order(params.metric));
  if (params.metric == Metric::cider) {
    const auto scores = cider(pairs, params.cider_max_n);
    double sum = 0;
    for (double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
  }
  double sum = 0;
  for (const auto& p : pairs) sum += sentence_score(params, p.hyp, p.refs);
  return sum / static_cast<double>(pairs.size());
}

}  // namespace divkit
