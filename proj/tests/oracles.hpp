#pragma once

// Brute-force reference implementations. These work on plain string vectors,
// enumerate everything directly and share no code with the library, so a test
// comparing the two is comparing independent derivations of the same formula.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline std::map<Tokens, int> ngrams(const Tokens& t, int n) {
  std::map<Tokens, int> out;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= t.size(); ++i)
    ++out[Tokens(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i) + n)];
  return out;
}

struct BleuCounts {
  double match[4] = {0, 0, 0, 0};
  double total[4] = {0, 0, 0, 0};
  double hyp_len = 0;
  double ref_len = 0;
};

inline BleuCounts bleu_counts(const Tokens& hyp, const std::vector<Tokens>& refs) {
  BleuCounts c;
  for (int n = 1; n <= 4; ++n) {
    for (const auto& [g, count] : ngrams(hyp, n)) {
      int best = 0;
      for (const auto& r : refs) {
        const auto rg = ngrams(r, n);
        const auto it = rg.find(g);
        if (it != rg.end()) best = std::max(best, it->second);
      }
      c.match[n - 1] += std::min(count, best);
      c.total[n - 1] += count;
    }
  }
  c.hyp_len = static_cast<double>(hyp.size());
  // closest reference length, shorter one on ties
  std::size_t best_len = refs.front().size();
  for (const auto& r : refs) {
    const long d = std::labs(static_cast<long>(r.size()) - static_cast<long>(hyp.size()));
    const long bd = std::labs(static_cast<long>(best_len) - static_cast<long>(hyp.size()));
    if (d < bd || (d == bd && r.size() < best_len)) best_len = r.size();
  }
  c.ref_len = static_cast<double>(best_len);
  return c;
}

inline double bleu_from_counts(const BleuCounts& c, int n, bool add_one) {
  if (c.hyp_len == 0) return 0.0;
  double prod_log = 0;
  for (int k = 0; k < n; ++k) {
    double num = c.match[k], den = c.total[k];
    if (add_one && k >= 1) {
      num += 1;
      den += 1;
    }
    if (num == 0 || den == 0) return 0.0;
    prod_log += std::log(num / den);
  }
  const double bp = c.hyp_len >= c.ref_len ? 1.0 : std::exp(1 - c.ref_len / c.hyp_len);
  return bp * std::exp(prod_log / n);
}

inline double sentence_bleu(const Tokens& hyp, const std::vector<Tokens>& refs, int n, bool add_one) {
  return bleu_from_counts(bleu_counts(hyp, refs), n, add_one);
}

inline double corpus_bleu(const std::vector<std::pair<Tokens, std::vector<Tokens>>>& pairs, int n) {
  BleuCounts sum;
  for (const auto& [h, rs] : pairs) {
    const auto c = bleu_counts(h, rs);
    for (int k = 0; k < 4; ++k) {
      sum.match[k] += c.match[k];
      sum.total[k] += c.total[k];
    }
    sum.hyp_len += c.hyp_len;
    sum.ref_len += c.ref_len;
  }
  return bleu_from_counts(sum, n, false);
}

// LCS by trying every subsequence of `a` (short inputs only).
inline std::size_t lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  const std::size_t subsets = std::size_t{1} << a.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask >> i & 1) sub.push_back(a[i]);
    if (sub.size() <= best) continue;
    std::size_t j = 0;
    for (const auto& t : b)
      if (j < sub.size() && t == sub[j]) ++j;
    if (j == sub.size()) best = sub.size();
  }
  return best;
}

inline double rouge_l(const Tokens& hyp, const std::vector<Tokens>& refs, double beta) {
  double best = 0;
  for (const auto& r : refs) {
    const double l = static_cast<double>(lcs(hyp, r));
    if (l == 0) continue;
    const double p = l / static_cast<double>(hyp.size());
    const double rc = l / static_cast<double>(r.size());
    best = std::max(best, (1 + beta * beta) * p * rc / (rc + beta * beta * p));
  }
  return best;
}

inline std::vector<double> cider(const std::vector<std::pair<Tokens, std::vector<Tokens>>>& pairs, int max_n) {
  const double n_sets = static_cast<double>(pairs.size());
  std::vector<double> out;
  std::vector<std::map<Tokens, int>> df(static_cast<std::size_t>(max_n));
  for (int n = 1; n <= max_n; ++n)
    for (const auto& [h, rs] : pairs) {
      std::set<Tokens> seen;
      for (const auto& r : rs)
        for (const auto& [g, c] : ngrams(r, n)) seen.insert(g);
      for (const auto& g : seen) ++df[static_cast<std::size_t>(n - 1)][g];
    }
  auto vec = [&](const Tokens& t, int n) {
    std::map<Tokens, double> v;
    for (const auto& [g, c] : ngrams(t, n)) {
      const auto it = df[static_cast<std::size_t>(n - 1)].find(g);
      const double d = it == df[static_cast<std::size_t>(n - 1)].end() ? 0.0 : it->second;
      v[g] = c * (std::log(n_sets) - std::log(std::max(1.0, d)));
    }
    return v;
  };
  auto norm = [](const std::map<Tokens, double>& v) {
    double s = 0;
    for (const auto& [g, w] : v) s += w * w;
    return std::sqrt(s);
  };
  for (const auto& [h, rs] : pairs) {
    double total = 0;
    for (int n = 1; n <= max_n; ++n) {
      const auto hv = vec(h, n);
      for (const auto& r : rs) {
        const auto rv = vec(r, n);
        const double nh = norm(hv), nr = norm(rv);
        if (nh == 0 || nr == 0) continue;
        double dot = 0;
        for (const auto& [g, w] : hv)
          if (auto it = rv.find(g); it != rv.end()) dot += w * it->second;
        total += dot / (nh * nr);
      }
    }
    out.push_back(10.0 * total / (max_n * static_cast<double>(rs.size())));
  }
  return out;
}

inline std::string stem(const std::string& w) {
  auto ends = [&](const std::string& s) { return w.size() >= s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0; };
  if (w.size() > 5 && ends("ing")) return w.substr(0, w.size() - 3);
  if (w.size() > 4 && (ends("ed") || ends("es"))) return w.substr(0, w.size() - 2);
  if (w.size() > 3 && ends("s") && !ends("ss")) return w.substr(0, w.size() - 1);
  return w;
}

struct Align {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

// Every partial injective alignment, keeping most matches then fewest chunks.
inline Align meteor_align(const Tokens& hyp, const Tokens& ref) {
  Align best;
  bool have = false;
  std::vector<long> to(hyp.size(), -1);
  std::vector<char> used(ref.size(), 0);
  auto chunks_of = [&] {
    std::size_t chunks = 0;
    long prev_h = -2, prev_r = -2;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      if (to[i] < 0) continue;
      if (!(static_cast<long>(i) == prev_h + 1 && to[i] == prev_r + 1)) ++chunks;
      prev_h = static_cast<long>(i);
      prev_r = to[i];
    }
    return chunks;
  };
  auto rec = [&](auto&& self, std::size_t i, std::size_t m) -> void {
    if (i == hyp.size()) {
      const std::size_t c = chunks_of();
      if (!have || m > best.matches || (m == best.matches && c < best.chunks)) best = {m, c};
      have = true;
      return;
    }
    self(self, i + 1, m);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (used[j] || !(hyp[i] == ref[j] || stem(hyp[i]) == stem(ref[j]))) continue;
      used[j] = 1;
      to[i] = static_cast<long>(j);
      self(self, i + 1, m + 1);
      to[i] = -1;
      used[j] = 0;
    }
  };
  rec(rec, 0, 0);
  return best;
}

inline double meteor(const Tokens& hyp, const std::vector<Tokens>& refs) {
  double best = 0;
  for (const auto& r : refs) {
    const Align a = meteor_align(hyp, r);
    if (a.matches == 0 || hyp.empty() || r.empty()) continue;
    const double m = static_cast<double>(a.matches);
    const double p = m / static_cast<double>(hyp.size());
    const double rc = m / static_cast<double>(r.size());
    const double f = 10 * p * rc / (rc + 9 * p);
    const double frag = static_cast<double>(a.chunks) / m;
    best = std::max(best, f * (1 - 0.5 * frag * frag * frag));
  }
  return best;
}

// Size of the smallest row subset covering every coverable column, by
// enumerating all subsets (rows <= 16).
inline std::size_t optimal_cover(const std::vector<std::vector<double>>& m, double threshold, std::size_t& coverable) {
  const std::size_t rows = m.size(), cols = m.empty() ? 0 : m[0].size();
  std::vector<char> can(cols, 0);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r)
      if (m[r][c] >= threshold) can[c] = 1;
  coverable = static_cast<std::size_t>(std::count(can.begin(), can.end(), 1));
  std::size_t best = rows + 1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << rows); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (size >= best) continue;
    bool ok = true;
    for (std::size_t c = 0; c < cols && ok; ++c) {
      if (!can[c]) continue;
      bool hit = false;
      for (std::size_t r = 0; r < rows && !hit; ++r) hit = (mask >> r & 1) && m[r][c] >= threshold;
      ok = hit;
    }
    if (ok) best = size;
  }
  return best;
}

// Successor sets of every (order-1)-token context, padded with one [BOS] and
// one [EOS]; returns (contexts with >= 2 successors, all contexts).
inline std::pair<std::size_t, std::size_t> evs_counts(const std::vector<Tokens>& captions, int order) {
  std::map<Tokens, std::set<std::string>> succ;
  for (const auto& c : captions) {
    Tokens padded{"[BOS]"};
    padded.insert(padded.end(), c.begin(), c.end());
    padded.push_back("[EOS]");
    const auto ctx = static_cast<std::size_t>(order - 1);
    for (std::size_t i = 0; i + ctx < padded.size(); ++i)
      succ[Tokens(padded.begin() + static_cast<long>(i), padded.begin() + static_cast<long>(i + ctx))].insert(padded[i + ctx]);
  }
  std::size_t dynamic = 0;
  for (const auto& [k, v] : succ) dynamic += v.size() >= 2;
  return {dynamic, succ.size()};
}

}  // namespace oracle
