#include "divkit/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "divkit/ngram.hpp"
#include "divkit/textproc.hpp"

namespace divkit {

LabelSet make_label_set(std::string name, const std::vector<std::string>& labels) {
  LabelSet out;
  out.name = std::move(name);
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    auto lowered = lowercase(normalize_caption(l));
    if (lowered.empty() || !seen.insert(lowered).second) continue;
    out.labels.push_back(std::move(lowered));
  }
  if (out.labels.empty()) throw InputError("label set '" + out.name + "' is empty");
  return out;
}

LabelSet load_label_set(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": malformed label set (byte " + std::to_string(e.byte) + ")");
  }
  if (!doc.is_object() || !doc.contains("labels") || !doc["labels"].is_array())
    throw InputError(path + ": label set needs a \"labels\" array");
  std::vector<std::string> labels;
  for (const auto& l : doc["labels"]) {
    if (!l.is_string()) throw InputError(path + ": labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : path;
  return make_label_set(std::move(name), labels);
}

namespace {

// Indel-only edit distance between equal-length windows reduces to
// 2 * (len - LCS), so the ratio is 100 * LCS / len.
std::size_t lcs_bytes(std::string_view a, std::string_view b, std::vector<std::size_t>& row) {
  row.assign(b.size() + 1, 0);
  for (char ca : a) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = ca == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

int partial_ratio(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return b.empty() ? 100 : 0;
  std::vector<std::size_t> row;
  std::size_t best = 0;
  for (std::size_t start = 0; start + a.size() <= b.size(); ++start) {
    best = std::max(best, lcs_bytes(a, b.substr(start, a.size()), row));
    if (best == a.size()) break;
  }
  return static_cast<int>(std::lround(100.0 * static_cast<double>(best) / static_cast<double>(a.size())));
}

bool label_matches(std::string_view lowered_caption, std::string_view label, MatchMode mode, int fuzzy_threshold) {
  if (lowered_caption.find(label) != std::string_view::npos) return true;
  return mode == MatchMode::fuzzy && partial_ratio(label, lowered_caption) >= fuzzy_threshold;
}

double overlap(const CaptionDataset& dataset, const LabelSet& labels, MatchMode mode, int fuzzy_threshold) {
  if (labels.labels.empty()) throw InputError("label set is empty");
  if (fuzzy_threshold < 0 || fuzzy_threshold > 100) throw InputError("fuzzy threshold must be in [0, 100]");
  const std::size_t n = dataset.samples.size();
  if (n == 0) return 0.0;
  std::size_t hits = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : hits)
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (const auto& ref : dataset.samples[i].references) {
      const auto lowered = lowercase(ref);
      for (const auto& label : labels.labels)
        if (label_matches(lowered, label, mode, fuzzy_threshold)) {
          any = true;
          break;
        }
      if (any) break;
    }
    hits += any;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
}

ConceptPools build_concept_pools(std::span<const Sample> train, const LabelSet& labels) {
  ConceptPools out;
  out.labels = labels.labels;
  out.pools.resize(labels.labels.size());
  std::vector<std::unordered_set<std::string>> seen(labels.labels.size());
  for (const auto& sample : train)
    for (const auto& ref : sample.references) {
      const auto lowered = lowercase(ref);
      for (std::size_t l = 0; l < labels.labels.size(); ++l)
        if (lowered.find(labels.labels[l]) != std::string::npos && seen[l].insert(ref).second)
          out.pools[l].push_back(ref);
    }
  return out;
}

ConceptEvalResult concept_coreset_eval(std::span<const Sample> test, const ConceptPools& pools,
                                       const MetricParams& params, Execution exec) {
  params.check();
  if (params.metric == Metric::cider) throw InputError("concept core-set evaluation needs a sentence-level metric");

  // Every distinct pool caption once, with its profile; pools become id lists.
  Interner interner;
  std::vector<std::string> captions;
  std::vector<std::string> caption_keys;
  std::vector<TokenSequence> caption_tokens;
  std::vector<HypProfile> caption_profiles;
  std::unordered_map<std::string, std::size_t> caption_id;
  std::vector<std::vector<std::size_t>> pool_ids(pools.pools.size());
  for (std::size_t l = 0; l < pools.pools.size(); ++l)
    for (const auto& c : pools.pools[l]) {
      auto [it, fresh] = caption_id.emplace(c, captions.size());
      if (fresh) {
        captions.push_back(c);
        caption_keys.push_back(lowercase(c));
        caption_tokens.push_back(tokenize(c));
        caption_profiles.push_back(profile_caption(interner.intern(caption_tokens.back())));
      }
      pool_ids[l].push_back(it->second);
    }

  std::vector<std::vector<TokenSequence>> ref_tokens(test.size());
  std::vector<RefProfile> ref_profiles(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::vector<HypProfile> rp;
    for (const auto& r : test[i].references) {
      ref_tokens[i].push_back(tokenize(r));
      rp.push_back(profile_caption(interner.intern(ref_tokens[i].back())));
    }
    ref_profiles[i] = profile_references(rp);
  }

  ConceptEvalResult out;
  out.per_sample.resize(test.size());
  std::vector<int> status(test.size(), 0);  // 1 no concepts, 2 no hypotheses

  auto eval = [&](std::size_t i) {
    std::vector<std::string> own;
    for (const auto& r : test[i].references) own.push_back(lowercase(r));
    std::vector<char> in_union(captions.size(), 0);
    bool any_concept = false;
    for (std::size_t l = 0; l < pools.labels.size(); ++l) {
      const bool hit = std::any_of(own.begin(), own.end(), [&](const std::string& o) {
        return o.find(pools.labels[l]) != std::string::npos;
      });
      if (!hit) continue;
      any_concept = true;
      for (std::size_t id : pool_ids[l]) in_union[id] = 1;
    }
    if (!any_concept) {
      status[i] = 1;
      return;
    }
    if (test[i].references.empty()) {
      status[i] = 2;
      return;
    }
    std::optional<double> best;
    for (std::size_t id = 0; id < captions.size(); ++id) {
      if (!in_union[id]) continue;
      if (std::find(own.begin(), own.end(), caption_keys[id]) != own.end()) continue;
      const double s = is_bleu(params.metric)
                           ? bleu_from_stats(bleu_stats(caption_profiles[id], ref_profiles[i]),
                                             bleu_order(params.metric), params.bleu_smoothing)
                           : sentence_score(params, caption_tokens[id], ref_tokens[i]);
      if (!best || s > *best) best = s;
    }
    if (!best) status[i] = 2;
    out.per_sample[i] = best;
  };

  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < test.size(); ++i) eval(i);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t i = 0; i < test.size(); ++i) eval(i);
  }

  double sum = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (status[i] == 1) ++out.skipped_no_concepts;
    else if (status[i] == 2) ++out.skipped_no_hypotheses;
    else {
      sum += *out.per_sample[i];
      ++out.evaluated;
    }
  }
  if (out.evaluated == 0) throw InputError("concept core-set evaluation skipped every sample");
  out.mean = sum / static_cast<double>(out.evaluated);
  return out;
}

}  // namespace divkit
