#include "divkit/diversity.hpp"

#include <omp.h>

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace divkit {

namespace {

struct ClassStats {
  std::size_t unique = 0;
  std::size_t head = 0;
  std::size_t occurrences = 0;
  double ws = 0;
  double bs = 0;
};

// Uniqueness statistics over the token occurrences selected by `keep`.
ClassStats class_stats(const TokenCorpus& corpus, const std::function<bool(const TokenSequence&, std::size_t)>& keep) {
  std::unordered_map<std::string_view, std::size_t> global;
  std::unordered_map<std::string_view, std::size_t> sample_df;
  std::vector<std::unordered_map<std::string_view, std::size_t>> per_sample(corpus.samples.size());
  for (std::size_t s = 0; s < corpus.samples.size(); ++s) {
    for (const auto& seq : corpus.samples[s])
      for (std::size_t i = 0; i < seq.tokens.size(); ++i)
        if (keep(seq, i)) ++per_sample[s][seq.tokens[i]];
    for (const auto& [t, c] : per_sample[s]) {
      global[t] += c;
      ++sample_df[t];
    }
  }
  ClassStats st;
  st.unique = global.size();
  std::vector<std::pair<std::string, std::size_t>> counts;
  counts.reserve(global.size());
  for (const auto& [t, c] : global) {
    counts.emplace_back(std::string(t), c);
    st.occurrences += c;
  }
  if (!counts.empty()) st.head = head_types(counts, kHeadFraction).size();

  double ws_sum = 0, bs_sum = 0;
  std::size_t contributing = 0;
  for (const auto& m : per_sample) {
    std::size_t total = 0, once = 0, exclusive = 0;
    for (const auto& [t, c] : m) {
      total += c;
      if (c == 1) ++once;
      if (sample_df[t] == 1) exclusive += c;
    }
    if (total == 0) continue;
    ++contributing;
    ws_sum += 100.0 * static_cast<double>(once) / static_cast<double>(total);
    bs_sum += 100.0 * static_cast<double>(exclusive) / static_cast<double>(total);
  }
  if (contributing > 0) {
    st.ws = ws_sum / static_cast<double>(contributing);
    st.bs = bs_sum / static_cast<double>(contributing);
  }
  return st;
}

}  // namespace

VocabStats vocab_stats(const TokenCorpus& corpus) {
  const auto st = class_stats(corpus, [](const TokenSequence&, std::size_t) { return true; });
  return {st.unique, st.ws, st.bs, st.head, st.occurrences};
}

PosStats pos_stats(const TokenCorpus& tagged) {
  for (const auto& s : tagged.samples)
    for (const auto& r : s)
      if (!r.pos || r.pos->size() != r.tokens.size()) throw InputError("pos_stats requires POS tags on every caption");
  const auto nouns = class_stats(tagged, [](const TokenSequence& s, std::size_t i) { return is_noun((*s.pos)[i]); });
  const auto verbs = class_stats(tagged, [](const TokenSequence& s, std::size_t i) { return is_verb((*s.pos)[i]); });
  PosStats p;
  p.wsnu = nouns.ws;
  p.bsnu = nouns.bs;
  p.wsvu = verbs.ws;
  p.bsvu = verbs.bs;
  p.nc = nouns.unique;
  p.vc = verbs.unique;
  p.nh = nouns.head;
  p.vh = verbs.head;
  const double captions = static_cast<double>(tagged.caption_count());
  if (captions > 0) {
    p.npc = static_cast<double>(nouns.occurrences) / captions;
    p.vpc = static_cast<double>(verbs.occurrences) / captions;
    p.tpc = static_cast<double>(tagged.token_count()) / captions;
  }
  return p;
}

// ---------------------------------------------------------------------------
// N-gram model

std::size_t NGramModel::ContextHash::operator()(const TokenIds& ids) const {
  std::uint64_t h = 1469598103934665603ULL;
  for (TokenId id : ids) {
    h ^= id;
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

NGramModel::NGramModel(int order, Interner interner, Table table)
    : order_(order), interner_(std::move(interner)), table_(std::move(table)) {}

std::map<std::string, std::size_t> NGramModel::successors(const std::vector<std::string>& context) const {
  std::map<std::string, std::size_t> out;
  TokenIds key;
  for (const auto& t : context) {
    const auto id = interner_.find(t);
    if (!id) return out;
    key.push_back(*id);
  }
  if (auto it = table_.find(key); it != table_.end())
    for (const auto& [id, c] : it->second) out.emplace(interner_.str(id), c);
  return out;
}

std::map<std::vector<std::string>, std::map<std::string, std::size_t>> NGramModel::decoded() const {
  std::map<std::vector<std::string>, std::map<std::string, std::size_t>> out;
  for (const auto& [ctx, succ] : table_) {
    std::vector<std::string> key;
    for (TokenId id : ctx) key.push_back(interner_.str(id));
    auto& dst = out[key];
    for (const auto& [id, c] : succ) dst.emplace(interner_.str(id), c);
  }
  return out;
}

namespace {

void count_caption(const TokenIds& padded, std::size_t order, NGramModel::Table& table) {
  if (padded.size() < order) return;
  TokenIds ctx(order - 1);
  for (std::size_t j = order - 1; j < padded.size(); ++j) {
    std::copy(padded.begin() + static_cast<std::ptrdiff_t>(j - (order - 1)), padded.begin() + static_cast<std::ptrdiff_t>(j),
              ctx.begin());
    ++table[ctx][padded[j]];
  }
}

}  // namespace

NGramModel build_ngram_model(const TokenCorpus& corpus, int order, Execution exec) {
  if (order < 2) throw InputError("n-gram model order must be at least 2");
  Interner interner;
  const TokenId bos = interner.intern(kBos);
  const TokenId eos = interner.intern(kEos);
  std::vector<TokenIds> captions;
  captions.reserve(corpus.caption_count());
  for (const auto& s : corpus.samples) {
    for (const auto& r : s) {
      auto& ids = captions.emplace_back();
      ids.reserve(r.tokens.size() + 2);
      ids.push_back(bos);
      for (const auto& t : r.tokens) ids.push_back(interner.intern(t));
      ids.push_back(eos);
    }
  }
  const auto n = static_cast<std::size_t>(order);
  NGramModel::Table table;
  if (exec == Execution::serial) {
    for (const auto& c : captions) count_caption(c, n, table);
    return NGramModel(order, std::move(interner), std::move(table));
  }
  std::vector<NGramModel::Table> partial(static_cast<std::size_t>(jobs()));
  const auto total = static_cast<long long>(captions.size());
#pragma omp parallel num_threads(static_cast<int>(partial.size()))
  {
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (long long i = 0; i < total; ++i) count_caption(captions[static_cast<std::size_t>(i)], n, local);
  }
  // counts commute, so merging in worker order is deterministic
  table = std::move(partial.front());
  for (std::size_t w = 1; w < partial.size(); ++w)
    for (auto& [ctx, succ] : partial[w]) {
      auto& dst = table[ctx];
      for (const auto& [id, c] : succ) dst[id] += c;
    }
  return NGramModel(order, std::move(interner), std::move(table));
}

double evs(const NGramModel& model) {
  if (model.context_count() == 0) return 0.0;
  std::size_t dynamic = 0;
  for (const auto& [_, succ] : model.table())
    if (succ.size() >= 2) ++dynamic;
  return static_cast<double>(dynamic) / static_cast<double>(model.context_count());
}

double evs_occurrence_weighted(const NGramModel& model) {
  std::size_t total = 0, dynamic = 0;
  for (const auto& [_, succ] : model.table()) {
    std::size_t c = 0;
    for (const auto& [id, k] : succ) c += k;
    total += c;
    if (succ.size() >= 2) dynamic += c;
  }
  return total == 0 ? 0.0 : static_cast<double>(dynamic) / static_cast<double>(total);
}

int ed_schedule_order(int position) { return position <= 1 ? 2 : position == 2 ? 3 : 4; }

double ed_at_n(const std::map<int, double>& evs_by_order, int n) {
  if (n < 1) throw InputError("ED@N needs N >= 1");
  double ed = 1.0;
  for (int i = 1; i <= n - 1; ++i) ed += evs_by_order.at(ed_schedule_order(i));
  return ed;
}

double ed_at_n(const TokenCorpus& corpus, int n) {
  if (n < 1) throw InputError("ED@N needs N >= 1");
  std::map<int, double> by_order;
  for (int i = 1; i <= std::min(n - 1, 3); ++i) {
    const int k = ed_schedule_order(i);
    by_order[k] = evs(build_ngram_model(corpus, k));
  }
  return ed_at_n(by_order, n);
}

}  // namespace divkit
