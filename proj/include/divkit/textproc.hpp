#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divkit/corpus.hpp"

namespace divkit {

/// Universal POS tag set.
enum class Upos : std::uint8_t {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X
};

const char* to_string(Upos tag);
Upos parse_upos(std::string_view tag);

inline bool is_noun(Upos t) { return t == Upos::NOUN || t == Upos::PROPN; }
inline bool is_verb(Upos t) { return t == Upos::VERB; }

struct TokenSequence {
  std::vector<std::string> tokens;
  std::optional<std::vector<Upos>> pos;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

/// Tokenized references aligned with a dataset: samples[i][k] is reference k of
/// sample i.
struct TokenCorpus {
  std::vector<std::vector<TokenSequence>> samples;

  std::size_t token_count() const;
  std::size_t caption_count() const;
};

enum class MaskKind { none, semantic, vocab_tail };

struct MaskingPolicy {
  MaskKind kind = MaskKind::none;
  double head_fraction = 0.9;
};

/// Monotonic id source for mask and UNK tokens. Parallel callers hand each
/// worker a disjoint starting point.
class MaskCounter {
 public:
  explicit MaskCounter(std::uint64_t first = 1) : next_(first) {}
  std::uint64_t next() { return next_++; }
  std::uint64_t peek() const { return next_; }

 private:
  std::uint64_t next_;
};

/// Rule-based emulation of the PTB tokenizer; the rule list is in
/// docs/tokenizer.md.
TokenSequence tokenize(std::string_view text);

/// Root-locale lowercase, the same folding the tokenizer applies.
std::string lowercase(std::string_view text);

TokenCorpus tokenize_dataset(const CaptionDataset& dataset);

/// Replaces every NOUN/PROPN/VERB token with a fresh `⟨MASK_k⟩`. Throws
/// InputError if the sequence has no tags.
TokenSequence semantic_mask(const TokenSequence& seq, MaskCounter& counter);

/// Masks a whole corpus with one counter, in corpus order.
TokenCorpus semantic_mask(const TokenCorpus& corpus, MaskCounter& counter);

/// Token types ranked by descending frequency, ties lexicographic. Returns the
/// minimal prefix whose cumulative count reaches `head_fraction` of all
/// occurrences.
std::vector<std::string> head_types(const std::vector<std::pair<std::string, std::size_t>>& counts,
                                    double head_fraction);

/// Replaces every occurrence of a non-head type with a unique `⟨UNK_k⟩`.
TokenCorpus vocab_tail_mask(const TokenCorpus& corpus, double head_fraction);
TokenCorpus vocab_tail_mask(const CaptionDataset& dataset, double head_fraction);

inline constexpr std::size_t kBuiltinEmbeddingDim = 256;

struct BuiltinEmbedding {
  std::array<float, kBuiltinEmbeddingDim> values{};
  bool degenerate = false;  // no features; vector is all zero
};

/// Hashed character 3-5-gram counts over the space-joined tokens, L2-normalized.
BuiltinEmbedding builtin_embed(const TokenSequence& seq);

/// Lexicon tagger with suffix heuristics; unknown words default to NOUN.
TokenSequence builtin_pos(const TokenSequence& seq);
void builtin_pos(TokenCorpus& corpus);

/// Reads a JSON-lines POS sidecar and attaches tags to `corpus`, which must be
/// the tokenization of `dataset`. Tag counts must equal token counts.
void attach_pos_sidecar(const CaptionDataset& dataset, TokenCorpus& corpus, const std::string& path);

/// Looks a word up in the bundled lexicon.
std::optional<Upos> lexicon_lookup(std::string_view word);

}  // namespace divkit
