#include "divkit/textproc.hpp"

#include <unicode/uchar.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "divkit/util.hpp"

namespace divkit {

namespace {

constexpr const char* kTagNames[] = {"ADJ",  "ADP",  "ADV",  "AUX",   "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
                                     "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

}  // namespace

const char* to_string(Upos tag) { return kTagNames[static_cast<int>(tag)]; }

Upos parse_upos(std::string_view tag) {
  for (int i = 0; i < static_cast<int>(std::size(kTagNames)); ++i)
    if (tag == kTagNames[i]) return static_cast<Upos>(i);
  throw InputError("unknown UPOS tag '" + std::string(tag) + "'");
}

std::size_t TokenCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : samples)
    for (const auto& r : s) n += r.size();
  return n;
}

std::size_t TokenCorpus::caption_count() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.size();
  return n;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

using Word = std::u32string;

std::u32string decode_lower(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  bool ascii = std::all_of(text.begin(), text.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (ascii) {
    for (char c : text) out.push_back(static_cast<char32_t>(std::tolower(static_cast<unsigned char>(c))));
    return out;
  }
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.toLower(icu::Locale::getRoot());
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) out.push_back(static_cast<char32_t>(u.char32At(i)));
  return out;
}

std::string encode(const Word& w) {
  std::string out;
  out.reserve(w.size());
  for (char32_t c : w) {
    char buf[4];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, 4, static_cast<UChar32>(c), error);
    if (!error) out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

char32_t fold_quote(char32_t c) {
  switch (c) {
    case U'‘':
    case U'’':
    case U'ʼ':
      return U'\'';
    case U'“':
    case U'”':
      return U'"';
    default:
      return c;
  }
}

bool is_space(char32_t c) { return c < 0x80 ? std::isspace(static_cast<int>(c)) != 0 : u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool is_digit(char32_t c) { return c < 0x80 ? (c >= U'0' && c <= U'9') : u_isdigit(static_cast<UChar32>(c)); }

// Characters that always form their own token (numeric separators excepted).
bool splits_always(const Word& w, std::size_t i) {
  const char32_t c = w[i];
  if (c == U',' || c == U':') {
    const bool digits_around = i > 0 && i + 1 < w.size() && is_digit(w[i - 1]) && is_digit(w[i + 1]);
    return !digits_around;
  }
  if (c < 0x80) return c != 0 && std::strchr(";!?()[]{}\"<>`$%#*+=|~^@\\", static_cast<int>(c)) != nullptr;
  const auto cp = static_cast<UChar32>(c);
  return u_ispunct(cp) || u_charType(cp) == U_MATH_SYMBOL || u_charType(cp) == U_CURRENCY_SYMBOL ||
         u_charType(cp) == U_OTHER_SYMBOL;
}

bool is_abbreviation(const Word& w) {
  // single letters each followed by a period: "u.s.", "d.c."
  if (w.size() < 4 || w.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < w.size(); i += 2)
    if (w[i] == U'.' || is_digit(w[i]) || w[i + 1] != U'.') return false;
  return true;
}

bool ends_with(const Word& w, std::u32string_view suffix) {
  return w.size() >= suffix.size() && std::u32string_view(w).substr(w.size() - suffix.size()) == suffix;
}

void split_apostrophes(Word w, std::vector<Word>& out) {
  static const std::u32string_view kClitics[] = {U"'s", U"'re", U"'ll", U"'ve", U"'d", U"'m"};
  // leading quote marks
  while (!w.empty() && w.front() == U'\'') {
    if (w.size() == 1) {
      out.push_back(w);
      return;
    }
    const bool clitic = std::any_of(std::begin(kClitics), std::end(kClitics), [&](auto c) { return w == c; });
    if (clitic || w == U"n't" || is_digit(w[1])) {
      out.push_back(w);
      return;
    }
    out.push_back(U"'");
    w.erase(0, 1);
  }
  if (w.empty()) return;
  Word trailing;
  if (w.size() > 3 && ends_with(w, U"n't")) {
    trailing = U"n't";
    w.resize(w.size() - 3);
  } else if (w.size() > 1 && w.back() == U'\'') {
    trailing = U"'";
    w.pop_back();
  } else {
    for (auto c : kClitics) {
      if (w.size() > c.size() && ends_with(w, c)) {
        trailing = Word(c);
        w.resize(w.size() - c.size());
        break;
      }
    }
  }
  if (w == U"cannot") {
    out.push_back(U"can");
    out.push_back(U"not");
  } else {
    out.push_back(w);
  }
  if (!trailing.empty()) out.push_back(trailing);
}

void split_hyphen_edges(Word w, std::vector<Word>& out) {
  std::size_t lead = 0;
  while (lead < w.size() && w[lead] == U'-') ++lead;
  if (lead == w.size()) {
    out.push_back(w);
    return;
  }
  std::size_t trail = 0;
  while (trail < w.size() - lead && w[w.size() - 1 - trail] == U'-') ++trail;
  if (lead > 0) out.push_back(w.substr(0, lead));
  split_apostrophes(w.substr(lead, w.size() - lead - trail), out);
  if (trail > 0) out.push_back(w.substr(w.size() - trail));
}

void split_periods(const Word& w, std::vector<Word>& out) {
  if (is_abbreviation(w)) {
    out.push_back(w);
    return;
  }
  Word current;
  auto flush = [&] {
    if (!current.empty()) split_hyphen_edges(std::move(current), out);
    current.clear();
  };
  for (std::size_t i = 0; i < w.size();) {
    if (w[i] != U'.') {
      current.push_back(w[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < w.size() && w[j] == U'.') ++j;
    const bool decimal = j - i == 1 && i > 0 && j < w.size() && is_digit(w[i - 1]) && is_digit(w[j]);
    if (decimal) {
      current.push_back(U'.');
    } else {
      flush();
      out.push_back(w.substr(i, j - i));
    }
    i = j;
  }
  flush();
}

void split_chunk(const Word& chunk, std::vector<Word>& out) {
  Word piece;
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    if (splits_always(chunk, i)) {
      if (!piece.empty()) split_periods(piece, out);
      piece.clear();
      out.emplace_back(1, chunk[i]);
    } else {
      piece.push_back(chunk[i]);
    }
  }
  if (!piece.empty()) split_periods(piece, out);
}

}  // namespace

std::string lowercase(std::string_view text) { return encode(decode_lower(text)); }

TokenSequence tokenize(std::string_view text) {
  Word all = decode_lower(text);
  for (auto& c : all) c = fold_quote(c);
  std::vector<Word> words;
  Word chunk;
  for (char32_t c : all) {
    if (is_space(c)) {
      if (!chunk.empty()) split_chunk(chunk, words);
      chunk.clear();
    } else {
      chunk.push_back(c);
    }
  }
  if (!chunk.empty()) split_chunk(chunk, words);
  TokenSequence seq;
  seq.tokens.reserve(words.size());
  for (const auto& w : words)
    if (!w.empty()) seq.tokens.push_back(encode(w));
  return seq;
}

TokenCorpus tokenize_dataset(const CaptionDataset& dataset) {
  TokenCorpus corpus;
  corpus.samples.resize(dataset.samples.size());
  const auto n = static_cast<long long>(dataset.samples.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (long long i = 0; i < n; ++i) {
    const auto& refs = dataset.samples[static_cast<std::size_t>(i)].references;
    auto& dst = corpus.samples[static_cast<std::size_t>(i)];
    dst.reserve(refs.size());
    for (const auto& r : refs) dst.push_back(tokenize(r));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Masking

TokenSequence semantic_mask(const TokenSequence& seq, MaskCounter& counter) {
  if (!seq.pos) throw InputError("semantic masking requires POS tags");
  if (seq.pos->size() != seq.tokens.size()) throw InputError("POS tag count does not match token count");
  TokenSequence out = seq;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    const Upos t = (*seq.pos)[i];
    if (is_noun(t) || is_verb(t)) out.tokens[i] = "⟨MASK_" + std::to_string(counter.next()) + "⟩";
  }
  return out;
}

TokenCorpus semantic_mask(const TokenCorpus& corpus, MaskCounter& counter) {
  TokenCorpus out;
  out.samples.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) {
    auto& dst = out.samples.emplace_back();
    dst.reserve(s.size());
    for (const auto& r : s) dst.push_back(semantic_mask(r, counter));
  }
  return out;
}

std::vector<std::string> head_types(const std::vector<std::pair<std::string, std::size_t>>& counts,
                                    double head_fraction) {
  if (!(head_fraction > 0.0 && head_fraction <= 1.0)) throw InputError("head_fraction must be in (0, 1]");
  auto ranked = counts;
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::size_t total = 0;
  for (const auto& [_, c] : ranked) total += c;
  std::vector<std::string> head;
  const double target = head_fraction * static_cast<double>(total);
  std::size_t cumulative = 0;
  for (const auto& [type, c] : ranked) {
    if (static_cast<double>(cumulative) >= target - 1e-9 * static_cast<double>(total)) break;
    head.push_back(type);
    cumulative += c;
  }
  return head;
}

TokenCorpus vocab_tail_mask(const TokenCorpus& corpus, double head_fraction) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& s : corpus.samples)
    for (const auto& r : s)
      for (const auto& t : r.tokens) ++counts[t];
  if (counts.empty()) throw InputError("vocab tail masking needs a non-empty corpus");
  const auto head = head_types({counts.begin(), counts.end()}, head_fraction);
  const std::unordered_map<std::string_view, bool> in_head = [&] {
    std::unordered_map<std::string_view, bool> m;
    for (const auto& h : head) m.emplace(h, true);
    return m;
  }();
  MaskCounter counter;
  TokenCorpus out = corpus;
  for (auto& s : out.samples)
    for (auto& r : s)
      for (auto& t : r.tokens)
        if (!in_head.contains(t)) t = "⟨UNK_" + std::to_string(counter.next()) + "⟩";
  return out;
}

TokenCorpus vocab_tail_mask(const CaptionDataset& dataset, double head_fraction) {
  return vocab_tail_mask(tokenize_dataset(dataset), head_fraction);
}

// ---------------------------------------------------------------------------
// Built-in embedder

BuiltinEmbedding builtin_embed(const TokenSequence& seq) {
  BuiltinEmbedding e;
  Word text = U" ";
  for (const auto& t : seq.tokens) {
    text += decode_lower(t);
    text += U' ';
  }
  std::array<double, kBuiltinEmbeddingDim> acc{};
  for (std::size_t n = 3; n <= 5; ++n) {
    for (std::size_t i = 0; i + n <= text.size(); ++i) {
      const std::string gram = encode(text.substr(i, n));
      std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
      for (unsigned char c : gram) {
        h ^= c;
        h *= 1099511628211ULL;
      }
      acc[h % kBuiltinEmbeddingDim] += 1.0;
    }
  }
  double norm = 0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0) {
    e.degenerate = true;
    return e;
  }
  for (std::size_t d = 0; d < kBuiltinEmbeddingDim; ++d) e.values[d] = static_cast<float>(acc[d] / norm);
  return e;
}

// ---------------------------------------------------------------------------
// Built-in tagger

namespace {

bool all_punct(const std::string& token) {
  const Word w = decode_lower(token);
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char32_t c) {
    const auto cp = static_cast<UChar32>(c);
    return u_ispunct(cp) || u_charType(cp) == U_MATH_SYMBOL || u_charType(cp) == U_CURRENCY_SYMBOL ||
           u_charType(cp) == U_OTHER_SYMBOL || u_charType(cp) == U_MODIFIER_SYMBOL;
  });
}

bool numeric(const std::string& token) {
  bool digit = false;
  for (char c : token) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',' && c != ':') {
      return false;
    }
  }
  return digit;
}

Upos tag_word(const std::string& w) {
  if (auto t = lexicon_lookup(w)) return *t;
  if (numeric(w)) return Upos::NUM;
  if (all_punct(w)) return Upos::PUNCT;
  auto ends = [&](std::string_view s) { return w.size() > s.size() + 1 && w.compare(w.size() - s.size(), s.size(), s) == 0; };
  if (ends("ing") || ends("ed")) return Upos::VERB;
  return Upos::NOUN;
}

}  // namespace

TokenSequence builtin_pos(const TokenSequence& seq) {
  TokenSequence out = seq;
  std::vector<Upos> tags;
  tags.reserve(seq.tokens.size());
  for (const auto& t : seq.tokens) tags.push_back(tag_word(t));
  out.pos = std::move(tags);
  return out;
}

void builtin_pos(TokenCorpus& corpus) {
  for (auto& s : corpus.samples)
    for (auto& r : s) r = builtin_pos(r);
}

void attach_pos_sidecar(const CaptionDataset& dataset, TokenCorpus& corpus, const std::string& path) {
  const std::string text = read_file(path);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) index.emplace(dataset.samples[i].id, i);
  std::vector<std::vector<bool>> seen(corpus.samples.size());
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) seen[i].assign(corpus.samples[i].size(), false);

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("POS sidecar line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto sid = rec.at("sample_id").get<std::string>();
    const auto k = rec.at("ref_index").get<long long>();
    auto it = index.find(sid);
    if (it == index.end()) throw InputError("POS sidecar line " + std::to_string(line_no) + ": unknown sample '" + sid + "'");
    auto& refs = corpus.samples[it->second];
    if (k < 0 || static_cast<std::size_t>(k) >= refs.size())
      throw InputError("POS sidecar: (" + sid + ", " + std::to_string(k) + ") has no matching reference");
    std::vector<Upos> tags;
    for (const auto& t : rec.at("tags")) tags.push_back(parse_upos(t.get<std::string>()));
    auto& seq = refs[static_cast<std::size_t>(k)];
    if (tags.size() != seq.tokens.size())
      throw InputError("POS sidecar: (" + sid + ", " + std::to_string(k) + ") has " + std::to_string(tags.size()) +
                       " tags for " + std::to_string(seq.tokens.size()) + " tokens");
    seq.pos = std::move(tags);
    seen[it->second][static_cast<std::size_t>(k)] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    for (std::size_t k = 0; k < seen[i].size(); ++k)
      if (!seen[i][k])
        throw InputError("POS sidecar: missing tags for (" + dataset.samples[i].id + ", " + std::to_string(k) + ")");
}

}  // namespace divkit
