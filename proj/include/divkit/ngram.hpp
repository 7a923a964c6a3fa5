#pragma once

// Interned token ids and sorted n-gram count profiles shared by the metric
// kernels. A profile is computed once per caption and reused across every
// pairing it takes part in.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "divkit/textproc.hpp"

namespace divkit {

using TokenId = std::uint32_t;
using TokenIds = std::vector<TokenId>;

inline constexpr int kMaxOrder = 4;

/// String <-> dense id map. Not thread-safe for interning; lookups on a frozen
/// interner are.
class Interner {
 public:
  TokenId intern(std::string_view token);
  TokenIds intern(const TokenSequence& seq);
  std::optional<TokenId> find(std::string_view token) const;
  std::size_t size() const { return strings_.size(); }
  const std::string& str(TokenId id) const { return strings_[id]; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> ids_;
  std::vector<std::string> strings_;
};

/// Exact key for an n-gram of up to four 32-bit ids.
struct GramKey {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  auto operator<=>(const GramKey&) const = default;
};

struct GramKeyHash {
  std::size_t operator()(const GramKey& k) const {
    return static_cast<std::size_t>(k.hi * 0x9e3779b97f4a7c15ULL ^ (k.lo + 0x632be59bd9b4e019ULL + (k.hi << 6)));
  }
};

GramKey make_key(std::span<const TokenId> window);

/// Sorted (key, count) pairs for one n-gram order.
using GramCounts = std::vector<std::pair<GramKey, std::uint32_t>>;

struct HypProfile {
  std::uint32_t length = 0;
  std::array<GramCounts, kMaxOrder> grams;
};

/// Clipping profile of a reference set: per-n-gram maximum count over the
/// references, plus every reference length.
struct RefProfile {
  std::vector<std::uint32_t> lengths;
  std::array<GramCounts, kMaxOrder> max_counts;
};

HypProfile profile_caption(std::span<const TokenId> ids, int max_order = kMaxOrder);
RefProfile profile_references(std::span<const HypProfile* const> refs);
RefProfile profile_references(std::span<const HypProfile> refs);

/// Clipped match and total counts per order, plus lengths for the brevity
/// penalty. Adds across pairs for corpus-level BLEU.
struct BleuStats {
  std::array<double, kMaxOrder> matches{};
  std::array<double, kMaxOrder> totals{};
  double hyp_len = 0;
  double ref_len = 0;

  BleuStats& operator+=(const BleuStats& o);
};

BleuStats bleu_stats(const HypProfile& hyp, const RefProfile& refs);

/// Closest reference length; ties go to the shorter reference.
std::uint32_t closest_ref_length(std::span<const std::uint32_t> lengths, std::uint32_t hyp_len);

}  // namespace divkit
