#include "divkit/score_matrix.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <unordered_set>

#include <json.hpp>

namespace divkit {

MetricParams default_matrix_params(Metric metric) {
  MetricParams p;
  p.metric = metric;
  p.bleu_smoothing = BleuSmoothing::add_one_counts;
  return p;
}

std::vector<std::string> dedupe_hypotheses(std::span<const std::string> hypotheses) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  out.reserve(hypotheses.size());
  for (const auto& h : hypotheses)
    if (seen.insert(h).second) out.push_back(h);
  return out;
}

struct MatrixKernel::Impl {
  MetricParams params;
  Interner interner;
  std::vector<TokenIds> hyp_ids, hyp_stems;
  std::vector<HypProfile> hyp_profiles;
  std::vector<std::vector<TokenIds>> ref_ids, ref_stems;
  std::vector<std::vector<HypProfile>> ref_profiles;
  std::vector<RefProfile> ref_clip;
  std::unique_ptr<CiderModel> cider;
  std::vector<CiderModel::Vector> hyp_vectors;

  TokenIds stems_of(const TokenSequence& seq) {
    TokenIds out;
    out.reserve(seq.tokens.size());
    for (const auto& t : seq.tokens) out.push_back(interner.intern(suffix_stem(t)));
    return out;
  }
};

MatrixKernel::MatrixKernel(std::span<const std::string> hypotheses, std::span<const Sample> samples,
                           const MetricParams& params)
    : impl_(std::make_unique<Impl>()) {
  params.check();
  auto& im = *impl_;
  im.params = params;
  const bool need_stems = params.metric == Metric::meteor_lite;
  for (const auto& h : hypotheses) {
    const auto seq = tokenize(h);
    im.hyp_ids.push_back(im.interner.intern(seq));
    im.hyp_profiles.push_back(profile_caption(im.hyp_ids.back()));
    if (need_stems) im.hyp_stems.push_back(im.stems_of(seq));
  }
  for (const auto& s : samples) {
    auto& ids = im.ref_ids.emplace_back();
    auto& stems = im.ref_stems.emplace_back();
    auto& profiles = im.ref_profiles.emplace_back();
    for (const auto& r : s.references) {
      const auto seq = tokenize(r);
      ids.push_back(im.interner.intern(seq));
      profiles.push_back(profile_caption(ids.back()));
      if (need_stems) stems.push_back(im.stems_of(seq));
    }
    im.ref_clip.push_back(profile_references(profiles));
  }
  if (params.metric == Metric::cider) {
    std::vector<std::vector<const HypProfile*>> sets(im.ref_profiles.size());
    for (std::size_t c = 0; c < sets.size(); ++c)
      for (const auto& p : im.ref_profiles[c]) sets[c].push_back(&p);
    im.cider = std::make_unique<CiderModel>(sets, params.cider_max_n);
    for (const auto& p : im.hyp_profiles) im.hyp_vectors.push_back(im.cider->vectorize(p));
  }
}

MatrixKernel::~MatrixKernel() = default;
MatrixKernel::MatrixKernel(MatrixKernel&&) noexcept = default;
MatrixKernel& MatrixKernel::operator=(MatrixKernel&&) noexcept = default;

std::size_t MatrixKernel::rows() const { return impl_->hyp_ids.size(); }
std::size_t MatrixKernel::cols() const { return impl_->ref_ids.size(); }

double MatrixKernel::cell(std::size_t r, std::size_t c) const {
  const auto& im = *impl_;
  switch (im.params.metric) {
    case Metric::rouge_l: {
      double best = 0;
      for (const auto& ref : im.ref_ids[c]) best = std::max(best, rouge_l_ids(im.hyp_ids[r], ref, im.params.rouge_beta));
      return best;
    }
    case Metric::meteor_lite: {
      double best = 0;
      for (std::size_t k = 0; k < im.ref_ids[c].size(); ++k) {
        const auto a = meteor_align(im.hyp_ids[r], im.hyp_stems[r], im.ref_ids[c][k], im.ref_stems[c][k]);
        best = std::max(best, meteor_score(a, im.hyp_ids[r].size(), im.ref_ids[c][k].size()));
      }
      return best;
    }
    case Metric::cider: return im.cider->score(im.hyp_vectors[r], c);
    default:
      return bleu_from_stats(bleu_stats(im.hyp_profiles[r], im.ref_clip[c]), bleu_order(im.params.metric),
                             im.params.bleu_smoothing);
  }
}

void MatrixKernel::fill(std::span<float> out, Execution exec) const {
  const std::size_t nr = rows(), nc = cols();
  if (out.size() != nr * nc) throw Error("score matrix output has the wrong size");
  if (exec == Execution::serial) {
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t c = 0; c < nc; ++c) out[r * nc + c] = static_cast<float>(cell(r, c));
    return;
  }
  const auto n = static_cast<long long>(nr);
#pragma omp parallel for schedule(dynamic, 8)
  for (long long r = 0; r < n; ++r) {
    const auto row = static_cast<std::size_t>(r);
    for (std::size_t c = 0; c < nc; ++c) out[row * nc + c] = static_cast<float>(cell(row, c));
  }
}

std::string matrix_identity(std::span<const std::string> hypotheses, std::span<const Sample> samples,
                            const MetricParams& params) {
  Sha256 samples_hash;
  for (const auto& s : samples) {
    samples_hash.field(s.id).field(std::to_string(s.references.size()));
    for (const auto& r : s.references) samples_hash.field(r);
  }
  Sha256 hyp_hash;
  for (const auto& h : hypotheses) hyp_hash.field(h);
  return Sha256().field(samples_hash.hex()).field(hyp_hash.hex()).field(params.canonical()).hex();
}

namespace {

std::string encode_values(const std::vector<float>& values) {
  std::string bin(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    std::memcpy(bin.data() + 4 * i, &bits, 4);
  }
  return bin;
}

std::vector<float> decode_values(const std::string& bin) {
  std::vector<float> values(bin.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bin.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

// Returns false (with a reason) if the cache entry is unusable.
bool read_cache(const std::string& manifest_path, const std::string& bin_path, const std::string& identity,
                std::size_t rows, std::size_t cols, std::vector<float>& values, std::string& reason) {
  try {
    const auto manifest = nlohmann::json::parse(read_file(manifest_path));
    if (manifest.at("identity").get<std::string>() != identity) {
      reason = "identity mismatch";
      return false;
    }
    if (manifest.at("rows").get<std::size_t>() != rows || manifest.at("cols").get<std::size_t>() != cols) {
      reason = "dimension mismatch";
      return false;
    }
    const std::string bin = read_file(bin_path);
    if (bin.size() != rows * cols * 4) {
      reason = "binary size mismatch";
      return false;
    }
    if (sha256_hex(bin) != manifest.at("checksum").get<std::string>()) {
      reason = "checksum mismatch";
      return false;
    }
    values = decode_values(bin);
    return true;
  } catch (const std::exception& e) {
    reason = e.what();
    return false;
  }
}

}  // namespace

ScoreMatrix build_score_matrix(std::span<const std::string> hypotheses, std::span<const Sample> samples,
                               const MetricParams& params, const std::string& cache_dir, MatrixBuildInfo* info,
                               Execution exec) {
  if (hypotheses.empty()) throw InputError("score matrix needs at least one hypothesis");
  params.check();
  ScoreMatrix m;
  m.params = params;
  m.hypothesis_keys = dedupe_hypotheses(hypotheses);
  for (const auto& s : samples) m.sample_ids.push_back(s.id);
  m.identity = matrix_identity(m.hypothesis_keys, samples, params);
  MatrixBuildInfo local;
  MatrixBuildInfo& inf = info ? *info : local;
  inf = {};

  std::string manifest_path, bin_path;
  if (!cache_dir.empty()) {
    const std::filesystem::path dir(cache_dir);
    manifest_path = (dir / (m.identity + ".mat.json")).string();
    bin_path = (dir / (m.identity + ".mat.bin")).string();
    inf.manifest_path = manifest_path;
    if (std::filesystem::exists(manifest_path)) {
      std::string reason;
      if (read_cache(manifest_path, bin_path, m.identity, m.rows(), m.cols(), m.values, reason)) {
        inf.cache_hit = true;
        return m;
      }
      inf.recovered_from_corruption = true;
      inf.corruption_reason = reason;
    }
  }

  const MatrixKernel kernel(m.hypothesis_keys, samples, params);
  m.values.assign(m.rows() * m.cols(), 0.0f);
  kernel.fill(m.values, exec);

  if (!cache_dir.empty()) {
    const std::string bin = encode_values(m.values);
    const nlohmann::json manifest = {{"identity", m.identity},
                                     {"rows", m.rows()},
                                     {"cols", m.cols()},
                                     {"params", params.canonical()},
                                     {"format", "float32-le-row-major"},
                                     {"checksum", sha256_hex(bin)}};
    write_file_atomic(bin_path, bin);
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  }
  return m;
}

}  // namespace divkit
