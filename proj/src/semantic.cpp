#include "divkit/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "divkit/textproc.hpp"

namespace divkit {

namespace {

constexpr double kDistanceEpsilon = 1e-9;

double clamp_distance(double d) { return std::clamp(d, 0.0, 2.0); }

std::vector<std::string> caption_keys(const Sample& sample) {
  std::vector<std::string> keys;
  keys.reserve(sample.references.size());
  for (const auto& r : sample.references) keys.push_back(lowercase(r));
  return keys;
}

void check_store(const CaptionDataset& dataset, const EmbeddingStore& embeddings) {
  if (embeddings.size() != dataset.reference_count())
    throw InputError("embedding store has " + std::to_string(embeddings.size()) + " rows for " +
                     std::to_string(dataset.reference_count()) + " references");
}

double novelty_pct(const Sample& sample) {
  const auto keys = caption_keys(sample);
  if (keys.empty()) return 0.0;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& k : keys) ++counts[k];
  std::size_t once = 0;
  for (const auto& k : keys) once += counts[k] == 1;
  return 100.0 * static_cast<double>(once) / static_cast<double>(keys.size());
}

SampleSemantics analyze_one(const Sample& sample, std::size_t index, const EmbeddingStore& embeddings) {
  SampleSemantics out;
  out.sample_id = sample.id;
  out.novelty_pct = novelty_pct(sample);

  const auto unique = unique_caption_indices(sample);
  const std::size_t u = unique.size();
  out.unique_caption_count = u;
  if (u < 2) return out;

  const std::size_t dim = embeddings.dim();
  std::vector<const float*> rows;
  for (std::size_t j : unique) rows.push_back(embeddings.row(index, j));
  std::vector<double> dist(u * u, 0.0);
  for (std::size_t a = 0; a < u; ++a)
    for (std::size_t b = a + 1; b < u; ++b) dist[a * u + b] = dist[b * u + a] = cosine_distance(rows[a], rows[b], dim);

  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < u; ++a)
    for (std::size_t b = a + 1; b < u; ++b) {
      sum += dist[a * u + b];
      ++pairs;
    }
  const double mean = sum / static_cast<double>(pairs);
  double sq = 0;
  for (std::size_t a = 0; a < u; ++a)
    for (std::size_t b = a + 1; b < u; ++b) sq += (dist[a * u + b] - mean) * (dist[a * u + b] - mean);
  out.variance = sq / static_cast<double>(pairs);

  double delta_sum = 0;
  for (std::size_t a = 0; a < u; ++a) {
    double d_min = 2.0;
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t b = 0; b < u; ++b) {
      if (b == a) continue;
      d_min = std::min(d_min, dist[a * u + b]);
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += rows[b][d];
    }
    for (auto& c : centroid) c /= static_cast<double>(u - 1);
    out.min_pairwise_distances.push_back(d_min);
    const double d_mean = cosine_distance(centroid, rows[a]);
    // A caption lying on its centroid's direction gives d_mean of a few ulps;
    // dividing by that rounding noise would swamp the mean.
    delta_sum += d_mean < kDistanceEpsilon ? 0.0 : 100.0 * (d_mean - d_min) / d_mean;
  }
  out.mean_delta_pct = delta_sum / static_cast<double>(u);
  return out;
}

}  // namespace

double cosine_distance(const float* a, const float* b, std::size_t dim) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 1.0;
  return clamp_distance(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
}

double cosine_distance(const std::vector<double>& a, const float* b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 1.0;
  return clamp_distance(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
}

std::vector<std::size_t> unique_caption_indices(const Sample& sample) {
  const auto keys = caption_keys(sample);
  std::vector<std::size_t> out;
  std::map<std::string_view, bool> seen;
  for (std::size_t j = 0; j < keys.size(); ++j)
    if (seen.emplace(keys[j], true).second) out.push_back(j);
  return out;
}

std::vector<SampleSemantics> analyze_samples(const CaptionDataset& dataset, const EmbeddingStore& embeddings,
                                             Execution exec) {
  check_store(dataset, embeddings);
  const std::size_t n = dataset.samples.size();
  std::vector<SampleSemantics> out(n);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = analyze_one(dataset.samples[i], i, embeddings);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) out[i] = analyze_one(dataset.samples[i], i, embeddings);
  }
  return out;
}

std::size_t histogram_bucket(double distance) {
  // Small epsilon so bucket edges such as 0.1 land in the bucket they start.
  const double b = std::floor(distance / kHistogramWidth + 1e-9);
  return static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(kHistogramBuckets - 1)));
}

RedundancyResult redundancy(const CaptionDataset& dataset, const EmbeddingStore& embeddings) {
  RedundancyResult out;
  for (auto& s : analyze_samples(dataset, embeddings)) {
    if (s.unique_caption_count < 2) {
      ++out.excluded;
      out.per_sample.emplace_back();
      continue;
    }
    for (double h : s.min_pairwise_distances) ++out.histogram[histogram_bucket(h)];
    out.per_sample.push_back(std::move(s.min_pairwise_distances));
  }
  return out;
}

namespace {

template <class Get>
PerSampleValues collect(const std::vector<SampleSemantics>& all, Get get) {
  PerSampleValues out;
  double sum = 0;
  std::size_t used = 0;
  for (const auto& s : all) {
    const std::optional<double> v = get(s);
    out.per_sample.push_back(v);
    if (!v) {
      ++out.excluded;
      continue;
    }
    sum += *v;
    ++used;
  }
  out.mean = used == 0 ? 0.0 : sum / static_cast<double>(used);
  return out;
}

}  // namespace

PerSampleValues mean_delta(const CaptionDataset& dataset, const EmbeddingStore& embeddings) {
  return collect(analyze_samples(dataset, embeddings), [](const SampleSemantics& s) { return s.mean_delta_pct; });
}

PerSampleValues sample_variance(const CaptionDataset& dataset, const EmbeddingStore& embeddings) {
  return collect(analyze_samples(dataset, embeddings), [](const SampleSemantics& s) { return s.variance; });
}

NoveltyResult novelty(const CaptionDataset& dataset) {
  NoveltyResult out;
  double sum = 0;
  for (const auto& sample : dataset.samples) {
    const double pct = novelty_pct(sample);
    out.per_sample.push_back(pct);
    sum += pct;
  }
  out.mean = dataset.samples.empty() ? 0.0 : sum / static_cast<double>(dataset.samples.size());
  return out;
}

}  // namespace divkit
