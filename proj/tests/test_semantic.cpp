#include <doctest.h>

#include <cmath>

#include "divkit/semantic.hpp"
#include "helpers.hpp"

using namespace divkit;

namespace {

using Vec = std::vector<double>;

double dist(const Vec& a, const Vec& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 1.0;
  return 1 - dot / std::sqrt(na * nb);
}

struct Expected {
  double variance;
  std::vector<double> h;
  double delta;
};

// Direct evaluation for one sample whose captions are all distinct.
Expected expected(const std::vector<Vec>& rows) {
  const std::size_t u = rows.size();
  std::vector<double> pairs;
  for (std::size_t a = 0; a < u; ++a)
    for (std::size_t b = a + 1; b < u; ++b) pairs.push_back(dist(rows[a], rows[b]));
  double mean = 0;
  for (double p : pairs) mean += p / static_cast<double>(pairs.size());
  Expected e{0, {}, 0};
  for (double p : pairs) e.variance += (p - mean) * (p - mean) / static_cast<double>(pairs.size());
  for (std::size_t a = 0; a < u; ++a) {
    double h = 10;
    Vec centroid(rows[a].size(), 0);
    for (std::size_t b = 0; b < u; ++b) {
      if (b == a) continue;
      h = std::min(h, dist(rows[a], rows[b]));
      for (std::size_t d = 0; d < centroid.size(); ++d) centroid[d] += rows[b][d] / static_cast<double>(u - 1);
    }
    e.h.push_back(h);
    const double dm = dist(centroid, rows[a]);
    e.delta += (dm < 1e-9 ? 0 : 100 * (dm - h) / dm) / static_cast<double>(u);
  }
  return e;
}

}  // namespace

TEST_CASE("cosine distance") {
  const float a[2] = {1, 0}, b[2] = {0, 1}, c[2] = {-1, 0}, z[2] = {0, 0};
  CHECK(cosine_distance(a, a, 2) == doctest::Approx(0.0));
  CHECK(cosine_distance(a, b, 2) == doctest::Approx(1.0));
  CHECK(cosine_distance(a, c, 2) == doctest::Approx(2.0));
  CHECK(cosine_distance(a, z, 2) == 1.0);
}

TEST_CASE("hand-computed three-caption sample") {
  const auto d = testing::dataset({{"x", "y", "z"}});
  const auto e = testing::store({{{1, 0}, {0, 1}, {1, 1}}});
  const auto s = analyze_samples(d, e).front();
  const double near = 1 - 1 / std::sqrt(2.0);
  REQUIRE(s.min_pairwise_distances.size() == 3);
  CHECK(s.min_pairwise_distances[0] == doctest::Approx(near));
  CHECK(s.min_pairwise_distances[1] == doctest::Approx(near));
  CHECK(s.min_pairwise_distances[2] == doctest::Approx(near));
  const double mean = (1 + 2 * near) / 3;
  CHECK(*s.variance == doctest::Approx(((1 - mean) * (1 - mean) + 2 * (near - mean) * (near - mean)) / 3));
  // caption 3's centroid of others is (0.5, 0.5), same direction as itself
  const double d3 = 0, d1 = 1 - 0.5 / std::sqrt(1.25);
  const double delta = (100 * (d1 - near) / d1 * 2 + (d3 == 0 ? 0 : 1)) / 3;
  CHECK(*s.mean_delta_pct == doctest::Approx(delta));
}

TEST_CASE("analysis matches direct evaluation on random vectors") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int i = 0; i < 30; ++i) {
    std::vector<std::vector<std::string>> caps;
    std::vector<std::vector<std::vector<float>>> rows;
    std::vector<std::vector<Vec>> exact;
    for (int s = 0; s < 5; ++s) {
      const int k = 2 + static_cast<int>(rng() % 4);
      caps.emplace_back();
      rows.emplace_back();
      exact.emplace_back();
      for (int j = 0; j < k; ++j) {
        caps.back().push_back("caption " + std::to_string(j));
        std::vector<float> f;
        Vec v;
        for (int x = 0; x < 6; ++x) {
          f.push_back(static_cast<float>(g(rng)));
          v.push_back(f.back());
        }
        rows.back().push_back(f);
        exact.back().push_back(v);
      }
    }
    const auto d = testing::dataset(caps);
    const auto store = testing::store(rows);
    const auto serial = analyze_samples(d, store, Execution::serial);
    const auto parallel = analyze_samples(d, store, Execution::parallel);
    for (std::size_t s = 0; s < serial.size(); ++s) {
      const auto e = expected(exact[s]);
      CHECK(*serial[s].variance == doctest::Approx(e.variance).epsilon(1e-9));
      CHECK(*serial[s].mean_delta_pct == doctest::Approx(e.delta).epsilon(1e-9));
      for (std::size_t j = 0; j < e.h.size(); ++j) CHECK(serial[s].min_pairwise_distances[j] == doctest::Approx(e.h[j]).epsilon(1e-9));
      CHECK(serial[s].min_pairwise_distances == parallel[s].min_pairwise_distances);
      CHECK(serial[s].variance == parallel[s].variance);
    }
  }
}

TEST_CASE("duplicates collapse and single-caption samples are excluded") {
  const auto d = testing::dataset({{"A dog", "a dog", "a cat"}, {"alone"}, {"twice", "TWICE"}});
  const auto e = testing::store({{{1, 0}, {1, 0}, {0, 1}}, {{1, 1}}, {{1, 0}, {1, 0}}});
  CHECK(unique_caption_indices(d.samples[0]) == std::vector<std::size_t>{0, 2});
  const auto r = redundancy(d, e);
  CHECK(r.excluded == 2);
  CHECK(r.per_sample[0].size() == 2);
  CHECK(r.per_sample[1].empty());
  std::size_t total = 0;
  for (auto h : r.histogram) total += h;
  CHECK(total == 2);
  CHECK(r.histogram[histogram_bucket(1.0)] == 2);

  const auto v = sample_variance(d, e);
  CHECK(v.excluded == 2);
  CHECK(!v.per_sample[1]);
  CHECK(*v.per_sample[0] == doctest::Approx(0.0));
  CHECK(mean_delta(d, e).excluded == 2);
}

TEST_CASE("histogram buckets") {
  CHECK(histogram_bucket(0.0) == 0);
  CHECK(histogram_bucket(0.049) == 0);
  CHECK(histogram_bucket(0.05) == 1);
  CHECK(histogram_bucket(0.1) == 2);
  CHECK(histogram_bucket(2.0) == kHistogramBuckets - 1);
}

TEST_CASE("novelty") {
  const auto d = testing::dataset({{"a", "b", "a", "c"}, {"x", "y"}, {"z", "Z"}});
  const auto n = novelty(d);
  CHECK(n.per_sample == std::vector<double>{50.0, 100.0, 0.0});
  CHECK(n.mean == doctest::Approx(50.0));
}

TEST_CASE("store size must match the dataset") {
  const auto d = testing::dataset({{"a", "b"}});
  CHECK_THROWS_AS(analyze_samples(d, testing::store({{{1, 0}}})), InputError);
}
