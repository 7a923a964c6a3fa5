#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "divkit/corpus.hpp"
#include "divkit/textproc.hpp"
#include "divkit/util.hpp"

namespace testing {

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline divkit::TokenSequence seq(const std::string& s) { return {words(s), std::nullopt}; }

inline divkit::TokenCorpus corpus(const std::vector<std::vector<std::string>>& samples) {
  divkit::TokenCorpus c;
  for (const auto& refs : samples) {
    auto& s = c.samples.emplace_back();
    for (const auto& r : refs) s.push_back(seq(r));
  }
  return c;
}

inline divkit::CaptionDataset dataset(const std::vector<std::vector<std::string>>& samples,
                                      divkit::Split split = divkit::Split::train) {
  divkit::CaptionDataset d;
  d.name = "fixture";
  for (std::size_t i = 0; i < samples.size(); ++i)
    d.samples.push_back({"s" + std::to_string(i), split, samples[i], std::nullopt});
  return d;
}

inline std::string random_caption(std::mt19937_64& rng, const std::vector<std::string>& vocab, int min_len, int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) out += (i ? " " : "") + vocab[pick(rng)];
  return out;
}

inline std::vector<std::vector<std::string>> random_samples(std::mt19937_64& rng, std::size_t samples, int min_refs,
                                                            int max_refs, const std::vector<std::string>& vocab,
                                                            int min_len = 2, int max_len = 8) {
  std::uniform_int_distribution<int> refs(min_refs, max_refs);
  std::vector<std::vector<std::string>> out(samples);
  for (auto& s : out) {
    const int k = refs(rng);
    for (int i = 0; i < k; ++i) s.push_back(random_caption(rng, vocab, min_len, max_len));
  }
  return out;
}

inline const std::vector<std::string>& small_vocab() {
  static const std::vector<std::string> v = {"a", "man", "dog", "runs", "running", "is", "the", "park", "in", "ball"};
  return v;
}

// Fresh empty directory under the system temp dir.
inline std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("divkit_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

// Embedding store from explicit per-sample row lists.
inline divkit::EmbeddingStore store(const std::vector<std::vector<std::vector<float>>>& rows) {
  std::vector<std::size_t> offsets;
  std::vector<float> data;
  std::size_t dim = rows.front().front().size();
  std::size_t row = 0;
  for (const auto& s : rows) {
    offsets.push_back(row);
    for (const auto& r : s) {
      data.insert(data.end(), r.begin(), r.end());
      ++row;
    }
  }
  return divkit::EmbeddingStore(dim, offsets, data);
}

}  // namespace testing
