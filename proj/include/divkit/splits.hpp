#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "divkit/concepts.hpp"
#include "divkit/corpus.hpp"

namespace divkit {

enum class SplitAxis { caption_length, concept_label, sample_variance };

const char* to_string(SplitAxis a);
SplitAxis parse_split_axis(const std::string& s);

struct SplitSpec {
  SplitAxis axis = SplitAxis::caption_length;
  int bins = 2;
  std::uint64_t seed = 0;
};

struct SplitFile {
  SplitAxis axis = SplitAxis::caption_length;
  std::map<std::string, std::vector<std::string>> bins;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

/// Stratified evaluation splits. concept_label needs `labels`; sample_variance
/// needs `embeddings`. Throws InputError when the axis input is missing.
SplitFile generate_splits(const CaptionDataset& dataset, const SplitSpec& spec,
                          const EmbeddingStore* embeddings = nullptr, const LabelSet* labels = nullptr);

}  // namespace divkit
