#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace divkit {

enum class Split { train, val, test };

const char* to_string(Split s);
Split parse_split(const std::string& s);

struct Sample {
  std::string id;
  Split split = Split::train;
  std::vector<std::string> references;
  std::optional<std::vector<std::string>> labels;

  bool operator==(const Sample&) const = default;
};

struct CaptionDataset {
  std::string name;
  std::vector<Sample> samples;

  std::size_t reference_count() const;
  bool operator==(const CaptionDataset&) const = default;
};

struct ValidationReport {
  std::size_t sample_count = 0;
  std::size_t reference_count = 0;
  std::vector<std::string> duplicate_ids;
  std::vector<std::string> empty_reference_ids;
  std::map<Split, std::size_t> split_histogram;
};

/// Reads the dataset JSON document. Caption strings are NFC-normalized and
/// trimmed; sample and reference order is preserved. Throws InputError naming
/// the offending sample id and its byte offset.
CaptionDataset load_dataset(const std::string& path);
CaptionDataset parse_dataset(const std::string& text);
std::string serialize_dataset(const CaptionDataset& dataset);

/// Plain-text corpus (one sample per sentence, sentences split on '.').
CaptionDataset load_plain_text_corpus(const std::string& path);

ValidationReport validate(const CaptionDataset& dataset);

/// Content hash over names, ids, splits, references and labels.
std::string dataset_hash(const CaptionDataset& dataset);

/// Keeps only samples of the given split; nullopt keeps everything.
CaptionDataset filter_split(const CaptionDataset& dataset, std::optional<Split> split);

/// NFC normalization followed by trimming of Unicode whitespace.
std::string normalize_caption(const std::string& raw);

/// Per-reference fixed-dimension vectors, addressed by (sample index,
/// reference index) of the dataset they were attached to.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::size_t dim, std::vector<std::size_t> sample_offsets, std::vector<float> data);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  const float* row(std::size_t sample, std::size_t ref) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> offsets_;  // first row of each sample
  std::vector<float> data_;
};

/// Loads `<stem>.emb.json` + `<stem>.emb.bin`. `sidecar` may be the stem or the
/// manifest path.
EmbeddingStore attach_embeddings(const CaptionDataset& dataset, const std::string& sidecar);

/// Writes a sidecar pair in the same format; rows ordered by dataset order.
void write_embeddings(const CaptionDataset& dataset, const EmbeddingStore& store,
                      const std::string& stem);

/// Embeds every reference with the built-in hashed character n-gram embedder.
EmbeddingStore builtin_embeddings(const CaptionDataset& dataset);

}  // namespace divkit
