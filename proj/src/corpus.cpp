#include "divkit/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <set>

#include <json.hpp>

#include "divkit/textproc.hpp"
#include "divkit/util.hpp"

namespace divkit {

using nlohmann::json;

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw InputError("unknown split '" + s + "' (expected train, val or test)");
}

std::size_t CaptionDataset::reference_count() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.references.size();
  return n;
}

std::string normalize_caption(const std::string& raw) {
  bool ascii = true;
  for (unsigned char c : raw) {
    if (c >= 0x80) {
      ascii = false;
      break;
    }
  }
  if (ascii) {
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    return raw.substr(b, e - b);
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString normalized = nfc->normalize(icu::UnicodeString::fromUTF8(raw), status);
  if (U_FAILURE(status)) throw InputError("cannot normalize caption: " + raw);
  int32_t begin = 0, end = normalized.length();
  while (begin < end && u_isUWhiteSpace(normalized.char32At(begin))) begin = normalized.moveIndex32(begin, 1);
  while (end > begin) {
    const int32_t prev = normalized.moveIndex32(end, -1);
    if (!u_isUWhiteSpace(normalized.char32At(prev))) break;
    end = prev;
  }
  std::string out;
  normalized.tempSubStringBetween(begin, end).toUTF8String(out);
  return out;
}

namespace {

// Byte offset of each element of the top-level "samples" array. The text has
// already been parsed successfully, so only structure needs tracking.
std::vector<std::size_t> sample_offsets(const std::string& text) {
  std::vector<std::size_t> offsets;
  int depth = 0;
  int samples_depth = -1;  // depth inside the samples array, -1 before, -2 after
  bool expect_element = false;
  bool in_string = false;
  bool escaped = false;
  bool key_is_samples = false;
  std::size_t string_start = 0;
  std::string last_string;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
        last_string = text.substr(string_start, i - string_start);
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (expect_element && depth == samples_depth && c != ']') {
      offsets.push_back(i);
      expect_element = false;
    }
    switch (c) {
      case '"':
        in_string = true;
        string_start = i + 1;
        break;
      case ':':
        key_is_samples = (depth == 1 && last_string == "samples");
        break;
      case ',':
        if (depth == samples_depth) expect_element = true;
        break;
      case '{':
      case '[':
        ++depth;
        if (c == '[' && key_is_samples && samples_depth == -1) {
          samples_depth = depth;
          expect_element = true;
        }
        key_is_samples = false;
        break;
      case '}':
      case ']':
        if (depth == samples_depth) samples_depth = -2;
        --depth;
        break;
      default:
        break;
    }
  }
  return offsets;
}

[[noreturn]] void fail_sample(const std::string& id, std::size_t offset, const std::string& what) {
  throw InputError("sample '" + id + "' (byte " + std::to_string(offset) + "): " + what);
}

std::vector<std::string> string_list(const json& j, const std::string& id, std::size_t offset,
                                     const char* field) {
  if (!j.is_array()) fail_sample(id, offset, std::string("'") + field + "' must be an array of strings");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_string()) fail_sample(id, offset, std::string("'") + field + "' must contain only strings");
    out.push_back(normalize_caption(v.get<std::string>()));
  }
  return out;
}

}  // namespace

CaptionDataset parse_dataset(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed dataset document (byte ") + std::to_string(e.byte) + "): " + e.what());
  }
  if (!doc.is_object()) throw InputError("malformed dataset document (byte 0): top level must be an object");
  if (!doc.contains("samples") || !doc["samples"].is_array())
    throw InputError("malformed dataset document (byte 0): missing 'samples' array");

  const auto offsets = sample_offsets(text);
  CaptionDataset ds;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw InputError("malformed dataset document (byte 0): 'name' must be a string");
    ds.name = doc["name"].get<std::string>();
  }
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& js : doc["samples"]) {
    const std::size_t offset = index < offsets.size() ? offsets[index] : 0;
    const std::string where = "#" + std::to_string(index);
    if (!js.is_object()) fail_sample(where, offset, "sample must be an object");
    if (!js.contains("id") || !js["id"].is_string()) fail_sample(where, offset, "missing string 'id'");
    Sample s;
    s.id = js["id"].get<std::string>();
    if (!seen.insert(s.id).second) fail_sample(s.id, offset, "duplicate sample id");
    if (!js.contains("split") || !js["split"].is_string()) fail_sample(s.id, offset, "missing string 'split'");
    try {
      s.split = parse_split(js["split"].get<std::string>());
    } catch (const InputError& e) {
      fail_sample(s.id, offset, e.what());
    }
    if (!js.contains("references")) fail_sample(s.id, offset, "missing 'references'");
    s.references = string_list(js["references"], s.id, offset, "references");
    if (s.references.empty()) fail_sample(s.id, offset, "sample has zero references");
    if (js.contains("labels") && !js["labels"].is_null()) s.labels = string_list(js["labels"], s.id, offset, "labels");
    ds.samples.push_back(std::move(s));
    ++index;
  }
  return ds;
}

CaptionDataset load_dataset(const std::string& path) {
  if (!std::filesystem::exists(path)) throw InputError("dataset file not found: " + path);
  return parse_dataset(read_file(path));
}

std::string serialize_dataset(const CaptionDataset& dataset) {
  json samples = json::array();
  for (const auto& s : dataset.samples) {
    json js = {{"id", s.id}, {"split", to_string(s.split)}, {"references", s.references}};
    if (s.labels) js["labels"] = *s.labels;
    samples.push_back(std::move(js));
  }
  return json{{"name", dataset.name}, {"samples", std::move(samples)}}.dump(2) + "\n";
}

CaptionDataset load_plain_text_corpus(const std::string& path) {
  const std::string text = read_file(path);
  CaptionDataset ds;
  ds.name = std::filesystem::path(path).stem().string();
  std::vector<std::string> current;
  auto flush = [&] {
    if (current.empty()) return;
    std::string sentence;
    for (const auto& t : current) {
      if (!sentence.empty()) sentence += ' ';
      sentence += t;
    }
    ds.samples.push_back({"s" + std::to_string(ds.samples.size()), Split::train, {sentence}, std::nullopt});
    current.clear();
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    for (auto& tok : tokenize(normalize_caption(text.substr(start, end - start))).tokens) {
      if (tok == ".") {
        flush();
      } else {
        current.push_back(std::move(tok));
      }
    }
    start = end + 1;
  }
  flush();
  return ds;
}

ValidationReport validate(const CaptionDataset& dataset) {
  ValidationReport r;
  r.sample_count = dataset.samples.size();
  r.split_histogram = {{Split::train, 0}, {Split::val, 0}, {Split::test, 0}};
  std::map<std::string, std::size_t> ids;
  for (const auto& s : dataset.samples) {
    r.reference_count += s.references.size();
    ++r.split_histogram[s.split];
    if (++ids[s.id] == 2) r.duplicate_ids.push_back(s.id);
    if (s.references.empty()) r.empty_reference_ids.push_back(s.id);
  }
  return r;
}

std::string dataset_hash(const CaptionDataset& dataset) {
  Sha256 h;
  h.field(dataset.name);
  for (const auto& s : dataset.samples) {
    h.field(s.id).field(to_string(s.split)).field(std::to_string(s.references.size()));
    for (const auto& r : s.references) h.field(r);
    if (s.labels) {
      h.field("labels").field(std::to_string(s.labels->size()));
      for (const auto& l : *s.labels) h.field(l);
    }
  }
  return h.hex();
}

CaptionDataset filter_split(const CaptionDataset& dataset, std::optional<Split> split) {
  if (!split) return dataset;
  CaptionDataset out;
  out.name = dataset.name;
  for (const auto& s : dataset.samples)
    if (s.split == *split) out.samples.push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingStore::EmbeddingStore(std::size_t dim, std::vector<std::size_t> sample_offsets, std::vector<float> data)
    : dim_(dim), offsets_(std::move(sample_offsets)), data_(std::move(data)) {}

const float* EmbeddingStore::row(std::size_t sample, std::size_t ref) const {
  return data_.data() + (offsets_.at(sample) + ref) * dim_;
}

namespace {

std::string sidecar_stem(const std::string& sidecar) {
  const std::string suffix = ".emb.json";
  if (sidecar.size() > suffix.size() && sidecar.compare(sidecar.size() - suffix.size(), suffix.size(), suffix) == 0)
    return sidecar.substr(0, sidecar.size() - suffix.size());
  return sidecar;
}

float load_le_float(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

void store_le_float(char* p, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  std::memcpy(p, &bits, 4);
}

std::vector<std::size_t> row_offsets(const CaptionDataset& dataset) {
  std::vector<std::size_t> offsets;
  offsets.reserve(dataset.samples.size());
  std::size_t next = 0;
  for (const auto& s : dataset.samples) {
    offsets.push_back(next);
    next += s.references.size();
  }
  return offsets;
}

}  // namespace

EmbeddingStore attach_embeddings(const CaptionDataset& dataset, const std::string& sidecar) {
  const std::string stem = sidecar_stem(sidecar);
  json manifest;
  try {
    manifest = json::parse(read_file(stem + ".emb.json"));
  } catch (const json::parse_error& e) {
    throw InputError("malformed embedding manifest " + stem + ".emb.json: " + e.what());
  }
  if (!manifest.contains("dim") || !manifest["dim"].is_number_integer() || manifest["dim"].get<long long>() <= 0)
    throw InputError("embedding manifest: 'dim' must be a positive integer");
  if (!manifest.contains("count") || !manifest["count"].is_number_integer())
    throw InputError("embedding manifest: missing integer 'count'");
  if (!manifest.contains("records") || !manifest["records"].is_array())
    throw InputError("embedding manifest: missing 'records' array");
  const auto dim = manifest["dim"].get<std::size_t>();
  const auto count = manifest["count"].get<std::size_t>();
  const std::size_t total = dataset.reference_count();
  if (count != total)
    throw InputError("embedding manifest count " + std::to_string(count) + " does not match dataset reference count " +
                     std::to_string(total));

  const std::string bin = read_file(stem + ".emb.bin");
  if (bin.size() != count * dim * 4)
    throw InputError("embedding binary size " + std::to_string(bin.size()) + " does not match " +
                     std::to_string(count) + " x " + std::to_string(dim) + " float32 values (dimension mismatch)");

  std::map<std::string, std::size_t> sample_index;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) sample_index.emplace(dataset.samples[i].id, i);
  const auto offsets = row_offsets(dataset);
  std::vector<long long> source_row(total, -1);
  for (const auto& rec : manifest["records"]) {
    if (!rec.contains("sample_id") || !rec.contains("ref_index") || !rec.contains("row"))
      throw InputError("embedding record missing sample_id/ref_index/row");
    const auto sid = rec["sample_id"].get<std::string>();
    const auto k = rec["ref_index"].get<long long>();
    const auto row = rec["row"].get<long long>();
    auto it = sample_index.find(sid);
    if (it == sample_index.end()) throw InputError("embedding record for unknown sample '" + sid + "'");
    const auto& refs = dataset.samples[it->second].references;
    if (k < 0 || static_cast<std::size_t>(k) >= refs.size())
      throw InputError("embedding record (" + sid + ", " + std::to_string(k) + ") has no matching reference");
    if (row < 0 || static_cast<std::size_t>(row) >= count)
      throw InputError("embedding record (" + sid + ", " + std::to_string(k) + ") row out of range");
    long long& slot = source_row[offsets[it->second] + static_cast<std::size_t>(k)];
    if (slot >= 0) throw InputError("duplicate embedding record (" + sid + ", " + std::to_string(k) + ")");
    slot = row;
  }

  std::vector<float> data(total * dim);
  for (std::size_t s = 0; s < dataset.samples.size(); ++s) {
    for (std::size_t k = 0; k < dataset.samples[s].references.size(); ++k) {
      const long long src = source_row[offsets[s] + k];
      if (src < 0)
        throw InputError("missing embedding record for (" + dataset.samples[s].id + ", " + std::to_string(k) + ")");
      float* dst = data.data() + (offsets[s] + k) * dim;
      const char* p = bin.data() + static_cast<std::size_t>(src) * dim * 4;
      for (std::size_t d = 0; d < dim; ++d) {
        dst[d] = load_le_float(p + 4 * d);
        if (!std::isfinite(dst[d]))
          throw InputError("non-finite embedding value for (" + dataset.samples[s].id + ", " + std::to_string(k) + ")");
      }
    }
  }
  return EmbeddingStore(dim, offsets, std::move(data));
}

void write_embeddings(const CaptionDataset& dataset, const EmbeddingStore& store, const std::string& stem_or_manifest) {
  const std::string stem = sidecar_stem(stem_or_manifest);
  const std::size_t dim = store.dim();
  json records = json::array();
  std::string bin;
  bin.resize(dataset.reference_count() * dim * 4);
  std::size_t row = 0;
  for (std::size_t s = 0; s < dataset.samples.size(); ++s) {
    for (std::size_t k = 0; k < dataset.samples[s].references.size(); ++k, ++row) {
      records.push_back({{"sample_id", dataset.samples[s].id}, {"ref_index", k}, {"row", row}});
      const float* v = store.row(s, k);
      for (std::size_t d = 0; d < dim; ++d) store_le_float(bin.data() + (row * dim + d) * 4, v[d]);
    }
  }
  const json manifest = {{"dim", dim}, {"count", row}, {"records", std::move(records)}};
  write_file_atomic(stem + ".emb.bin", bin);
  write_file_atomic(stem + ".emb.json", manifest.dump() + "\n");
}

EmbeddingStore builtin_embeddings(const CaptionDataset& dataset) {
  const auto offsets = row_offsets(dataset);
  std::vector<float> data(dataset.reference_count() * kBuiltinEmbeddingDim);
  const auto n = static_cast<long long>(dataset.samples.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long s = 0; s < n; ++s) {
    const auto& refs = dataset.samples[static_cast<std::size_t>(s)].references;
    for (std::size_t k = 0; k < refs.size(); ++k) {
      const auto e = builtin_embed(tokenize(refs[k]));
      std::copy(e.values.begin(), e.values.end(),
                data.begin() + static_cast<std::ptrdiff_t>((offsets[static_cast<std::size_t>(s)] + k) * kBuiltinEmbeddingDim));
    }
  }
  return EmbeddingStore(kBuiltinEmbeddingDim, offsets, std::move(data));
}

}  // namespace divkit
